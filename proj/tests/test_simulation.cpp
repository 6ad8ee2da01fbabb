#include <doctest.h>

#include <cmath>

#include "contractlab/boundary_values.hpp"
#include "contractlab/simulation.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace contractlab;

namespace {

bool within(const McEstimate& e, double target, double k = 3.0)
{
    return std::abs(e.mean - target) <= k * e.se;
}

} // namespace

TEST_CASE("liquidation at the first default under all-shirk is exponential")
{
    const Model m(fixture::fig1());
    const ShortTermContract zero(m, 1, 0.0, 0.0, 0.0, 0.0);
    const auto paths = simulate_many(m, zero, Bank::bad, Strategy::always_shirk, 100000, 11);
    std::vector<double> tau;
    for (const auto& p : paths) tau.push_back(p.tau);
    const McEstimate e = summarize(tau, 11);
    CHECK(within(e, 1.0 / m.lambda_sh(1)));
    const double lam = m.lambda_sh(1);
    const double D = ks_statistic(tau, [&](double x) { return 1.0 - std::exp(-lam * x); });
    CHECK(ks_pvalue(D, tau.size()) > 0.01);
}

TEST_CASE("pool exhaustion time under full continuation is hypoexponential")
{
    const Model m(fixture::pool3());
    const ShortTermContract keep(m, 3, 0.0, 0.0, 0.0, 1.0);
    const auto paths = simulate_many(m, keep, Bank::bad, Strategy::recommended, 100000, 12);
    std::vector<double> tau, gap1;
    for (const auto& p : paths) {
        REQUIRE(p.default_times.size() == 3);
        tau.push_back(p.tau);
        gap1.push_back(p.default_times[1] - p.default_times[0]);
    }
    const std::vector<double> rates = {m.lambda_sh(3), m.lambda_sh(2), m.lambda_sh(1)};
    const Hypoexp law(rates);
    const double D = ks_statistic(tau, [&](double x) { return law.cdf(x); });
    CHECK(ks_pvalue(D, tau.size()) > 0.01);
    const double l2 = m.lambda_sh(2);
    const double D2 = ks_statistic(gap1, [&](double x) { return 1.0 - std::exp(-l2 * x); });
    CHECK(ks_pvalue(D2, gap1.size()) > 0.01);
    // The KS machinery rejects a wrong law.
    const double Dw = ks_statistic(tau, [&](double x) { return 1.0 - std::exp(-x / law.mean()); });
    CHECK(ks_pvalue(Dw, tau.size()) < 0.01);
}

TEST_CASE("KS p-value sanity")
{
    CHECK(ks_pvalue(0.0, 1000) == 1.0);
    CHECK(ks_pvalue(1.36 / std::sqrt(1000.0), 1000) == doctest::Approx(0.05).epsilon(0.1));
    CHECK(ks_pvalue(0.2, 1000) < 1e-10);
}

TEST_CASE("bank values of elementary contracts")
{
    const Model m(fixture::pool3());
    for (int j = 1; j <= 3; ++j) {
        const CredibleSet cs(m, j);
        const ShortTermContract zero(m, j, 0.0, 0.0, 0.0, 0.0);
        CHECK(within(estimate_bank_value(m, zero, Bank::bad, Strategy::recommended, 50000, 20 + j), cs.c1()));
        const ShortTermContract keep(m, j, 0.0, 0.0, 0.0, 1.0);
        CHECK(within(estimate_bank_value(m, keep, Bank::good, Strategy::recommended, 50000, 30 + j), cs.C()));
    }
    const Model m1(fixture::fig1());
    const double cbar = short_term_cbar(m1, 1, Bank::bad);
    const double c = 1.5 * cbar;
    const ShortTermContract pay(m1, 1, c, 0.0, 0.0, 0.0);
    const McEstimate w = estimate_bank_value(m1, pay, Bank::bad, Strategy::always_work, 50000, 40);
    CHECK(within(w, m1.params().rho_b * c / (m1.r() + m1.lambda_0(1))));
}

TEST_CASE("incentive flip around the critical payment rate")
{
    const Model m(fixture::fig1());
    const double cbar = short_term_cbar(m, 1, Bank::bad);
    for (double f : {0.7, 1.3}) {
        const ShortTermContract k(m, 1, f * cbar, 0.0, 0.0, 0.0);
        const auto sh = simulate_many(m, k, Bank::bad, Strategy::always_shirk, 100000, 50);
        const auto wk = simulate_many(m, k, Bank::bad, Strategy::always_work, 100000, 50);
        std::vector<double> d;
        for (std::size_t i = 0; i < sh.size(); ++i) d.push_back(sh[i].bank_value - wk[i].bank_value);
        const McEstimate e = summarize(d, 50);
        if (f < 1.0) CHECK(e.mean > 3.0 * e.se);
        else CHECK(e.mean < -3.0 * e.se);
    }
}

TEST_CASE("upper-boundary contract keeps its promise to the bad bank")
{
    const Model m(fixture::pool2());
    const auto pmh = solve_pmh_all(m);
    for (int j = 1; j <= 2; ++j) {
        const CredibleSet cs(m, j);
        for (double u : {cs.b_hat(), 0.5 * (cs.c1() + cs.x_star()), pmh[j - 1].gamma + 0.05}) {
            const UpperContract k(m, pmh, j, u);
            CHECK(within(estimate_bank_value(m, k, Bank::bad, Strategy::recommended, 50000, 60 + j), u));
        }
        const double u = pmh[j - 1].gamma + 0.05;
        const UpperContract k(m, pmh, j, u);
        const InvestorEstimate inv = estimate_investor_value(m, k, Bank::bad, 50000, 70 + j);
        CHECK(inv.response == Strategy::recommended);
        CHECK(within(inv.investor, pmh[j - 1].value(u)));
    }
}

TEST_CASE("discounted promise plus payments is a martingale on the upper boundary")
{
    const Model m(fixture::pool2());
    const auto pmh = solve_pmh_all(m);
    const CredibleSet cs(m, 2);
    const UpperContract k(m, pmh, 2, 0.5 * (cs.x_star() + cs.b_hat()));
    for (double T : {2.0, 10.0, 40.0}) {
        const McEstimate d = martingale_drift(m, k, T, 20000, 80);
        CHECK(std::abs(d.mean) <= 3.0 * d.se + 1e-12);
    }
}

TEST_CASE("lower-boundary contract values")
{
    const Model m(fixture::pool3());
    for (int j = 1; j <= 3; ++j) {
        const CredibleSet cs(m, j);
        const LowerContract k(m, j, cs.C());
        const InvestorEstimate inv = estimate_investor_value(m, k, Bank::good, 50000, 90 + j);
        CHECK(within(inv.investor, lower_junction_value(m, j)));
        CHECK(within(inv.bank, cs.C()));
    }
}

TEST_CASE("seed determinism and parallel-serial agreement")
{
    const Model m(fixture::pool2());
    const auto pmh = solve_pmh_all(m);
    const UpperContract k(m, pmh, 2, 0.1);
    SimOptions opt;
    opt.log_events = true;
    const auto a = simulate_many(m, k, Bank::good, Strategy::recommended, 500, 7, opt);
    for (long i = 0; i < 500; ++i) {
        const SimPath b = simulate_path(m, k, Bank::good, Strategy::recommended, 7, i, opt);
        REQUIRE(a[i].events.size() == b.events.size());
        for (std::size_t e = 0; e < b.events.size(); ++e) {
            CHECK(a[i].events[e].time == b.events[e].time);
            CHECK(a[i].events[e].type == b.events[e].type);
            CHECK(a[i].events[e].state == b.events[e].state);
        }
        CHECK(a[i].bank_value == b.bank_value);
        CHECK(a[i].investor_value == b.investor_value);
        CHECK(a[i].paid >= 0.0);
    }
}

TEST_CASE("lemma inequalities on random short-term contracts")
{
    const Model m(fixture::pool2());
    const LemmaReport rep = lemma_inequality_scan(m, 2, 20, 4000, 99);
    CHECK(rep.records.size() == 20);
    CHECK(rep.violations == 0);
}

TEST_CASE("refuses tiny samples")
{
    const Model m(fixture::fig1());
    const ShortTermContract zero(m, 1, 0.0, 0.0, 0.0, 0.0);
    CHECK_THROWS_AS(estimate_bank_value(m, zero, Bank::bad, Strategy::recommended, 50, 1), DomainError);
    CHECK_THROWS_AS(ShortTermContract(m, 1, 1.0, 0.0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(ShortTermContract(m, 1, 1.0, 0.0, 0.0, 0.5), DomainError);
}
