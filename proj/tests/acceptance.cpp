// Acceptance run: one PASS/FAIL line per criterion, details indented below it.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "contractlab/boundary_values.hpp"
#include "contractlab/cli.hpp"
#include "contractlab/config.hpp"
#include "contractlab/contracts.hpp"
#include "contractlab/credible_set.hpp"
#include "contractlab/hjb.hpp"
#include "contractlab/pmh.hpp"
#include "contractlab/simulation.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace contractlab;
namespace fs = std::filesystem;

namespace {

constexpr long kPaths = 100000;

struct Outcome {
    bool pass = true;
    std::vector<std::string> notes;
    void fail_if(bool bad, const std::string& what)
    {
        if (bad) {
            pass = false;
            notes.push_back("violated: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

std::string fmt(const char* f, auto... a)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, a...);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

double z(const McEstimate& e, double target) { return (e.mean - target) / e.se; }

int failures = 0;

void criterion(int n, const char* title, double budget_s, const std::function<void(Outcome&)>& body)
{
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.pass = false;
        o.note(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (budget_s > 0.0 && secs > budget_s) {
        o.pass = false;
        o.note(fmt("runtime %.2f s exceeds %.0f s", secs, budget_s));
    }
    if (!o.pass) ++failures;
    std::printf("criterion %d: %s  %s (%.2f s)\n", n, o.pass ? "PASS" : "FAIL", title, secs);
    for (const auto& s : o.notes) std::printf("    %s\n", s.c_str());
    std::fflush(stdout);
}

json run_json(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    if (code != kExitOk) throw std::runtime_error("cli exit " + std::to_string(code) + ": " + err.str());
    return json::parse(out.str());
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void c1_figure(Outcome& o)
{
    const json f = run_json({"figure", "--j", "1"});
    // Closed forms evaluated from the scalars alone.
    const double r = 0.02, B = 0.002, eps = 0.25, a = 0.055, rho = 2.0;
    const double lsh = a * (1.0 + eps), l0 = a;
    const double c1 = B / (r + lsh), bh = B / (a * eps), p = (r + lsh) / (r + l0);
    const double xs = std::pow(rho, -p) * bh / p + c1, uxs = bh / p + c1;
    const std::vector<std::tuple<const char*, double, double>> rows{
        {"left endpoint u_b", f["left_endpoint"][0].get<double>(), c1},
        {"left endpoint u_g", f["left_endpoint"][1].get<double>(), c1},
        {"x*", f["x_star"].get<double>(), xs},
        {"U(x*)", f["U_x_star"].get<double>(), uxs},
        {"b_hat", f["b_hat"].get<double>(), bh},
        {"U(b_hat)", f["U_b_hat"].get<double>(), rho * bh},
        {"C(1)", f["C"].get<double>(), c1},
        {"L(C(1))", f["L_C"].get<double>(), c1}};
    for (const auto& [name, got, want] : rows) {
        o.note(fmt("%-18s %.10f closed form %.10f rel %.1e", name, got, want, rel(got, want)));
        o.fail_if(rel(got, want) > 1e-6, name);
    }
    // Printed reference values.
    const std::vector<std::pair<double, double>> printed{
        {c1, 0.0225352}, {bh, 0.1454545}, {rho * bh, 0.2909091}, {c1, 0.0225352}};
    for (const auto& [got, want] : printed) o.fail_if(rel(got, want) > 1e-6, fmt("printed value %.7f", want));
    o.note(fmt("x* closed form %.7f against the printed 0.0766633: rel %.1e (rounding of the printed figure)",
               xs, rel(xs, 0.0766633)));
}

void c2_ode(Outcome& o)
{
    const Model m(fixture::fig1());
    const OdeCheck c = verify_upper_boundary_ode(m, 1e-5);
    o.note(fmt("max |ODE - closed form| %.3e over %ld steps", c.max_residual, c.steps));
    o.note(fmt("derivative jump at x* %.3e, at b_hat %.3e", c.kink_jump_xstar, c.kink_jump_bhat));
    o.fail_if(!(c.max_residual < 1e-6), "ODE error < 1e-6");
    o.fail_if(!(c.kink_jump_xstar < 1e-8), "C1 at x*");
    o.fail_if(!(c.kink_jump_bhat < 1e-8), "C1 at b_hat");
}

void c3_duality(Outcome& o)
{
    const Model m(fixture::pool3());
    for (int j : {2, 3}) {
        const CredibleSet cs(m, j);
        double worst_res = 0.0, worst_z = 0.0, worst_bz = 0.0;
        int miss = 0;
        for (int q = 0; q < 20; ++q) {
            const double u = cs.c1() + (cs.C() - cs.c1()) * (q + 0.5) / 20.0;
            const DualSolution d = solve_nu(m, j, u);
            worst_res = std::max(worst_res, d.residual);
            const CutoffContract k(m, j, d.cutoffs);
            const InvestorEstimate e = estimate_investor_value(m, k, Bank::bad, kPaths, 300 + 20 * j + q);
            const double zi = z(e.investor, d.primal_value), zb = z(e.bank, u);
            worst_z = std::max(worst_z, std::abs(zi));
            worst_bz = std::max(worst_bz, std::abs(zb));
            if (std::abs(zi) > 3.0) {
                ++miss;
                o.note(fmt("j=%d u=%.6f V^L %.6f MC %.6f se %.1e z %.1f", j, u, d.primal_value, e.investor.mean,
                           e.investor.se, zi));
            }
        }
        o.note(fmt("j=%d: max |g'(nu)| %.2e, worst investor |z| %.2f, worst bank |z| %.2f, misses %d/20", j,
                   worst_res, worst_z, worst_bz, miss));
        o.fail_if(!(worst_res < 1e-10), fmt("j=%d dual residual", j));
        o.fail_if(miss > 0, fmt("j=%d primal MC within 3 SE", j));
        o.fail_if(worst_bz > 3.0, fmt("j=%d bank value u within 3 SE", j));
    }
}

void c4_upper(Outcome& o)
{
    const Model m(fixture::pool2());
    const auto pmh = solve_pmh_all(m);
    for (int j : {1, 2}) {
        const CredibleSet cs(m, j);
        const double us[] = {0.5 * (cs.c1() + cs.x_star()), 0.5 * (cs.x_star() + cs.b_hat()),
                             0.5 * (cs.b_hat() + pmh[j - 1].gamma) + 0.02};
        const char* branch[] = {"[c1,x*)", "[x*,b_hat)", "[b_hat,inf)"};
        for (int q = 0; q < 3; ++q) {
            const double u = us[q];
            const UpperContract k(m, pmh, j, u);
            const McEstimate b = estimate_bank_value(m, k, Bank::bad, Strategy::recommended, kPaths, 400 + 10 * j + q);
            const McEstimate g = estimate_bank_value(m, k, Bank::good, Strategy::recommended, kPaths, 450 + 10 * j + q);
            const double U = cs.upper(u);
            o.note(fmt("j=%d %-11s u_b %.5f: bad %.5f (z %.2f), good %.5f vs U %.5f (z %.2f)", j, branch[q], u,
                       b.mean, z(b, u), g.mean, U, z(g, U)));
            o.fail_if(std::abs(z(b, u)) > 3.0, fmt("j=%d %s bad bank", j, branch[q]));
            o.fail_if(std::abs(z(g, U)) > 3.0, fmt("j=%d %s good bank", j, branch[q]));
        }
    }
}

void c5_lower(Outcome& o)
{
    const Model m(fixture::pool3());
    auto check = [&](int j, double u, std::uint64_t seed) {
        const CredibleSet cs(m, j);
        const LowerContract k(m, j, u);
        const McEstimate b = estimate_bank_value(m, k, Bank::bad, Strategy::recommended, kPaths, seed);
        const McEstimate g = estimate_bank_value(m, k, Bank::good, Strategy::recommended, kPaths, seed + 1);
        const InvestorEstimate inv = estimate_investor_value(m, k, Bank::bad, kPaths, seed + 2);
        const double L = cs.lower(u), V = value_lower(m, j, u);
        o.note(fmt("j=%d u_b %.5f: bad z %.2f, good %.5f vs L %.5f (z %.2f), investor %.5f vs %.5f (z %.2f)", j, u,
                   z(b, u), g.mean, L, z(g, L), inv.investor.mean, V, z(inv.investor, V)));
        o.fail_if(std::abs(z(b, u)) > 3.0, fmt("j=%d u=%.5f bad bank", j, u));
        o.fail_if(std::abs(z(g, L)) > 3.0, fmt("j=%d u=%.5f good bank", j, u));
        o.fail_if(std::abs(z(inv.investor, V)) > 3.0, fmt("j=%d u=%.5f investor", j, u));
    };
    std::uint64_t seed = 500;
    for (int j = 1; j <= 3; ++j) {
        const CredibleSet cs(m, j);
        check(j, cs.C(), seed += 10);
        check(j, cs.C() + 0.05, seed += 10);
    }
    // Below the junction only one cutoff is needed with two loans.
    const CredibleSet cs2(m, 2);
    for (double t : {0.25, 0.5, 0.75}) check(2, cs2.c1() + t * (cs2.C() - cs2.c1()), seed += 10);
}

void c6_lemma(Outcome& o)
{
    const Model m(fixture::pool2());
    const LemmaReport rep = lemma_inequality_scan(m, 2, 200, 10000, 600);
    double worst1 = 0.0, worst2 = 0.0;
    for (const auto& r : rep.records) {
        worst1 = std::min(worst1, r.gap1 / r.se1);
        worst2 = std::min(worst2, r.gap2 / r.se2);
    }
    o.note(fmt("%zu contracts, violations %d, most negative gap/se: %.2f and %.2f", rep.records.size(),
               rep.violations, worst1, worst2));
    o.fail_if(rep.records.size() != 200, "200 contracts");
    o.fail_if(rep.violations > 0, "no violation beyond 3 SE");
}

void c7_hjb(Outcome& o)
{
    const Model m(fixture::pool3());
    const auto pmh = solve_pmh_all(m);
    std::vector<std::vector<GridValueFunction>> sols[2];
    for (int res : {64, 128}) {
        HjbOptions opt;
        opt.nx = opt.ny = res;
        for (Bank b : {Bank::good, Bank::bad}) {
            auto lv = solve_hjb_levels(m, 3, b, pmh, opt);
            for (const auto& g : lv) {
                o.note(fmt("res %d %s j=%d: residual/scale %.2e, min slack/scale %.2e, iterations %d, row gap %.4e",
                           res, bank_name(b), g.j, g.residual / g.scale, g.min_gradient_slack / g.scale,
                           g.iterations, boundary_row_gap(g)));
                o.fail_if(!(g.residual < 1e-6 * g.scale), fmt("res %d %s j=%d residual", res, bank_name(b), g.j));
            }
            sols[b == Bank::good ? 0 : 1].push_back(std::move(lv));
        }
    }
    for (int bi = 0; bi < 2; ++bi)
        for (int j = 1; j <= 3; ++j) {
            const double e64 = boundary_row_gap(sols[bi][0][j - 1]), e128 = boundary_row_gap(sols[bi][1][j - 1]);
            const double ratio = e64 / e128;
            o.note(fmt("%s j=%d boundary row gap ratio 64->128: %.3f", bi == 0 ? "good" : "bad", j, ratio));
            o.fail_if(!(ratio >= 1.5 && ratio <= 2.5), fmt("%s j=%d first-order ratio", bi == 0 ? "good" : "bad", j));
        }
    // Extracted policy at 10 interior points of the single-loan grids.
    for (int bi = 0; bi < 2; ++bi) {
        const GridValueFunction& g = sols[bi][1][0];
        const Bank bank = bi == 0 ? Bank::good : Bank::bad;
        int miss = 0;
        for (int q = 0; q < 10; ++q) {
            const double x = g.x0 + (g.x1 - g.x0) * (q + 0.5) / 10.0;
            const double eta = 0.2 + 0.7 * ((q * 7) % 10) / 9.0;
            const double lo = g.geometry->lower(x), hi = g.geometry->upper(x), y = lo + eta * (hi - lo);
            const GridPolicyContract k(m, g, x, y);
            const auto paths = simulate_many(m, k, bank, Strategy::recommended, kPaths, 700 + 10 * bi + q);
            std::vector<double> iv(paths.size());
            for (std::size_t i = 0; i < paths.size(); ++i) iv[i] = paths[i].investor_value;
            const McEstimate e = summarize(iv, 700 + 10 * bi + q);
            const double v = g.value(x, y), zz = z(e, v);
            if (std::abs(zz) > 3.0) ++miss;
            o.note(fmt("%s (%.4f, %.4f) eta %.2f: grid %.5f MC %.5f se %.1e z %.2f", bank_name(bank), x, y, eta, v,
                       e.mean, e.se, zz));
        }
        o.fail_if(miss > 0, fmt("%s grid policy MC within 3 SE (%d misses)", bank_name(bank), miss));
    }
}

void c8_pmh(Outcome& o)
{
    const Model m(fixture::pool2());
    const auto sols = solve_pmh_all(m);
    for (int j : {1, 2}) {
        const PmhSolution& s = sols[j - 1];
        const oracle::PmhOracleResult orc = oracle::pmh_oracle(m, j, 2000);
        const double rg = rel(s.gamma, orc.gamma), rv = rel(s.value_at_bhat(), orc.v_bhat);
        o.note(fmt("j=%d gamma %.8f oracle %.8f rel %.1e; v(b_hat) %.8f oracle %.8f rel %.1e", j, s.gamma, orc.gamma,
                   rg, s.value_at_bhat(), orc.v_bhat, rv));
        o.fail_if(rg > 1e-4, fmt("j=%d gamma", j));
        o.fail_if(rv > 1e-4, fmt("j=%d value", j));
        const double rb = m.params().rho_b;
        for (double d : {0.0, 0.1, 1.0, 10.0}) {
            const double sl = s.slope(s.gamma + d);
            o.fail_if(sl != -1.0 / rb, fmt("j=%d tail slope at gamma+%g is %.17g", j, d, sl));
        }
        const double secant = (s.value(s.gamma + 2.0) - s.value(s.gamma + 1.0));
        o.fail_if(std::abs(secant + 1.0 / rb) > 1e-14, fmt("j=%d tail secant", j));
    }
}

void c9_reservation(Outcome& o)
{
    ModelParams p;
    p.I = 10;
    p.alpha.clear();
    for (int j = 1; j <= 10; ++j) p.alpha.push_back(0.06 - 0.001 * j);
    int cases = 0, branch_miss = 0;
    double worst = 0.0;
    for (double mu : {0.1, 0.01, 0.002, 0.0}) {
        p.mu = mu;
        const Model m(p);
        for (Bank b : {Bank::good, Bank::bad}) {
            const ReservationUtility res = reservation_utility(m, b);
            for (int j = 1; j <= 10; ++j) {
                const oracle::ReservationBrute br = oracle::reservation_brute(m, b, j);
                ++cases;
                worst = std::max(worst, rel(res.R[j], br.value));
                for (int k = 1; k <= j; ++k)
                    if (res.work[k] != br.work[k]) ++branch_miss;
            }
        }
    }
    o.note(fmt("%d (mu, type, j) cases, worst relative value gap %.1e, branch mismatches %d", cases, worst, branch_miss));
    o.fail_if(worst > 1e-13, "values equal to rounding");
    o.fail_if(branch_miss > 0, "same branch choices");
}

void c10_simulator(Outcome& o)
{
    const Model m1(fixture::fig1());
    const ShortTermContract zero(m1, 1, 0.0, 0.0, 0.0, 0.0);
    {
        const auto paths = simulate_many(m1, zero, Bank::bad, Strategy::always_shirk, kPaths, 1001);
        std::vector<double> tau;
        for (const auto& p : paths) tau.push_back(p.tau);
        const double lam = m1.lambda_sh(1);
        const double D = ks_statistic(tau, [&](double x) { return 1.0 - std::exp(-lam * x); });
        const double pv = ks_pvalue(D, tau.size());
        o.note(fmt("exponential first default: D %.2e p %.3f", D, pv));
        o.fail_if(pv < 0.01, "KS exponential");
    }
    {
        const Model m(fixture::pool3());
        const ShortTermContract keep(m, 3, 0.0, 0.0, 0.0, 1.0);
        const auto paths = simulate_many(m, keep, Bank::bad, Strategy::recommended, kPaths, 1002);
        std::vector<double> t1, t2, t3;
        for (const auto& p : paths) {
            t1.push_back(p.default_times.at(0));
            t2.push_back(p.default_times.at(1));
            t3.push_back(p.default_times.at(2));
        }
        const double r3 = m.lambda_sh(3), r2 = m.lambda_sh(2), r1 = m.lambda_sh(1);
        const std::vector<std::pair<std::vector<double>*, Hypoexp>> laws{
            {&t1, Hypoexp({r3})}, {&t2, Hypoexp({r3, r2})}, {&t3, Hypoexp({r3, r2, r1})}};
        int i = 1;
        for (const auto& [xs, law] : laws) {
            const double D = ks_statistic(*xs, [&](double x) { return law.cdf(x); });
            const double pv = ks_pvalue(D, xs->size());
            o.note(fmt("default %d of 3: D %.2e p %.3f", i, D, pv));
            o.fail_if(pv < 0.01, fmt("KS hypoexponential default %d", i));
            ++i;
        }
    }
    // Same seed: identical bytes, in memory and through the command line.
    const Model m(fixture::pool2());
    const auto pmh = solve_pmh_all(m);
    const UpperContract k(m, pmh, 2, 0.1);
    SimOptions opt;
    opt.log_events = true;
    const auto a = simulate_many(m, k, Bank::good, Strategy::recommended, 2000, 1003, opt);
    const auto b = simulate_many(m, k, Bank::good, Strategy::recommended, 2000, 1003, opt);
    bool same = true;
    for (std::size_t i = 0; i < a.size(); ++i) {
        same &= a[i].events.size() == b[i].events.size();
        same &= std::memcmp(&a[i].bank_value, &b[i].bank_value, sizeof(double)) == 0;
        same &= std::memcmp(&a[i].investor_value, &b[i].investor_value, sizeof(double)) == 0;
        for (std::size_t e = 0; same && e < a[i].events.size(); ++e)
            same &= std::memcmp(&a[i].events[e].time, &b[i].events[e].time, sizeof(double)) == 0;
    }
    o.fail_if(!same, "in-memory determinism");
    const fs::path dir = fs::temp_directory_path() / "contractlab_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "p.json") << R"({"kind": "upper", "u": 0.1, "j": 1})";
    std::string first[2];
    bool cli_same = true;
    for (int rep = 0; rep < 2; ++rep) {
        const std::string prefix = (dir / "out").string();
        run_json({"simulate", "--policy", (dir / "p.json").string(), "--paths", "2000", "--seed", "5", "--out", prefix,
                  "--events", (dir / "ev.csv").string()});
        const std::string js = slurp(prefix + ".json"), ev = slurp(dir / "ev.csv");
        if (rep == 0) {
            first[0] = js;
            first[1] = ev;
        } else {
            cli_same = js == first[0] && ev == first[1];
        }
    }
    fs::remove_all(dir);
    o.fail_if(!cli_same, "command-line outputs byte-identical");
    o.note(fmt("determinism: in memory %s, command line %s", same ? "identical" : "differs",
               cli_same ? "identical" : "differs"));
}

} // namespace

int main()
{
    criterion(1, "single-loan credible set figure", 1.0, c1_figure);
    criterion(2, "upper-boundary ODE against the closed form", 10.0, c2_ode);
    criterion(3, "lower-boundary duality", 120.0, c3_duality);
    criterion(4, "upper-boundary Monte Carlo round trips", 120.0, c4_upper);
    criterion(5, "lower-boundary Monte Carlo", 0.0, c5_lower);
    criterion(6, "lemma inequalities on random contracts", 0.0, c6_lemma);
    criterion(7, "interior HJB solver", 600.0, c7_hjb);
    criterion(8, "pure moral hazard free boundary", 0.0, c8_pmh);
    criterion(9, "reservation utilities against brute force", 0.0, c9_reservation);
    criterion(10, "simulator exactness and determinism", 0.0, c10_simulator);
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
