#include "contractlab/boundary_values.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace contractlab {

Hypoexp default_time_law(const Model& m, int j, int i)
{
    if (i < 1 || i > j) throw DomainError("default index i outside [1, j]");
    std::vector<double> rates;
    for (int k = 0; k < i; ++k) rates.push_back(m.lambda_sh(j - k));
    return Hypoexp(rates);
}

double cutoff_threshold(const Model& m, int j, int i)
{
    if (i < 1 || i >= j) throw DomainError("default index i outside [1, j-1]");
    const double l = m.lambda_sh(j - i);
    if (m.B() <= 0.0) return std::numeric_limits<double>::infinity();
    return m.mu() * (m.r() + l) / (m.B() * l);
}

double cutoff_s(const Model& m, int j, int i, double nu)
{
    if (nu < 0.0) throw DomainError("multiplier nu must be >= 0");
    const double th = cutoff_threshold(m, j, i);
    if (nu <= th) return 0.0;
    if (m.r() <= 0.0) throw DomainError("cutoff time undefined for r = 0 above the threshold");
    return std::log(nu / th) / m.r();
}

LowerDual::LowerDual(const Model& m, int j) : m_(&m), j_(j)
{
    const CredibleSet cs(m, j);
    c1_ = cs.c1();
    C_ = cs.C();
    double thmax = 1.0;
    for (int i = 1; i < j; ++i) {
        const int mm = j - i;
        laws_.push_back(default_time_law(m, j, i));
        bterm_.push_back(m.B() * mm / (m.r() + m.lambda_sh(mm)));
        vterm_.push_back(m.mu() * mm / m.lambda_sh(mm));
        thresh_.push_back(cutoff_threshold(m, j, i));
        if (std::isfinite(thresh_.back())) thmax = std::max(thmax, thresh_.back());
    }
    nu_cap_ = 1e12 * thmax;
}

double LowerDual::g_prime(double nu, double u) const
{
    double g = c1_ - u;
    for (int i = 1; i < j_; ++i)
        g += bterm_[i - 1] * laws_[i - 1].discounted_tail(cutoff_s(*m_, j_, i, nu), m_->r());
    return g;
}

double LowerDual::primal(double nu) const
{
    double v = m_->mu() * j_ / m_->lambda_sh(j_);
    for (int i = 1; i < j_; ++i) v += vterm_[i - 1] * laws_[i - 1].survival(cutoff_s(*m_, j_, i, nu));
    return v;
}

DualSolution LowerDual::solve(double u) const
{
    const double tol = 1e-14 * std::max(1.0, C_);
    if (u < c1_ - tol || u >= C_) throw DomainError("u_bc outside [c(j,1), C(j)) for the dual problem");
    DualSolution out;
    auto fill = [&](double nu) {
        out.nu = nu;
        out.cutoffs.clear();
        for (int i = 1; i < j_; ++i) out.cutoffs.push_back(cutoff_s(*m_, j_, i, nu));
        out.primal_value = primal(nu);
        out.residual = std::abs(g_prime(nu, u));
    };
    if (u <= c1_ + tol) {
        // All tail integrals must vanish: nu at the cap, investor keeps only the first interval.
        out.capped = true;
        fill(nu_cap_);
        out.primal_value = m_->mu() * j_ / m_->lambda_sh(j_);
        out.residual = 0.0;
        return out;
    }
    double lo = 0.0, hi = 1.0;
    for (int i = 1; i < j_; ++i)
        if (std::isfinite(thresh_[i - 1])) hi = std::max(hi, thresh_[i - 1]);
    while (g_prime(hi, u) > 0.0) {
        lo = hi;
        hi *= 4.0;
        if (hi > nu_cap_) throw SolverError("dual bracket not found below the multiplier cap");
    }
    // Bisection in log space once the bracket is positive.
    for (int it = 0; it < 400; ++it) {
        const double mid = lo > 0.0 ? std::sqrt(lo * hi) : 0.5 * hi;
        if (mid <= lo || mid >= hi) break;
        (g_prime(mid, u) > 0.0 ? lo : hi) = mid;
        if (hi - lo <= 1e-16 * hi) break;
    }
    // Pick the endpoint with the smaller residual; g' is continuous so both are close.
    const double glo = std::abs(g_prime(lo, u)), ghi = std::abs(g_prime(hi, u));
    fill(glo < ghi ? lo : hi);
    return out;
}

DualSolution solve_nu(const Model& m, int j, double u_bc)
{
    return LowerDual(m, j).solve(u_bc);
}

double lower_junction_value(const Model& m, int j)
{
    double v = 0.0;
    for (int i = 1; i <= j; ++i) v += m.mu() * i / m.lambda_sh(i);
    return v;
}

double value_lower(const Model& m, int j, double u_bc)
{
    const CredibleSet cs(m, j);
    if (u_bc < cs.c1() - 1e-14 * std::max(1.0, cs.c1()))
        throw DomainError("u_bc below c(j,1): outside the feasible set");
    if (u_bc >= cs.C()) return lower_junction_value(m, j) - (u_bc - cs.C()) / m.params().rho_b;
    return solve_nu(m, j, u_bc).primal_value;
}

UpperConstants upper_constants(const Model& m, int j, const PmhSolution& pmh)
{
    const CredibleSet cs(m, j);
    const double r = m.r(), lsh = m.lambda_sh(j), l0 = m.lambda_0(j), mu = m.mu();
    const double zb = cs.b_hat() / cs.p();
    const double zs = cs.x_star() - cs.c1();
    const double vb = pmh.value_at_bhat();
    UpperConstants k;
    k.C_tilde = (vb - mu * j / lsh) * std::pow(zb, -lsh / (r + lsh));
    k.C_mid = vb - mu * j / l0;  // multiplies (z / zb)^{l0 / (r + lsh)}
    const double v_xs = mu * j / l0 + k.C_mid * std::pow(zs / zb, l0 / (r + lsh));
    k.C_hat = (v_xs - mu * j / lsh) * std::pow(zs, -lsh / (r + lsh));
    return k;
}

namespace {

void check_upper(const Model& m, int j, const PmhSolution* pmh, double u, const CredibleSet& cs)
{
    if (pmh == nullptr || pmh->j != j)
        throw DomainError("upper-boundary value needs the level-j pure moral hazard solution");
    if (u < cs.c1() - 1e-14 * std::max(1.0, cs.c1()))
        throw DomainError("u below c(j,1): outside the feasible set");
    (void)m;
}

} // namespace

double value_upper_good(const Model& m, int j, const PmhSolution* pmh, double u)
{
    const CredibleSet cs(m, j);
    check_upper(m, j, pmh, u, cs);
    if (u >= cs.b_hat()) return pmh->value(u);
    const UpperConstants k = upper_constants(m, j, *pmh);
    const double r = m.r(), lsh = m.lambda_sh(j), l0 = m.lambda_0(j), mu = m.mu();
    const double z = std::max(u - cs.c1(), 0.0);
    if (u < cs.x_star()) return mu * j / lsh + k.C_hat * std::pow(z, lsh / (r + lsh));
    const double zb = cs.b_hat() / cs.p();
    return mu * j / l0 + k.C_mid * std::pow(z / zb, l0 / (r + lsh));
}

double value_upper_bad(const Model& m, int j, const PmhSolution* pmh, double u)
{
    const CredibleSet cs(m, j);
    check_upper(m, j, pmh, u, cs);
    if (u >= cs.b_hat()) return pmh->value(u);
    const UpperConstants k = upper_constants(m, j, *pmh);
    const double r = m.r(), lsh = m.lambda_sh(j), mu = m.mu();
    const double z = std::max(u - cs.c1(), 0.0);
    return mu * j / lsh + k.C_tilde * std::pow(z, lsh / (r + lsh));
}

} // namespace contractlab
