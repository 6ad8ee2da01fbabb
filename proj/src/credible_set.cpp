#include "contractlab/credible_set.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace contractlab {

namespace {

// c(jj, m) for all jj <= j, m <= jj, by the forward recursion on the pool size.
std::vector<std::vector<double>> shirk_triangle(const Model& m, int j)
{
    std::vector<std::vector<double>> c(j + 1);
    for (int jj = 1; jj <= j; ++jj) {
        const double lsh = m.lambda_sh(jj);
        const double head = m.B() * jj / (m.r() + lsh);
        const double w = lsh / (m.r() + lsh);
        c[jj].resize(jj);
        for (int mm = 1; mm <= jj; ++mm)
            c[jj][mm - 1] = head + (mm > 1 ? w * c[jj - 1][mm - 2] : 0.0);
    }
    return c;
}

} // namespace

CredibleSet::CredibleSet(const Model& m, int j) : m_(&m), j_(j)
{
    if (j < 1 || j > m.I()) throw DomainError("loans-remaining j outside [1, I]");
    c_ = shirk_triangle(m, j)[j];
    bhat_ = m.b_hat(j);
    rho_ = m.rho_ratio();
    p_ = (m.r() + m.lambda_sh(j)) / (m.r() + m.lambda_0(j));
    xstar_ = std::pow(rho_, -p_) * bhat_ / p_ + c1();
}

double CredibleSet::shirk_utility(int mm) const
{
    if (mm < 1 || mm > j_) throw DomainError("defaults-before-liquidation m outside [1, j]");
    return c_[mm - 1];
}

void CredibleSet::check(double ub) const
{
    // Tolerate rounding at the left endpoint.
    if (ub < c1() - 1e-14 * std::max(1.0, std::abs(c1())))
        throw DomainError("u_b below c(j,1): outside the feasible set");
}

double CredibleSet::lower(double ub) const
{
    check(ub);
    if (ub <= C()) return ub;
    return rho_ * ub - (rho_ - 1.0) * C();
}

double CredibleSet::upper(double ub) const
{
    check(ub);
    const double z = std::max(ub - c1(), 0.0);
    const double zb = bhat_ / p_;
    if (ub < xstar_) return std::pow(rho_, p_) * z + c1();
    if (ub < bhat_) return rho_ * bhat_ * std::pow(z / zb, 1.0 / p_);
    return rho_ * ub;
}

double CredibleSet::upper_slope(double ub) const
{
    check(ub);
    const double z = std::max(ub - c1(), 0.0);
    const double zb = bhat_ / p_;
    if (ub < xstar_) return std::pow(rho_, p_);
    if (ub < bhat_) return rho_ * std::pow(z / zb, 1.0 / p_ - 1.0);
    return rho_;
}

bool CredibleSet::contains(double ub, double ug) const
{
    if (ub < c1()) return false;
    return lower(ub) <= ug && ug <= upper(ub);
}

std::vector<double> C_table(const Model& m)
{
    auto tri = shirk_triangle(m, m.I());
    std::vector<double> out(m.I() + 1, 0.0);
    for (int j = 1; j <= m.I(); ++j) out[j] = tri[j].back();
    return out;
}

double shirk_utility_product(const Model& m, int j, int mm)
{
    if (mm < 1 || mm > j) throw DomainError("defaults-before-liquidation m outside [1, j]");
    auto term = [&](int i) { return m.B() * i / (m.r() + m.lambda_sh(i)); };
    double v = term(j);
    for (int i = j - mm + 1; i <= j - 1; ++i) {
        double prod = 1.0;
        for (int l = i + 1; l <= j; ++l) prod *= m.lambda_sh(l) / (m.r() + m.lambda_sh(l));
        v += term(i) * prod;
    }
    return v;
}

OdeCheck verify_upper_boundary_ode(const Model& m, double h)
{
    const CredibleSet cs(m, 1);
    const double s = cs.c1(), bh = cs.b_hat(), rho = m.rho_ratio();
    const double r = m.r(), B = m.B();
    const double l0 = m.lambda_0(1), lsh = m.lambda_sh(1);
    if (!(h > 0.0) || h > (3.0 * bh - s) / 10.0)
        throw DomainError("ODE step must lie in (0, (3 b_hat - c(1,1)) / 10]");

    // U' from the diffusion equation with the two indicator regimes.
    auto rhs = [&](double u, double U) {
        const int kb = u < bh ? 1 : 0;
        const int kg = U < bh ? 1 : 0;
        const double lb = kb ? lsh : l0, lg = kg ? lsh : l0;
        const double den = (r + lb) * u - B * kb;
        const double num = (r + lg) * U - B * kg;
        if (std::abs(den) < 1e-300) return std::pow(rho, cs.p());
        return num / den;
    };
    // Regime signature; switches are located by bisection on the step length.
    auto regime = [&](double u, double U) { return (u < bh ? 1 : 0) + 2 * (U < bh ? 1 : 0); };
    auto rk4 = [&](double u, double U, double dh) {
        const double k1 = rhs(u, U);
        const double k2 = rhs(u + dh / 2, U + dh / 2 * k1);
        const double k3 = rhs(u + dh / 2, U + dh / 2 * k2);
        const double k4 = rhs(u + dh, U + dh * k3);
        return U + dh / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    };

    OdeCheck out;
    // Third region is an exact plug-in identity.
    for (int i = 0; i <= 200; ++i) {
        const double u = bh + 2.0 * bh * i / 200.0;
        const double U = rho * u;
        const double res = r * U - (U / u) * (r * u + u * l0) + U * l0;
        out.third_region_residual = std::max(out.third_region_residual, std::abs(res));
    }

    // Forward from b_hat on the saturated ray, backward from b_hat through the kinks.
    auto sweep = [&](double u0, double U0, double u_end) {
        double u = u0, U = U0;
        const double dir = u_end > u0 ? 1.0 : -1.0;
        while (dir * (u_end - u) > 1e-15) {
            double dh = dir * std::min(h, dir * (u_end - u));
            const int reg = regime(u + dir * 1e-15, U);
            double Un = rk4(u, U, dh);
            if (regime(u + dh, Un) != reg && dir * dh > 1e-12) {
                double lo = 0.0, hi = dir * dh;
                while (hi - lo > 1e-12) {
                    const double mid = 0.5 * (lo + hi);
                    if (regime(u + dir * mid, rk4(u, U, dir * mid)) == reg) lo = mid; else hi = mid;
                }
                dh = dir * hi;
                Un = rk4(u, U, dir * lo);
                Un = Un + (hi - lo) * dir * rhs(u + dir * lo, Un);
            }
            u += dh;
            U = Un;
            ++out.steps;
            out.max_residual = std::max(out.max_residual, std::abs(U - cs.upper(std::max(u, s))));
        }
    };
    sweep(bh, rho * bh, 3.0 * bh);
    sweep(bh, rho * bh, s);

    // Third-order one-sided differences on the closed form.
    auto jump = [&](double x) {
        const double d = 1e-5;
        const std::function<double(double)> f = [&](double u) { return cs.upper(u); };
        const double left = (11.0 / 6 * f(x) - 3 * f(x - d) + 1.5 * f(x - 2 * d) - f(x - 3 * d) / 3) / d;
        const double right = (-11.0 / 6 * f(x) + 3 * f(x + d) - 1.5 * f(x + 2 * d) + f(x + 3 * d) / 3) / d;
        return std::abs(right - left) / std::abs(cs.upper_slope(x));
    };
    out.kink_jump_xstar = jump(cs.x_star());
    out.kink_jump_bhat = jump(bh);
    return out;
}

} // namespace contractlab
