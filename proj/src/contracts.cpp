#include "contractlab/contracts.hpp"

#include <cmath>
#include <limits>

namespace contractlab {

PolicyPoint upper_boundary_policy(const Model& m, int j, const PmhSolution& pmh, double u)
{
    const CredibleSet cs(m, j);
    if (pmh.j != j) throw DomainError("policy needs the level-j pure moral hazard solution");
    if (u < cs.c1() - 1e-14 * std::max(1.0, cs.c1())) throw DomainError("u_b below c(j,1)");
    const double bh = cs.b_hat(), bp = m.b_hat(j - 1), g = pmh.gamma, rb = m.params().rho_b;
    PolicyPoint p;
    if (u < bh) {
        p.theta = 0.0;
        p.h1 = u;
        p.h2 = 0.0;
        p.kb = j;
        p.kg = cs.upper(u) < bh ? j : 0;
        return p;
    }
    if (u > g) {
        p.lump = (u - g) / rb;
        u = g;
    }
    if (u < bh + bp && u < g) {
        p.theta = (u - bh) / bp;
        p.h1 = u - bp;
        p.h2 = bp;
    } else {
        p.theta = 1.0;
        p.h1 = bh;
        p.h2 = u - bh;
    }
    if (u >= g) p.delta = (m.lambda_0(j) * bh + m.r() * g) / rb;
    p.kb = 0;
    p.kg = 0;
    return p;
}

PolicyPoint lower_boundary_policy(const Model& m, int j, double u)
{
    const CredibleSet cs(m, j);
    if (u < cs.c1() - 1e-14 * std::max(1.0, cs.c1())) throw DomainError("u_b below c(j,1)");
    const double C = cs.C();
    const double Cp = j > 1 ? CredibleSet(m, j - 1).C() : 0.0;
    PolicyPoint p;
    if (u >= C) {
        p.lump = (u - C) / m.params().rho_b;
        p.theta = 1.0;
        p.h1 = C - Cp;
        p.h2 = Cp;
    } else {
        p.theta = 0.0;
        p.h1 = u;
        p.h2 = 0.0;
    }
    // Exposure h1 + (1 - theta) h2 never reaches b_hat_j, so both types shirk.
    const double exposure = p.h1 + (1.0 - p.theta) * p.h2;
    p.kb = exposure < cs.b_hat() ? j : 0;
    p.kg = p.kb;
    return p;
}

double upper_drift(const Model& m, int j, double u)
{
    const double bh = m.b_hat(j);
    if (u < bh) return (m.r() + m.lambda_sh(j)) * u - m.B() * j;
    return m.r() * u + m.lambda_0(j) * bh;
}

double ShirkPath::at(const Model& m, int j, double s) const
{
    const double a = m.r() + m.lambda_sh(j), c1 = m.B() * j / a;
    if (s >= t_star) return m.b_hat(j);
    return std::exp(a * s) * (u0 - c1) + c1;
}

ShirkPath state_step_deterministic(const Model& m, int j, double u)
{
    const CredibleSet cs(m, j);
    if (u < cs.c1() - 1e-14 * std::max(1.0, cs.c1())) throw DomainError("u_b below c(j,1)");
    ShirkPath p;
    p.u0 = u;
    p.t_star = u >= cs.b_hat() ? 0.0 : shirk_hitting_time(m, j, u, cs.b_hat());
    return p;
}

double shirk_hitting_time(const Model& m, int j, double u, double target)
{
    const double a = m.r() + m.lambda_sh(j), c1 = m.B() * j / a;
    if (u >= target) return 0.0;
    if (u <= c1) return std::numeric_limits<double>::infinity();
    return std::log((target - c1) / (u - c1)) / a;
}

const char* regime_name(Regime r)
{
    switch (r) {
    case Regime::shirk: return "shirk";
    case Regime::work: return "work";
    default: return "mixed";
    }
}

double short_term_cbar(const Model& m, int j, Bank b)
{
    return m.b_hat(j) * (m.r() + m.lambda_0(j)) / m.rho(b);
}

double short_term_lead(const Model& m, int j, double c, Bank b)
{
    const double a0 = m.r() + m.lambda_0(j);
    return std::log(m.rho(b) * c / (m.b_hat(j) * a0)) / a0;
}

ShortTermValue short_term_values(const Model& m, int j, double c, double t_star, Bank b)
{
    if (c < 0.0 || t_star < 0.0) throw DomainError("short-term contract needs c >= 0 and t* >= 0");
    const double rho = m.rho(b), bh = m.b_hat(j);
    const double ash = m.r() + m.lambda_sh(j), a0 = m.r() + m.lambda_0(j);
    const double s1 = m.B() * j / ash;
    ShortTermValue out;
    if (c <= short_term_cbar(m, j, b)) {
        out.regime = Regime::shirk;
        out.value = std::exp(-ash * t_star) * rho * c / ash + s1;
        out.switch_time = std::numeric_limits<double>::infinity();
        return out;
    }
    const double D = short_term_lead(m, j, c, b);
    if (t_star <= D) {
        out.regime = Regime::work;
        out.value = std::exp(-a0 * t_star) * rho * c / a0;
        out.switch_time = 0.0;
        return out;
    }
    // Shirk until the working continuation value reaches b_hat, then monitor.
    const double T = t_star - D;
    out.regime = Regime::mixed;
    out.switch_time = T;
    out.value = s1 * (1.0 - std::exp(-ash * T)) + std::exp(-ash * T) * bh;
    return out;
}

DelayedContract reach_upper(const Model& m, int j, double u)
{
    const CredibleSet cs(m, j);
    if (u < cs.x_star() || u >= cs.b_hat()) throw DomainError("u_b outside [x*, b_hat)");
    DelayedContract d;
    d.c = short_term_cbar(m, j, Bank::bad);
    d.t_star = shirk_hitting_time(m, j, u, cs.b_hat());
    return d;
}

ReservationUtility reservation_utility(const Model& m, Bank b)
{
    ReservationUtility out;
    out.R.assign(m.I() + 1, 0.0);
    out.work.assign(m.I() + 1, false);
    const double rho = m.rho(b), mu = m.mu(), r = m.r(), B = m.B();
    for (int j = 1; j <= m.I(); ++j) {
        const double l0 = m.lambda_0(j), lsh = m.lambda_sh(j);
        const double work = (rho * mu * j + l0 * out.R[j - 1]) / (r + l0);
        const double shirk = (rho * mu * j + j * B + lsh * out.R[j - 1]) / (r + lsh);
        out.work[j] = work >= shirk;
        out.R[j] = out.work[j] ? work : shirk;
    }
    return out;
}

} // namespace contractlab
