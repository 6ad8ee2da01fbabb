#include "contractlab/pmh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace contractlab {

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x)
{
    if (xs.size() == 1 || x <= xs.front()) return ys.front();
    if (x >= xs.back()) return ys.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + t * (ys[i + 1] - ys[i]);
}

// Continuation probability and post-default promise on [b_hat_j, gamma).
void controls(const Model& m, int j, double u, double& theta, double& post)
{
    const double bh = m.b_hat(j), bp = m.b_hat(j - 1);
    if (j == 1 || u >= bh + bp) {
        theta = 1.0;
        post = u - bh;
    } else {
        theta = (u - bh) / bp;
        post = bp;
    }
}

} // namespace

double PmhSolution::value(double x) const
{
    if (x < b_hat - 1e-14 * std::max(1.0, b_hat))
        throw DomainError("pure moral hazard value queried below b_hat_j");
    if (x >= gamma) return v.back() - (x - gamma) / rho_b;
    return interp(u, v, x);
}

double PmhSolution::slope(double x) const
{
    if (x < b_hat - 1e-14 * std::max(1.0, b_hat))
        throw DomainError("pure moral hazard slope queried below b_hat_j");
    if (x >= gamma) return -1.0 / rho_b;
    return interp(u, dv, x);
}

double pmh_rhs(const Model& m, int j, const PmhSolution* prev, double u, double W)
{
    const double lam = m.lambda_0(j), bh = m.b_hat(j);
    double theta, post;
    controls(m, j, u, theta, post);
    const double cont = (j > 1 && theta > 0.0) ? theta * prev->value(post) : 0.0;
    return (lam * W - m.mu() * j - lam * cont) / (m.r() * u + lam * bh);
}

PmhSolution solve_pmh(const Model& m, int j, const PmhSolution* prev, const PmhOptions& opt)
{
    if (j < 1 || j > m.I()) throw DomainError("loans-remaining j outside [1, I]");
    if (j > 1 && (prev == nullptr || prev->j != j - 1))
        throw DomainError("pure moral hazard level j needs the level j-1 solution");
    if (opt.nodes < 2 || opt.substeps < 1) throw DomainError("invalid tabulation options");

    const double rho = m.params().rho_b, r = m.r(), lam = m.lambda_0(j), mu = m.mu();
    const double bh = m.b_hat(j), bp = m.b_hat(j - 1);

    PmhSolution s;
    s.j = j;
    s.b_hat = bh;
    s.rho_b = rho;

    // Second-order contact: the derivative of the ODE at slope -1/rho_b vanishes where
    // phi(u) = (lam - r)/rho + lam * d/du[theta W_{j-1}(post)] changes sign.
    double gamma = bh;
    if (j > 1) {
        const double wprev_bp = prev->value(bp);
        const double phiA = (lam - r) / rho + lam * wprev_bp / bp;
        if (phiA <= 0.0) {
            gamma = bh;
        } else {
            auto phiB = [&](double u) { return (lam - r) / rho + lam * prev->slope(u - bh); };
            double lo = bh + bp;
            if (phiB(lo) <= 0.0) {
                gamma = lo;
            } else {
                // W'_{j-1} reaches -1/rho at gamma_{j-1}, where phiB = -r/rho <= 0.
                double hi = bh + std::max(prev->gamma, bp) + 1e-12;
                if (phiB(hi) > 0.0) {
                    if (r <= 0.0) {
                        gamma = hi;
                    } else {
                        throw SolverError("free-boundary bracket not found on [" +
                                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
                    }
                } else {
                    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (phiB(mid) > 0.0 ? lo : hi) = mid;
                    }
                    gamma = hi;
                }
            }
        }
    }
    s.gamma = gamma;

    double theta, post;
    controls(m, j, gamma, theta, post);
    const double cont_g = j > 1 ? theta * prev->value(post) : 0.0;
    const double Wg = (mu * j - (r * gamma + lam * bh) / rho + lam * cont_g) / lam;

    if (gamma - bh <= 1e-14 * std::max(1.0, bh)) {
        s.u = {bh};
        s.v = {Wg};
        s.dv = {-1.0 / rho};
        return s;
    }

    // Chebyshev-spaced nodes with the regime switch inserted.
    std::vector<double> nodes;
    const int n = opt.nodes;
    for (int i = 0; i < n; ++i)
        nodes.push_back(bh + (gamma - bh) * 0.5 * (1.0 - std::cos(std::numbers::pi * i / (n - 1))));
    nodes.front() = bh;
    nodes.back() = gamma;
    if (j > 1 && bh + bp > bh && bh + bp < gamma) nodes.push_back(bh + bp);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

    // Backward RK4 from gamma.
    std::vector<double> W(nodes.size());
    W.back() = Wg;
    auto f = [&](double u, double w) { return pmh_rhs(m, j, prev, u, w); };
    for (std::size_t i = nodes.size() - 1; i > 0; --i) {
        double u = nodes[i], w = W[i];
        const double hstep = (nodes[i - 1] - nodes[i]) / opt.substeps;
        for (int k = 0; k < opt.substeps; ++k) {
            const double k1 = f(u, w);
            const double k2 = f(u + hstep / 2, w + hstep / 2 * k1);
            const double k3 = f(u + hstep / 2, w + hstep / 2 * k2);
            const double k4 = f(u + hstep, w + hstep * k3);
            w += hstep / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
            u += hstep;
        }
        W[i - 1] = w;
    }
    s.u = nodes;
    s.v = W;
    s.dv.resize(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) s.dv[i] = f(nodes[i], W[i]);
    s.dv.back() = -1.0 / rho;

    const PmhResidual res = pmh_residual(m, s, prev);
    if (res.min_slack < -1e-6 / rho || res.max_concavity_violation > 1e-6 / rho)
        throw SolverError("pure moral hazard solution is not concave or violates the slope bound");
    return s;
}

PmhResidual pmh_residual(const Model& m, const PmhSolution& s, const PmhSolution* prev)
{
    PmhResidual out;
    out.min_slack = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < s.u.size(); ++i) {
        const double slack = s.dv[i] + 1.0 / s.rho_b;
        double ode = 0.0;
        if (s.u[i] < s.gamma) ode = s.dv[i] - pmh_rhs(m, s.j, prev, s.u[i], s.v[i]);
        out.complementarity = std::max(out.complementarity, std::min(std::abs(ode), std::abs(slack)));
        out.min_slack = std::min(out.min_slack, slack);
        if (i > 0) out.max_concavity_violation = std::max(out.max_concavity_violation, s.dv[i] - s.dv[i - 1]);
    }
    return out;
}

std::vector<PmhSolution> solve_pmh_all(const Model& m, const PmhOptions& opt)
{
    std::vector<PmhSolution> out;
    out.reserve(m.I());
    for (int j = 1; j <= m.I(); ++j) out.push_back(solve_pmh(m, j, j > 1 ? &out.back() : nullptr, opt));
    return out;
}

} // namespace contractlab
