#include "contractlab/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace contractlab {

void check_structure(const ModelParams& p)
{
    if (p.I < 1) throw DomainError("I must be >= 1");
    if (static_cast<int>(p.alpha.size()) != p.I)
        throw DomainError("alpha must have exactly I entries");
    for (double a : p.alpha)
        if (!(a > 0.0) || !std::isfinite(a)) throw DomainError("all alpha_j must be > 0");
    if (!(p.eps > 0.0)) throw DomainError("eps must be > 0");
    if (!(p.r >= 0.0)) throw DomainError("r must be >= 0");
    if (!(p.B >= 0.0)) throw DomainError("B must be >= 0");
    if (!std::isfinite(p.mu)) throw DomainError("mu must be finite");
    if (!(p.rho_b > 0.0) || !(p.rho_g > p.rho_b)) throw DomainError("need rho_g > rho_b > 0");
    if (p.p_g < 0.0 || p.p_b < 0.0 || std::abs(p.p_g + p.p_b - 1.0) > 1e-12)
        throw DomainError("p_g, p_b must be in [0,1] and sum to 1");
}

AssumptionReport validate_assumptions(const ModelParams& p)
{
    check_structure(p);
    AssumptionReport rep;
    rep.slack_i = p.mu - p.alpha[p.I - 1];
    rep.cond_i = rep.slack_i >= 0.0;

    double s2 = std::numeric_limits<double>::infinity();
    for (double a : p.alpha)
        s2 = std::min(s2, (p.mu * p.eps - p.B) * p.eps * a - p.r * p.B * (1.0 + p.eps));
    rep.slack_ii = s2;
    rep.cond_ii = s2 >= 0.0;

    double s3 = std::numeric_limits<double>::infinity();
    for (int j = 2; j <= p.I; ++j) s3 = std::min(s3, p.alpha[j - 2] - p.alpha[j - 1]);
    rep.slack_iii = s3;
    rep.cond_iii = s3 >= 0.0;
    return rep;
}

Model::Model(ModelParams p) : p_(std::move(p)) { check_structure(p_); }

void Model::check_j(int j) const
{
    if (j < 1 || j > p_.I)
        throw DomainError("loans-remaining j=" + std::to_string(j) + " outside [1, I]");
}

double Model::alpha(int j) const
{
    check_j(j);
    return p_.alpha[j - 1];
}

double Model::intensity(int j, int k) const
{
    check_j(j);
    if (k < 0 || k > j) throw DomainError("shirked count k outside [0, j]");
    return p_.alpha[j - 1] * (j + p_.eps * k);
}

double Model::b_hat(int j) const
{
    if (j == 0) return 0.0;
    check_j(j);
    return p_.B / (p_.alpha[j - 1] * p_.eps);
}

} // namespace contractlab
