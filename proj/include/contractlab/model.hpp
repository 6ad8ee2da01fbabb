#pragma once

#include <vector>

#include "contractlab/errors.hpp"

namespace contractlab {

enum class Bank { good, bad };

inline const char* bank_name(Bank b) { return b == Bank::good ? "good" : "bad"; }

struct ModelParams {
    int I = 1;
    double mu = 0.1;
    double B = 0.002;
    double eps = 0.25;
    double r = 0.02;
    std::vector<double> alpha{0.055};   // alpha[j-1] is the baseline rate with j loans left
    double rho_g = 2.0;
    double rho_b = 1.0;
    double p_g = 0.5;
    double p_b = 0.5;
};

struct AssumptionReport {
    bool cond_i = false;
    bool cond_ii = false;
    bool cond_iii = false;
    double slack_i = 0.0;    // mu - alpha_I
    double slack_ii = 0.0;   // min_j (mu*eps - B)*eps*alpha_j - r*B*(1+eps)
    double slack_iii = 0.0;  // min_j alpha_{j-1} - alpha_j  (+inf when I = 1)
    bool all() const { return cond_i && cond_ii && cond_iii; }
};

// Throws DomainError when the parameters are structurally invalid.
void check_structure(const ModelParams& p);

AssumptionReport validate_assumptions(const ModelParams& p);

// Immutable view of the primitives with derived intensities.
class Model {
public:
    explicit Model(ModelParams p);

    const ModelParams& params() const { return p_; }
    int I() const { return p_.I; }
    double mu() const { return p_.mu; }
    double B() const { return p_.B; }
    double eps() const { return p_.eps; }
    double r() const { return p_.r; }
    double rho(Bank b) const { return b == Bank::good ? p_.rho_g : p_.rho_b; }
    double rho_ratio() const { return p_.rho_g / p_.rho_b; }

    double alpha(int j) const;
    // Aggregate default intensity with j loans left and k of them unmonitored.
    double intensity(int j, int k) const;
    double lambda_0(int j) const { return intensity(j, 0); }
    double lambda_sh(int j) const { return intensity(j, j); }
    // Incentive threshold B/(alpha_j eps); b_hat(0) = 0 by convention.
    double b_hat(int j) const;

private:
    void check_j(int j) const;
    ModelParams p_;
};

} // namespace contractlab
