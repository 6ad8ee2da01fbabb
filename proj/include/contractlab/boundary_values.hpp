#pragma once

#include <vector>

#include "contractlab/credible_set.hpp"
#include "contractlab/hypoexp.hpp"
#include "contractlab/pmh.hpp"

namespace contractlab {

struct DualSolution {
    double nu = 0.0;
    std::vector<double> cutoffs;  // s_i(nu), i = 1..j-1
    double primal_value = 0.0;    // V^L
    double residual = 0.0;        // |g'(nu)|
    bool capped = false;          // u at c(j,1): nu pinned at the cap
};

// Law of the i-th default time from j loans under all-shirk (rates lambda_sh_j .. lambda_sh_{j-i+1}).
Hypoexp default_time_law(const Model& m, int j, int i);

// Threshold mu (r + lambda_sh_m) / (B lambda_sh_m) with m = j - i.
double cutoff_threshold(const Model& m, int j, int i);
double cutoff_s(const Model& m, int j, int i, double nu);

// Lagrangian dual on the inner lower boundary with j loans left.
class LowerDual {
public:
    LowerDual(const Model& m, int j);

    double g_prime(double nu, double u) const;
    double primal(double nu) const;
    DualSolution solve(double u) const;
    double nu_cap() const { return nu_cap_; }

private:
    const Model* m_;
    int j_;
    double c1_, C_;
    std::vector<Hypoexp> laws_;
    std::vector<double> bterm_, vterm_, thresh_;
    double nu_cap_;
};

DualSolution solve_nu(const Model& m, int j, double u_bc);

// Sum_{i=1}^j mu i / lambda_sh_i.
double lower_junction_value(const Model& m, int j);

double value_lower(const Model& m, int j, double u_bc);

// Investor values on the upper boundary; pmh is the level-j pure moral hazard solution.
double value_upper_good(const Model& m, int j, const PmhSolution* pmh, double u_bc);
double value_upper_bad(const Model& m, int j, const PmhSolution* pmh, double u_b);

// Constants of the power branches derived from continuity.
struct UpperConstants {
    double C_tilde = 0.0;   // bad bank, below b_hat
    double C_hat = 0.0;     // good bank, below x*
    double C_mid = 0.0;     // good bank, on [x*, b_hat)
};
UpperConstants upper_constants(const Model& m, int j, const PmhSolution& pmh);

} // namespace contractlab
