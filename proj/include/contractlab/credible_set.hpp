#pragma once

#include <vector>

#include "contractlab/model.hpp"

namespace contractlab {

// Closed-form geometry of the credible set with j loans left.
class CredibleSet {
public:
    CredibleSet(const Model& m, int j);

    int j() const { return j_; }
    const Model& model() const { return *m_; }

    // c(j, m) for 1 <= m <= j.
    double shirk_utility(int m) const;
    const std::vector<double>& c_table() const { return c_; }
    double c1() const { return c_.front(); }
    double C() const { return c_.back(); }
    double b_hat() const { return bhat_; }
    double x_star() const { return xstar_; }
    // Exponent (r + lambda_sh) / (r + lambda_0) of the first upper piece.
    double p() const { return p_; }

    double lower(double ub) const;
    double upper(double ub) const;
    double upper_slope(double ub) const;
    bool contains(double ub, double ug) const;

private:
    void check(double ub) const;

    const Model* m_;
    int j_;
    std::vector<double> c_;
    double bhat_, xstar_, p_, rho_;
};

// C(j) for j = 0..I with C(0) = 0.
std::vector<double> C_table(const Model& m);

// c(j, m) via the nested-product display; oracle for the recursion.
double shirk_utility_product(const Model& m, int j, int mm);

struct OdeCheck {
    double max_residual = 0.0;     // max |U_ode - U_closed| on [c(1,1), 3 b_hat]
    double kink_jump_xstar = 0.0;  // relative derivative jump at x*
    double kink_jump_bhat = 0.0;   // relative derivative jump at b_hat
    double third_region_residual = 0.0;
    long steps = 0;
};

// Integrates the single-loan diffusion equation and compares with the closed form.
OdeCheck verify_upper_boundary_ode(const Model& m, double h);

} // namespace contractlab
