#pragma once

#include <vector>

#include "contractlab/model.hpp"

namespace contractlab {

// Investor value under pure moral hazard on [b_hat_j, inf) with payment boundary gamma.
struct PmhSolution {
    int j = 0;
    double b_hat = 0.0;
    double gamma = 0.0;
    double rho_b = 1.0;
    std::vector<double> u;   // ascending nodes on [b_hat, gamma]
    std::vector<double> v;   // value at the nodes
    std::vector<double> dv;  // derivative at the nodes

    double value(double x) const;
    double slope(double x) const;
    double value_at_bhat() const { return v.front(); }
    double value_at_gamma() const { return v.back(); }
};

struct PmhOptions {
    int nodes = 4096;
    int substeps = 4;  // RK4 steps between neighbouring nodes
};

// Solves level j given the level j-1 solution (nullptr when j = 1).
PmhSolution solve_pmh(const Model& m, int j, const PmhSolution* prev, const PmhOptions& opt = {});

// Levels 1..I in order; element j-1 holds level j.
std::vector<PmhSolution> solve_pmh_all(const Model& m, const PmhOptions& opt = {});

// Right-hand side W'(u) of the investor ODE below gamma; exposed for residual checks.
double pmh_rhs(const Model& m, int j, const PmhSolution* prev, double u, double W);

// Max over nodes of min(|ODE residual|, W' + 1/rho_b) and the min of W' + 1/rho_b.
struct PmhResidual {
    double complementarity = 0.0;
    double min_slack = 0.0;
    double max_concavity_violation = 0.0;
};
PmhResidual pmh_residual(const Model& m, const PmhSolution& s, const PmhSolution* prev);

} // namespace contractlab
