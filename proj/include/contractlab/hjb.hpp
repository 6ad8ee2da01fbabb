#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "contractlab/boundary_values.hpp"
#include "contractlab/simulation.hpp"

namespace contractlab {

struct HjbOptions {
    int nx = 64;            // columns in u_b
    int ny = 64;            // rows in the normalized u_g coordinate
    double u_max = 0.0;     // 0: max(3 b_hat_j, 2 C(j))
    double tol = 1e-8;      // sup-norm update, relative to scale
    int max_iter = 10000;   // Howard iterations
    int coarse = 16;        // coarse lattice cells per axis for post-default candidates
};

// Weighted node combination plus a constant, as produced by interpolation.
struct Stencil {
    int n = 0;
    int idx[4] = {0, 0, 0, 0};
    double w[4] = {0, 0, 0, 0};
    double offset = 0.0;
};

// Value and feedback policy over the truncated credible set with j loans left.
// Columns are uniform in u_b; rows are uniform in eta = (u_g - L(u_b)) / (U(u_b) - L(u_b)).
struct GridValueFunction {
    int j = 0;
    Bank bank = Bank::good;
    int nx = 0, ny = 0;
    double x0 = 0.0, x1 = 0.0, hx = 0.0;
    double rho_b = 1.0, rho_g = 2.0;
    std::vector<double> xs, L, U;   // per column
    std::vector<double> V;          // nx * ny, index i * ny + k
    std::vector<double> theta, h1b, h1g, h2b, h2g;
    std::vector<std::uint8_t> pay;
    std::vector<std::uint8_t> kb, kg;
    double scale = 1.0;
    double residual = 0.0;          // max |max(Q_cont, Q_pay) - V| over free nodes
    double min_gradient_slack = 0.0;  // min over free nodes of V - Q_pay
    int iterations = 0;
    std::shared_ptr<const CredibleSet> geometry;

    int id(int i, int k) const { return i * ny + k; }
    double y(int i, int k) const { return L[i] + (U[i] - L[i]) * k / (ny - 1); }
    bool is_fixed(int i, int k) const { return i == 0 || k == 0 || k == ny - 1; }
    std::size_t size() const { return V.size(); }

    Stencil stencil(double x, double yv) const;
    double value(double x, double yv) const;
    // Payment flag at an arbitrary state (nearest node).
    bool paying(double x, double yv) const;
};

// Geometry-only grid with boundary data filled in; interior values are unset.
GridValueFunction build_domain(const Model& m, int j, Bank bank, const PmhSolution& pmh,
                               const HjbOptions& opt);

// Solves level j given level j-1 (nullptr when j = 1).
GridValueFunction solve_vi(const Model& m, int j, Bank bank, const PmhSolution& pmh,
                           const GridValueFunction* prev, const HjbOptions& opt);

// Solves levels 1..J for one bank.
std::vector<GridValueFunction> solve_hjb_levels(const Model& m, int J, Bank bank,
                                                const std::vector<PmhSolution>& pmh, const HjbOptions& opt);

struct PolicyAt {
    bool pay = false;
    double theta = 0.0, h1b = 0.0, h2b = 0.0, h1g = 0.0, h2g = 0.0;
    int kb = 0, kg = 0;
};
PolicyAt extract_policy(const GridValueFunction& g, int i, int k);

// Max over columns of |V(i, 1) - V(i, 0)| and |V(i, ny-2) - V(i, ny-1)|.
double boundary_row_gap(const GridValueFunction& g);

struct MenuValue {
    bool feasible_shutdown = false, feasible_screening = false;
    double v_shutdown = 0.0, v_screening = 0.0;
    double shut_ub = 0.0, shut_ug = 0.0;
    double scr_ub = 0.0, scr_ug = 0.0, scr_ubc = 0.0, scr_ugc = 0.0;
};
MenuValue optimal_menu_value(const Model& m, const GridValueFunction& Vg, const GridValueFunction& Vb,
                             double R0_b, double R0_g, int raster = 256);

// Single-loan contract driven by a solved grid: deterministic flow plus lump payments
// wherever the grid flags payment.
class GridPolicyContract : public Contract {
public:
    GridPolicyContract(const Model& m, const GridValueFunction& g, double x0, double y0, double dt_frac = 0.25);
    std::unique_ptr<Contract> clone() const override { return std::make_unique<GridPolicyContract>(*this); }
    int loans() const override { return j_; }
    double start() override;
    Segment segment() const override;
    void advance(double dt) override;
    double theta() const override { return 0.0; }
    double on_default_continue() override { j_ = 0; return 0.0; }
    double state() const override { return x_; }

private:
    double settle();
    const Model* m_;
    const GridValueFunction* g_;
    int j_ = 1;
    double x0_, y0_, x_, y_, dt_frac_;
    mutable double pending_ = 0.0;
};

} // namespace contractlab
