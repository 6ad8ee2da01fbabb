#pragma once

#include <vector>

#include "contractlab/credible_set.hpp"
#include "contractlab/pmh.hpp"

namespace contractlab {

// Feedback controls at a boundary state; the state is the bad bank's promised value.
struct PolicyPoint {
    double delta = 0.0;  // payment rate while holding the state
    double lump = 0.0;   // lump sum due at entry
    double theta = 0.0;  // continuation probability at the next default
    double h1 = 0.0;
    double h2 = 0.0;
    int kb = 0;          // recommended unmonitored loans, bad bank
    int kg = 0;          // recommended unmonitored loans, good bank
};

PolicyPoint upper_boundary_policy(const Model& m, int j, const PmhSolution& pmh, double u_b);
PolicyPoint lower_boundary_policy(const Model& m, int j, double u_b);

// Drift of the bad bank's promised value on the upper boundary below gamma_j.
double upper_drift(const Model& m, int j, double u_b);

// Deterministic shirking path below b_hat_j and the time t* at which it reaches b_hat_j.
struct ShirkPath {
    double u0 = 0.0;
    double t_star = 0.0;
    double at(const Model& m, int j, double s) const;
};
ShirkPath state_step_deterministic(const Model& m, int j, double u_b);

// Time for the shirking path started at u to reach the level target (inf if it never does).
double shirk_hitting_time(const Model& m, int j, double u, double target);

enum class Regime { shirk, work, mixed };
const char* regime_name(Regime r);

struct ShortTermValue {
    Regime regime = Regime::shirk;
    double value = 0.0;
    double switch_time = 0.0;  // start of monitoring in the mixed case
};

// Constant payment rate c from time t_star onward, liquidation at the first default.
double short_term_cbar(const Model& m, int j, Bank b);
// Lead time before t_star during which the bank already monitors (c > cbar).
double short_term_lead(const Model& m, int j, double c, Bank b);
ShortTermValue short_term_values(const Model& m, int j, double c, double t_star, Bank b);

// Delayed short-term contract (c, t*) attaining (u_b, U_j(u_b)) for u_b in [x*, b_hat).
struct DelayedContract {
    double c = 0.0;
    double t_star = 0.0;
};
DelayedContract reach_upper(const Model& m, int j, double u_b);

struct ReservationUtility {
    std::vector<double> R;    // R[0] = 0, R[j] for j = 1..I
    std::vector<bool> work;   // work[j] true when monitoring is optimal with j loans
};
ReservationUtility reservation_utility(const Model& m, Bank b);

} // namespace contractlab
