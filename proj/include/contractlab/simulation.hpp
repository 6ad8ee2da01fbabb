#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "contractlab/contracts.hpp"
#include "contractlab/pmh.hpp"
#include "contractlab/rng.hpp"

namespace contractlab {

// Deterministic stretch of a contract between defaults with constant controls.
struct Segment {
    double duration = 0.0;          // may be +inf
    double pay_rate = 0.0;
    double lump = 0.0;              // paid at the start of the segment
    int k_rec[2] = {0, 0};          // recommended unmonitored loans, indexed by Bank
    double exposure[2] = {0.0, 0.0};  // loss at default per bank type, for threshold responses
};

// A contract seen as a piecewise-deterministic process driven by defaults.
class Contract {
public:
    virtual ~Contract() = default;
    virtual std::unique_ptr<Contract> clone() const = 0;
    virtual int loans() const = 0;
    // Lump sum due at time zero; also resets the internal state.
    virtual double start() = 0;
    virtual Segment segment() const = 0;
    virtual void advance(double dt) = 0;
    // Continuation probability if a default happens now.
    virtual double theta() const = 0;
    // Moves to the next pool size after a kept default; returns a lump sum due.
    virtual double on_default_continue() = 0;
    // Bad bank's promised value, used for logging and martingale checks.
    virtual double state() const = 0;
};

enum class Strategy { recommended, always_work, always_shirk, threshold };
const char* strategy_name(Strategy s);
constexpr Strategy kAllStrategies[] = {Strategy::recommended, Strategy::always_work,
                                       Strategy::always_shirk, Strategy::threshold};

enum class EventType { default_kept, default_liquidated, regime_switch, payment_lump, pool_exhausted };
const char* event_name(EventType e);

struct SimEvent {
    double time;
    EventType type;
    int pool;
    double state;
};

struct SimPath {
    std::vector<SimEvent> events;
    double tau = 0.0;             // terminal time
    double bank_value = 0.0;      // discounted at r
    double investor_value = 0.0;  // undiscounted
    double paid = 0.0;            // undiscounted payments
    int defaults = 0;
    bool liquidated = false;
    std::vector<double> default_times;
    double terminal_state = 0.0;  // bad bank's promised value at the horizon if still running
};

struct SimOptions {
    bool log_events = false;
    double horizon = std::numeric_limits<double>::infinity();  // stop early for martingale checks
    long max_events = 10'000'000;
};

SimPath simulate_path(const Model& m, const Contract& c, Bank b, Strategy s, std::uint64_t seed,
                      std::uint64_t path, const SimOptions& opt = {});

struct McEstimate {
    double mean = 0.0;
    double se = 0.0;
    long n = 0;
    std::uint64_t seed = 0;
};
McEstimate summarize(const std::vector<double>& xs, std::uint64_t seed);

// Runs n paths in parallel and returns per-path outcomes in path order.
std::vector<SimPath> simulate_many(const Model& m, const Contract& c, Bank b, Strategy s, long n,
                                   std::uint64_t seed, const SimOptions& opt = {});

McEstimate estimate_bank_value(const Model& m, const Contract& c, Bank b, Strategy s, long n,
                               std::uint64_t seed);

struct InvestorEstimate {
    McEstimate investor;
    McEstimate bank;
    Strategy response = Strategy::recommended;
};
// Bank best-responds within the strategy menu; a deviation from the recommendation is
// accepted only when its paired gain exceeds three standard errors.
InvestorEstimate estimate_investor_value(const Model& m, const Contract& c, Bank b, long n,
                                         std::uint64_t seed);

// e^{-rT} u_T + int_0^T e^{-rs}(rho_b dD + B k ds) - u_0 for the bad bank under recommendation.
McEstimate martingale_drift(const Model& m, const Contract& c, double horizon, long n, std::uint64_t seed);

// ---- Concrete contracts ----

class UpperContract : public Contract {
public:
    UpperContract(const Model& m, const std::vector<PmhSolution>& pmh, int j, double u0);
    std::unique_ptr<Contract> clone() const override { return std::make_unique<UpperContract>(*this); }
    int loans() const override { return j_; }
    double start() override;
    Segment segment() const override;
    void advance(double dt) override;
    double theta() const override;
    double on_default_continue() override;
    double state() const override { return u_; }

private:
    double enter(double u);
    const Model* m_;
    const std::vector<PmhSolution>* pmh_;
    int j0_, j_;
    double u0_, u_;
};

class LowerContract : public Contract {
public:
    LowerContract(const Model& m, int j, double u0);
    std::unique_ptr<Contract> clone() const override { return std::make_unique<LowerContract>(*this); }
    int loans() const override { return j_; }
    double start() override;
    Segment segment() const override;
    void advance(double dt) override;
    double theta() const override;
    double on_default_continue() override;
    double state() const override { return u_; }

private:
    const Model* m_;
    std::vector<double> C_;
    int j0_, j_;
    double u0_, u_;
};

// No payments, all shirk; the i-th default is kept iff it happens after the cutoff s_i.
class CutoffContract : public Contract {
public:
    CutoffContract(const Model& m, int j, std::vector<double> cutoffs);
    std::unique_ptr<Contract> clone() const override { return std::make_unique<CutoffContract>(*this); }
    int loans() const override { return j_; }
    double start() override;
    Segment segment() const override;
    void advance(double dt) override { t_ += dt; }
    double theta() const override;
    double on_default_continue() override;
    double state() const override { return 0.0; }

private:
    const Model* m_;
    int j0_, j_;
    std::vector<double> cut_;
    double t_ = 0.0;
};

// Lump sum at zero plus a constant payment rate c from t_star on; theta is constant.
// With theta = 1 no flow payment is allowed (the family used for the lower boundary).
class ShortTermContract : public Contract {
public:
    ShortTermContract(const Model& m, int j, double c, double t_star, double lump, double theta);
    std::unique_ptr<Contract> clone() const override { return std::make_unique<ShortTermContract>(*this); }
    int loans() const override { return j_; }
    double start() override;
    Segment segment() const override;
    void advance(double dt) override { t_ += dt; }
    double theta() const override { return theta_; }
    double on_default_continue() override;
    double state() const override { return 0.0; }

    double c() const { return c_; }
    double t_star() const { return tstar_; }
    double lump() const { return lump_; }

private:
    const Model* m_;
    int j0_, j_;
    double c_, tstar_, lump_, theta_;
    double t_ = 0.0;
    double switch_[2];  // time from which each type monitors (inf: never)
};

// ---- Statistical checks ----

// Kolmogorov-Smirnov statistic of samples against a continuous cdf.
double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf);
// Asymptotic p-value of sqrt(n) D with the small-sample correction of Stephens.
double ks_pvalue(double D, std::size_t n);

struct LemmaRecord {
    std::string kind;
    double c, t_star, lump, theta;
    McEstimate Ug, Ub;
    double gap1, se1;  // U^g - U^b
    double gap2, se2;  // U^g - (rho U^b - (rho - 1) C(j))
    bool ok;
};
struct LemmaReport {
    std::vector<LemmaRecord> records;
    int violations = 0;
};
LemmaReport lemma_inequality_scan(const Model& m, int j, int n_contracts, long n_paths, std::uint64_t seed);

} // namespace contractlab
