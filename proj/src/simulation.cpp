#include "contractlab/simulation.hpp"

#include <algorithm>
#include <cmath>

#include <tbb/blocked_range.h>
#include <tbb/parallel_for.h>

#include "contractlab/boundary_values.hpp"

namespace contractlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int idx(Bank b) { return static_cast<int>(b); }

// int_{t0}^{t0+dt} e^{-rs} ds
double disc_int(double r, double t0, double dt)
{
    if (r <= 0.0) return dt;
    return std::exp(-r * t0) * -std::expm1(-r * dt) / r;
}

// Time for du/dt = r u + a to move from u to target > u.
double linear_hitting_time(double r, double a, double u, double target)
{
    if (u >= target) return 0.0;
    if (r <= 0.0) return a > 0.0 ? (target - u) / a : kInf;
    return std::log((target + a / r) / (u + a / r)) / r;
}

double linear_flow(double r, double a, double u, double dt)
{
    if (r <= 0.0) return u + a * dt;
    return (u + a / r) * std::exp(r * dt) - a / r;
}

double shirk_flow(const Model& m, int j, double u, double dt)
{
    const double a = m.r() + m.lambda_sh(j), c1 = m.B() * j / a;
    return std::exp(a * dt) * (u - c1) + c1;
}

} // namespace

const char* strategy_name(Strategy s)
{
    switch (s) {
    case Strategy::recommended: return "recommended";
    case Strategy::always_work: return "always_work";
    case Strategy::always_shirk: return "always_shirk";
    default: return "threshold";
    }
}

const char* event_name(EventType e)
{
    switch (e) {
    case EventType::default_kept: return "default-kept";
    case EventType::default_liquidated: return "default-liquidated";
    case EventType::regime_switch: return "regime-switch";
    case EventType::payment_lump: return "payment-lump";
    default: return "pool-exhausted";
    }
}

SimPath simulate_path(const Model& m, const Contract& proto, Bank b, Strategy strat, std::uint64_t seed,
                      std::uint64_t path, const SimOptions& opt)
{
    auto c = proto.clone();
    PhiloxStream rng(seed, path);
    const double rho = m.rho(b), r = m.r();
    SimPath P;
    double t = 0.0;
    auto log = [&](EventType e) {
        if (opt.log_events) P.events.push_back({t, e, c->loans(), c->state()});
    };
    auto pay_lump = [&](double l) {
        if (l <= 0.0) return;
        P.bank_value += rho * l * std::exp(-r * t);
        P.investor_value -= l;
        P.paid += l;
        log(EventType::payment_lump);
    };
    pay_lump(c->start());
    long events = 0;
    while (true) {
        const int j = c->loans();
        if (j == 0) {
            log(EventType::pool_exhausted);
            break;
        }
        if (++events > opt.max_events) throw SolverError("simulation exceeded the event budget");
        const Segment sg = c->segment();
        pay_lump(sg.lump);
        int k = 0;
        switch (strat) {
        case Strategy::recommended: k = sg.k_rec[idx(b)]; break;
        case Strategy::always_work: k = 0; break;
        case Strategy::always_shirk: k = j; break;
        case Strategy::threshold: k = sg.exposure[idx(b)] < m.b_hat(j) ? j : 0; break;
        }
        const double lam = m.intensity(j, k);
        const double tau = rng.exponential(lam);
        double dt = std::min(tau, sg.duration);
        const bool hits_horizon = t + dt >= opt.horizon;
        if (hits_horizon) dt = opt.horizon - t;
        P.bank_value += (rho * sg.pay_rate + m.B() * k) * disc_int(r, t, dt);
        P.investor_value += (m.mu() * j - sg.pay_rate) * dt;
        P.paid += sg.pay_rate * dt;
        c->advance(dt);
        t += dt;
        if (hits_horizon) {
            P.terminal_state = c->state();
            break;
        }
        if (tau < sg.duration) {
            ++P.defaults;
            P.default_times.push_back(t);
            const double th = c->theta();
            if (rng.uniform() < th) {
                log(EventType::default_kept);
                if (j == 1) {
                    c->on_default_continue();
                    log(EventType::pool_exhausted);
                    break;
                }
                pay_lump(c->on_default_continue());
            } else {
                P.liquidated = true;
                log(EventType::default_liquidated);
                break;
            }
        } else {
            log(EventType::regime_switch);
        }
    }
    P.tau = t;
    return P;
}

McEstimate summarize(const std::vector<double>& xs, std::uint64_t seed)
{
    McEstimate e;
    e.n = static_cast<long>(xs.size());
    e.seed = seed;
    if (xs.empty()) return e;
    // Two-pass mean and variance in index order for reproducibility.
    double s = 0.0;
    for (double x : xs) s += x;
    e.mean = s / xs.size();
    double v = 0.0;
    for (double x : xs) v += (x - e.mean) * (x - e.mean);
    e.se = xs.size() > 1 ? std::sqrt(v / (xs.size() - 1) / xs.size()) : 0.0;
    return e;
}

std::vector<SimPath> simulate_many(const Model& m, const Contract& c, Bank b, Strategy s, long n,
                                   std::uint64_t seed, const SimOptions& opt)
{
    std::vector<SimPath> out(n);
    tbb::parallel_for(tbb::blocked_range<long>(0, n), [&](const tbb::blocked_range<long>& rg) {
        for (long i = rg.begin(); i < rg.end(); ++i)
            out[i] = simulate_path(m, c, b, s, seed, static_cast<std::uint64_t>(i), opt);
    });
    return out;
}

McEstimate estimate_bank_value(const Model& m, const Contract& c, Bank b, Strategy s, long n,
                               std::uint64_t seed)
{
    if (n < 100) throw DomainError("at least 100 paths are required for a standard error");
    const auto paths = simulate_many(m, c, b, s, n, seed);
    std::vector<double> xs(n);
    for (long i = 0; i < n; ++i) xs[i] = paths[i].bank_value;
    return summarize(xs, seed);
}

InvestorEstimate estimate_investor_value(const Model& m, const Contract& c, Bank b, long n,
                                         std::uint64_t seed)
{
    if (n < 100) throw DomainError("at least 100 paths are required for a standard error");
    const auto rec = simulate_many(m, c, b, Strategy::recommended, n, seed);
    const std::vector<SimPath>* best = &rec;
    std::vector<SimPath> alt;
    InvestorEstimate out;
    double best_gain = 0.0;
    for (Strategy s : kAllStrategies) {
        if (s == Strategy::recommended) continue;
        auto paths = simulate_many(m, c, b, s, n, seed);
        std::vector<double> diff(n);
        for (long i = 0; i < n; ++i) diff[i] = paths[i].bank_value - rec[i].bank_value;
        const McEstimate d = summarize(diff, seed);
        if (d.mean > 3.0 * d.se && d.mean > best_gain) {
            best_gain = d.mean;
            alt = std::move(paths);
            best = &alt;
            out.response = s;
        }
    }
    std::vector<double> inv(n), bank(n);
    for (long i = 0; i < n; ++i) {
        inv[i] = (*best)[i].investor_value;
        bank[i] = (*best)[i].bank_value;
    }
    out.investor = summarize(inv, seed);
    out.bank = summarize(bank, seed);
    return out;
}

McEstimate martingale_drift(const Model& m, const Contract& c, double horizon, long n, std::uint64_t seed)
{
    if (n < 100) throw DomainError("at least 100 paths are required for a standard error");
    auto probe = c.clone();
    const double lump0 = probe->start();
    const double u0 = probe->state() + m.params().rho_b * lump0;
    SimOptions opt;
    opt.horizon = horizon;
    const auto paths = simulate_many(m, c, Bank::bad, Strategy::recommended, n, seed, opt);
    std::vector<double> xs(n);
    for (long i = 0; i < n; ++i)
        xs[i] = std::exp(-m.r() * horizon) * paths[i].terminal_state + paths[i].bank_value - u0;
    return summarize(xs, seed);
}

// ---- UpperContract ----

UpperContract::UpperContract(const Model& m, const std::vector<PmhSolution>& pmh, int j, double u0)
    : m_(&m), pmh_(&pmh), j0_(j), j_(j), u0_(u0), u_(u0)
{
    if (static_cast<int>(pmh.size()) < j) throw DomainError("pure moral hazard levels missing");
    const CredibleSet cs(m, j);
    if (u0 < cs.c1()) throw DomainError("u_b below c(j,1)");
}

double UpperContract::enter(double u)
{
    const double g = (*pmh_)[j_ - 1].gamma;
    u_ = u;
    if (u > g) {
        u_ = g;
        return (u - g) / m_->params().rho_b;
    }
    return 0.0;
}

double UpperContract::start()
{
    j_ = j0_;
    return enter(u0_);
}

Segment UpperContract::segment() const
{
    const CredibleSet cs(*m_, j_);
    const double bh = cs.b_hat(), g = (*pmh_)[j_ - 1].gamma;
    Segment s;
    if (u_ < bh) {
        const double target = u_ < cs.x_star() ? cs.x_star() : bh;
        s.duration = shirk_hitting_time(*m_, j_, u_, target);
        s.k_rec[idx(Bank::bad)] = j_;
        s.k_rec[idx(Bank::good)] = u_ < cs.x_star() ? j_ : 0;
        s.exposure[idx(Bank::bad)] = u_;
        s.exposure[idx(Bank::good)] = cs.upper(u_);
        return s;
    }
    s.exposure[idx(Bank::bad)] = bh;
    s.exposure[idx(Bank::good)] = m_->rho_ratio() * bh;
    if (u_ < g) {
        s.duration = linear_hitting_time(m_->r(), m_->lambda_0(j_) * bh, u_, g);
    } else {
        s.duration = kInf;
        s.pay_rate = (m_->lambda_0(j_) * bh + m_->r() * g) / m_->params().rho_b;
    }
    return s;
}

void UpperContract::advance(double dt)
{
    const CredibleSet cs(*m_, j_);
    const double bh = cs.b_hat(), g = (*pmh_)[j_ - 1].gamma;
    if (u_ < bh) {
        const double target = u_ < cs.x_star() ? cs.x_star() : bh;
        const double T = shirk_hitting_time(*m_, j_, u_, target);
        u_ = dt >= T ? target : std::min(shirk_flow(*m_, j_, u_, dt), target);
    } else if (u_ < g) {
        const double a = m_->lambda_0(j_) * bh;
        const double T = linear_hitting_time(m_->r(), a, u_, g);
        u_ = dt >= T ? g : std::min(linear_flow(m_->r(), a, u_, dt), g);
    }
}

double UpperContract::theta() const
{
    const double bh = m_->b_hat(j_), bp = m_->b_hat(j_ - 1);
    if (u_ < bh) return 0.0;
    if (j_ > 1 && u_ < bh + bp) return (u_ - bh) / bp;
    return 1.0;
}

double UpperContract::on_default_continue()
{
    const double bh = m_->b_hat(j_), bp = m_->b_hat(j_ - 1);
    const double post = (j_ > 1 && u_ < bh + bp) ? bp : u_ - bh;
    --j_;
    if (j_ == 0) {
        u_ = 0.0;
        return 0.0;
    }
    return enter(post);
}

// ---- LowerContract ----

LowerContract::LowerContract(const Model& m, int j, double u0)
    : m_(&m), C_(C_table(m)), j0_(j), j_(j), u0_(u0), u_(u0)
{
    const CredibleSet cs(m, j);
    if (u0 < cs.c1()) throw DomainError("u_b below c(j,1)");
}

double LowerContract::start()
{
    j_ = j0_;
    u_ = u0_;
    if (u_ > C_[j_]) {
        const double l = (u_ - C_[j_]) / m_->params().rho_b;
        u_ = C_[j_];
        return l;
    }
    return 0.0;
}

Segment LowerContract::segment() const
{
    Segment s;
    s.k_rec[0] = s.k_rec[1] = j_;
    if (u_ < C_[j_]) {
        s.duration = shirk_hitting_time(*m_, j_, u_, C_[j_]);
        s.exposure[0] = s.exposure[1] = u_;
    } else {
        s.duration = kInf;
        s.exposure[0] = s.exposure[1] = C_[j_] - C_[j_ - 1];
    }
    return s;
}

void LowerContract::advance(double dt)
{
    if (u_ >= C_[j_]) return;
    const double T = shirk_hitting_time(*m_, j_, u_, C_[j_]);
    u_ = dt >= T ? C_[j_] : std::min(shirk_flow(*m_, j_, u_, dt), C_[j_]);
}

double LowerContract::theta() const { return u_ >= C_[j_] ? 1.0 : 0.0; }

double LowerContract::on_default_continue()
{
    --j_;
    u_ = C_[j_];
    return 0.0;
}

// ---- CutoffContract ----

CutoffContract::CutoffContract(const Model& m, int j, std::vector<double> cutoffs)
    : m_(&m), j0_(j), j_(j), cut_(std::move(cutoffs))
{
    if (j < 1 || j > m.I()) throw DomainError("loans-remaining j outside [1, I]");
    if (static_cast<int>(cut_.size()) != j - 1) throw DomainError("need j-1 cutoffs");
}

double CutoffContract::start()
{
    j_ = j0_;
    t_ = 0.0;
    return 0.0;
}

Segment CutoffContract::segment() const
{
    Segment s;
    s.duration = kInf;
    s.k_rec[0] = s.k_rec[1] = j_;
    return s;
}

double CutoffContract::theta() const
{
    const int i = j0_ - j_ + 1;
    if (i >= j0_) return 1.0;
    return t_ > cut_[i - 1] ? 1.0 : 0.0;
}

double CutoffContract::on_default_continue()
{
    --j_;
    return 0.0;
}

// ---- ShortTermContract ----

ShortTermContract::ShortTermContract(const Model& m, int j, double c, double t_star, double lump, double theta)
    : m_(&m), j0_(j), j_(j), c_(c), tstar_(t_star), lump_(lump), theta_(theta)
{
    if (j < 1 || j > m.I()) throw DomainError("loans-remaining j outside [1, I]");
    if (c < 0.0 || t_star < 0.0 || lump < 0.0) throw DomainError("short-term contract needs c, t*, lump >= 0");
    if (theta != 0.0 && theta != 1.0) throw DomainError("short-term contract needs theta in {0, 1}");
    if (theta == 1.0 && c > 0.0) throw DomainError("theta = 1 short-term contracts carry no flow payment");
    for (Bank b : {Bank::good, Bank::bad}) {
        double sw = kInf;
        if (theta == 0.0) {
            const ShortTermValue v = short_term_values(m, j, c, t_star, b);
            if (v.regime == Regime::work) sw = 0.0;
            if (v.regime == Regime::mixed) sw = v.switch_time;
        }
        switch_[idx(b)] = sw;
    }
}

double ShortTermContract::start()
{
    j_ = j0_;
    t_ = 0.0;
    return lump_;
}

Segment ShortTermContract::segment() const
{
    Segment s;
    double next = kInf;
    for (double b : {tstar_, switch_[0], switch_[1]})
        if (b > t_) next = std::min(next, b);
    s.duration = next - t_;
    s.pay_rate = t_ >= tstar_ ? c_ : 0.0;
    const double mid = std::isfinite(s.duration) ? t_ + 0.5 * s.duration : t_;
    for (Bank b : {Bank::good, Bank::bad}) {
        s.k_rec[idx(b)] = t_ >= switch_[idx(b)] ? 0 : j_;
        s.exposure[idx(b)] = theta_ == 0.0
            ? short_term_values(*m_, j_, c_, std::max(tstar_ - mid, 0.0), b).value
            : 0.0;
    }
    return s;
}

double ShortTermContract::on_default_continue()
{
    --j_;
    return 0.0;
}

// ---- Statistical checks ----

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double D = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double F = cdf(xs[i]);
        D = std::max({D, (i + 1) / n - F, F - i / n});
    }
    return D;
}

double ks_pvalue(double D, std::size_t n)
{
    const double sn = std::sqrt(static_cast<double>(n));
    const double lam = (sn + 0.12 + 0.11 / sn) * D;
    if (lam < 0.2) return 1.0;
    double q = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lam * lam);
        q += (k % 2 ? 2.0 : -2.0) * term;
        if (term < 1e-18) break;
    }
    return std::clamp(q, 0.0, 1.0);
}

LemmaReport lemma_inequality_scan(const Model& m, int j, int n_contracts, long n_paths, std::uint64_t seed)
{
    if (n_paths < 100) throw DomainError("at least 100 paths are required for a standard error");
    const CredibleSet cs(m, j);
    const double rho = m.rho_ratio(), C = cs.C();
    const double cbar_b = short_term_cbar(m, j, Bank::bad);
    const double horizon = 4.0 / m.lambda_0(j);
    LemmaReport rep;
    // Contract parameters come from a stream disjoint from the path streams.
    PhiloxStream gen(seed ^ 0x9E3779B97F4A7C15ull, 0);
    for (int i = 0; i < n_contracts; ++i) {
        LemmaRecord rec{};
        const bool lumpy = gen.uniform() < 0.2;
        if (lumpy) {
            rec.kind = "lump-continue";
            rec.c = 0.0;
            rec.t_star = 0.0;
            rec.theta = 1.0;
            rec.lump = gen.uniform() * cs.b_hat();
        } else {
            rec.kind = "delayed";
            rec.c = 3.0 * cbar_b * gen.uniform();
            rec.t_star = horizon * gen.uniform();
            rec.theta = 0.0;
            rec.lump = gen.uniform() < 0.5 ? gen.uniform() * cs.b_hat() : 0.0;
        }
        const ShortTermContract k(m, j, rec.c, rec.t_star, rec.lump, rec.theta);
        const std::uint64_t s = seed + 1000003ull * (i + 1);
        // Common random numbers: the two types share path streams, so gaps are paired per path.
        const auto pg = simulate_many(m, k, Bank::good, Strategy::recommended, n_paths, s);
        const auto pb = simulate_many(m, k, Bank::bad, Strategy::recommended, n_paths, s);
        std::vector<double> ug(n_paths), ub(n_paths), d1(n_paths), d2(n_paths);
        for (long p = 0; p < n_paths; ++p) {
            ug[p] = pg[p].bank_value;
            ub[p] = pb[p].bank_value;
            d1[p] = ug[p] - ub[p];
            d2[p] = ug[p] - (rho * ub[p] - (rho - 1.0) * C);
        }
        rec.Ug = summarize(ug, s);
        rec.Ub = summarize(ub, s);
        const McEstimate e1 = summarize(d1, s), e2 = summarize(d2, s);
        rec.gap1 = e1.mean;
        rec.se1 = e1.se;
        rec.gap2 = e2.mean;
        rec.se2 = e2.se;
        rec.ok = rec.gap1 >= -3.0 * rec.se1 && rec.gap2 >= -3.0 * rec.se2;
        if (!rec.ok) ++rep.violations;
        rep.records.push_back(rec);
    }
    return rep;
}

} // namespace contractlab
