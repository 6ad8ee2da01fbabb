#include "contractlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <tbb/global_control.h>

#include "contractlab/boundary_values.hpp"
#include "contractlab/config.hpp"
#include "contractlab/contracts.hpp"
#include "contractlab/credible_set.hpp"
#include "contractlab/hjb.hpp"
#include "contractlab/pmh.hpp"
#include "contractlab/simulation.hpp"
#include "contractlab/svg.hpp"

namespace contractlab {

namespace {

// Flags given on the command line; they override the config file.
struct Flags {
    std::string config;
    std::string out;
    std::optional<int> j, resolution, points;
    std::optional<std::string> bank;
    std::optional<long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> u;
    std::string boundary = "upper";
    std::string policy;
    std::string events;
    bool menu = false;
};

struct Outputs {
    json summary;
    std::string csv;
    std::string svg;
    std::string events;
};

class Csv {
public:
    Csv(const json& config, std::initializer_list<const char*> cols)
    {
        s_ << "# config: " << config.dump() << "\n";
        bool first = true;
        for (const char* c : cols) {
            s_ << (first ? "" : ",") << c;
            first = false;
        }
        s_ << "\n";
    }
    Csv& row(std::initializer_list<double> xs)
    {
        bool first = true;
        for (double x : xs) {
            s_ << (first ? "" : ",") << num(x);
            first = false;
        }
        s_ << "\n";
        return *this;
    }
    std::string str() const { return s_.str(); }

private:
    std::ostringstream s_;
};

int level(const RunConfig& c, int fallback)
{
    const int j = c.run.j.value_or(fallback);
    if (j < 1 || j > c.model.I) throw DomainError("j must lie in [1, I]");
    return j;
}

Bank parse_bank(const std::string& s)
{
    if (s == "good") return Bank::good;
    if (s == "bad") return Bank::bad;
    throw DomainError("bank must be 'good' or 'bad'");
}

json estimate_json(const McEstimate& e)
{
    return {{"mean", e.mean}, {"se", e.se}, {"n", e.n}, {"seed", e.seed}};
}

// Abscissae on [a, b] with the given breakpoints inserted exactly.
std::vector<double> abscissae(double a, double b, int n, std::initializer_list<double> extra)
{
    std::vector<double> xs;
    for (int i = 0; i < n; ++i) xs.push_back(a + (b - a) * i / (n - 1));
    for (double e : extra)
        if (e > a && e < b) xs.push_back(e);
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    return xs;
}

Outputs cmd_validate(const RunConfig& c, const json& cfg)
{
    const AssumptionReport r = validate_assumptions(c.model);
    Outputs o;
    o.summary = {{"command", "validate"},
                 {"config", cfg},
                 {"cond_i", r.cond_i},
                 {"cond_ii", r.cond_ii},
                 {"cond_iii", r.cond_iii},
                 {"slack_i", r.slack_i},
                 {"slack_ii", r.slack_ii},
                 {"slack_iii", std::isinf(r.slack_iii) ? json(nullptr) : json(r.slack_iii)},
                 {"all", r.all()}};
    return o;
}

Outputs cmd_credible_set(const RunConfig& c, const json& cfg)
{
    const Model m(c.model);
    const int j = level(c, 1);
    const CredibleSet cs(m, j);
    Outputs o;
    o.summary = {{"command", "credible-set"}, {"config", cfg},     {"j", j},
                 {"c", cs.c_table()},         {"C", cs.C()},       {"b_hat", cs.b_hat()},
                 {"x_star", cs.x_star()},     {"p", cs.p()},       {"U_x_star", cs.upper(cs.x_star())},
                 {"U_b_hat", cs.upper(cs.b_hat())}};
    Csv csv(cfg, {"u_b", "lower", "upper"});
    for (double x : abscissae(cs.c1(), 3.0 * cs.b_hat(), c.run.points.value_or(400), {cs.C(), cs.x_star()}))
        csv.row({x, cs.lower(x), cs.upper(x)});
    o.csv = csv.str();
    return o;
}

Outputs cmd_figure(const RunConfig& c, const json& cfg)
{
    const Model m(c.model);
    const int j = level(c, 1);
    const CredibleSet cs(m, j);
    const double x0 = cs.c1(), x1 = 3.0 * cs.b_hat();
    const std::vector<double> xs = abscissae(x0, x1, c.run.points.value_or(400), {cs.C(), cs.x_star(), cs.b_hat()});
    SvgSeries lo{"lower boundary", {}, {}, "#d62728", false}, up{"upper boundary", {}, {}, "#1f77b4", false};
    Csv csv(cfg, {"u_b", "lower", "upper"});
    for (double x : xs) {
        lo.x.push_back(x);
        lo.y.push_back(cs.lower(x));
        up.x.push_back(x);
        up.y.push_back(cs.upper(x));
        csv.row({x, cs.lower(x), cs.upper(x)});
    }
    const std::vector<SvgMarker> marks{{x0, x0, "c(j,1)"},
                                       {cs.x_star(), cs.upper(cs.x_star()), "x*"},
                                       {cs.b_hat(), cs.upper(cs.b_hat()), "b_hat"},
                                       {cs.C(), cs.lower(cs.C()), "C(j)"}};
    Outputs o;
    o.summary = {{"command", "figure"},
                 {"config", cfg},
                 {"j", j},
                 {"left_endpoint", {x0, cs.upper(x0)}},
                 {"x_star", cs.x_star()},
                 {"U_x_star", cs.upper(cs.x_star())},
                 {"b_hat", cs.b_hat()},
                 {"U_b_hat", cs.upper(cs.b_hat())},
                 {"C", cs.C()},
                 {"L_C", cs.lower(cs.C())},
                 {"points", xs.size()}};
    o.csv = csv.str();
    o.svg = render_svg({lo, up}, marks, "Credible set with " + std::to_string(j) + " loan(s) left", "u_b", "u_g");
    return o;
}

Outputs cmd_pmh(const RunConfig& c, const json& cfg)
{
    const Model m(c.model);
    const int J = level(c, m.I());
    const auto sols = solve_pmh_all(m);
    Outputs o;
    o.summary = {{"command", "pmh"}, {"config", cfg}};
    json levels = json::array();
    Csv csv(cfg, {"j", "u", "v", "dv"});
    for (int j = 1; j <= J; ++j) {
        const PmhSolution& s = sols[j - 1];
        const PmhResidual res = pmh_residual(m, s, j > 1 ? &sols[j - 2] : nullptr);
        levels.push_back({{"j", j},
                          {"b_hat", s.b_hat},
                          {"gamma", s.gamma},
                          {"v_b_hat", s.value_at_bhat()},
                          {"v_gamma", s.value_at_gamma()},
                          {"tail_slope", s.slope(s.gamma + 1.0)},
                          {"complementarity", res.complementarity},
                          {"min_slack", res.min_slack}});
        for (std::size_t i = 0; i < s.u.size(); ++i) csv.row({double(j), s.u[i], s.v[i], s.dv[i]});
    }
    o.summary["levels"] = levels;
    o.csv = csv.str();
    return o;
}

Outputs cmd_boundary_values(const RunConfig& c, const json& cfg)
{
    const Model m(c.model);
    const int j = level(c, 1);
    const CredibleSet cs(m, j);
    const auto sols = solve_pmh_all(m);
    const PmhSolution& pmh = sols[j - 1];
    const LowerDual dual(m, j);
    const UpperConstants k = upper_constants(m, j, pmh);
    Outputs o;
    o.summary = {{"command", "boundary-values"},
                 {"config", cfg},
                 {"j", j},
                 {"junction_value", lower_junction_value(m, j)},
                 {"C", cs.C()},
                 {"b_hat", cs.b_hat()},
                 {"x_star", cs.x_star()},
                 {"gamma", pmh.gamma},
                 {"C_tilde", k.C_tilde},
                 {"C_hat", k.C_hat},
                 {"C_mid", k.C_mid}};
    if (c.run.u) {
        const double u = *c.run.u;
        json at = {{"u_b", u},
                   {"upper_good", value_upper_good(m, j, &pmh, u)},
                   {"upper_bad", value_upper_bad(m, j, &pmh, u)}};
        if (u < cs.C()) {
            const DualSolution d = dual.solve(u);
            at["lower"] = d.primal_value;
            at["nu"] = d.nu;
            at["cutoffs"] = d.cutoffs;
            at["dual_residual"] = d.residual;
        } else {
            at["lower"] = value_lower(m, j, u);
        }
        o.summary["at"] = at;
    }
    Csv csv(cfg, {"u_b", "lower", "upper", "V_lower", "V_upper_good", "V_upper_bad"});
    for (double x : abscissae(cs.c1(), 3.0 * cs.b_hat(), c.run.points.value_or(200), {cs.C(), cs.x_star()})) {
        const double vl = x < cs.C() ? dual.solve(x).primal_value : value_lower(m, j, x);
        csv.row({x, cs.lower(x), cs.upper(x), vl, value_upper_good(m, j, &pmh, x), value_upper_bad(m, j, &pmh, x)});
    }
    o.csv = csv.str();
    return o;
}

json grid_report(const GridValueFunction& g)
{
    long pay = 0;
    for (auto f : g.pay) pay += f;
    return {{"j", g.j},
            {"bank", bank_name(g.bank)},
            {"nodes", g.size()},
            {"iterations", g.iterations},
            {"scale", g.scale},
            {"residual", g.residual},
            {"relative_residual", g.residual / g.scale},
            {"min_gradient_slack", g.min_gradient_slack},
            {"boundary_row_gap", boundary_row_gap(g)},
            {"paying_nodes", pay}};
}

Outputs cmd_solve_hjb(const RunConfig& c, const json& cfg, const Flags& f)
{
    const Model m(c.model);
    const int J = level(c, m.I());
    HjbOptions opt;
    opt.nx = opt.ny = c.run.resolution.value_or(64);
    const auto pmh = solve_pmh_all(m);
    std::vector<Bank> banks;
    if (f.menu)
        banks = {Bank::good, Bank::bad};
    else
        banks = {parse_bank(c.run.bank.value_or("good"))};
    Outputs o;
    o.summary = {{"command", "solve-hjb"}, {"config", cfg}, {"resolution", opt.nx}};
    json reports = json::array();
    Csv csv(cfg, {"bank", "j", "u_b", "u_g", "V", "theta", "h1b", "h1g", "h2b", "h2g", "kb", "kg", "pay"});
    std::vector<std::vector<GridValueFunction>> solved;
    for (Bank b : banks) {
        solved.push_back(solve_hjb_levels(m, J, b, pmh, opt));
        for (const GridValueFunction& g : solved.back()) {
            reports.push_back(grid_report(g));
            for (int i = 0; i < g.nx; ++i)
                for (int k = 0; k < g.ny; ++k) {
                    const int n = g.id(i, k);
                    csv.row({double(b == Bank::good ? 0 : 1), double(g.j), g.xs[i], g.y(i, k), g.V[n], g.theta[n],
                             g.h1b[n], g.h1g[n], g.h2b[n], g.h2g[n], double(g.kb[n]), double(g.kg[n]),
                             double(g.pay[n])});
                }
        }
    }
    o.summary["levels"] = reports;
    if (f.menu) {
        const double R0g = reservation_utility(m, Bank::good).R[J];
        const double R0b = reservation_utility(m, Bank::bad).R[J];
        const MenuValue mv = optimal_menu_value(m, solved[0].back(), solved[1].back(), R0b, R0g);
        o.summary["menu"] = {{"R0_b", R0b},
                             {"R0_g", R0g},
                             {"feasible_shutdown", mv.feasible_shutdown},
                             {"v_shutdown", mv.feasible_shutdown ? json(mv.v_shutdown) : json(nullptr)},
                             {"shutdown_point", {mv.shut_ub, mv.shut_ug}},
                             {"feasible_screening", mv.feasible_screening},
                             {"v_screening", mv.feasible_screening ? json(mv.v_screening) : json(nullptr)},
                             {"screening_point", {mv.scr_ub, mv.scr_ug, mv.scr_ubc, mv.scr_ugc}}};
    }
    o.csv = csv.str();
    return o;
}

json policy_json(const PolicyPoint& p)
{
    return {{"delta", p.delta}, {"lump", p.lump}, {"theta", p.theta}, {"h1", p.h1},
            {"h2", p.h2},       {"kb", p.kb},     {"kg", p.kg}};
}

Outputs cmd_policy(const RunConfig& c, const json& cfg, const Flags& f)
{
    const Model m(c.model);
    const int j = level(c, 1);
    if (!c.run.u) throw DomainError("policy needs --u");
    const double u = *c.run.u;
    Outputs o;
    o.summary = {{"command", "policy"}, {"config", cfg}, {"j", j}, {"u_b", u}, {"boundary", f.boundary}};
    if (f.boundary == "upper") {
        const auto pmh = solve_pmh_all(m);
        o.summary["policy"] = policy_json(upper_boundary_policy(m, j, pmh[j - 1], u));
        const CredibleSet cs(m, j);
        if (u >= cs.x_star() && u < cs.b_hat()) {
            const DelayedContract d = reach_upper(m, j, u);
            o.summary["delayed_contract"] = {{"c", d.c}, {"t_star", d.t_star}};
        }
        if (u < cs.b_hat()) o.summary["t_star"] = state_step_deterministic(m, j, u).t_star;
    } else if (f.boundary == "lower") {
        o.summary["policy"] = policy_json(lower_boundary_policy(m, j, u));
        const CredibleSet cs(m, j);
        if (u < cs.C()) o.summary["cutoffs"] = solve_nu(m, j, u).cutoffs;
    } else {
        throw DomainError("boundary must be 'upper' or 'lower'");
    }
    return o;
}

Outputs cmd_reservation(const RunConfig& c, const json& cfg)
{
    const Model m(c.model);
    const ReservationUtility g = reservation_utility(m, Bank::good), b = reservation_utility(m, Bank::bad);
    Outputs o;
    auto pack = [](const ReservationUtility& r) {
        json w = json::array();
        for (std::size_t i = 1; i < r.work.size(); ++i) w.push_back(bool(r.work[i]));
        return json{{"R", std::vector<double>(r.R.begin() + 1, r.R.end())}, {"work", w}};
    };
    o.summary = {{"command", "reservation"}, {"config", cfg}, {"good", pack(g)}, {"bad", pack(b)}};
    Csv csv(cfg, {"j", "R_good", "work_good", "R_bad", "work_bad"});
    for (int j = 1; j <= m.I(); ++j)
        csv.row({double(j), g.R[j], double(g.work[j]), b.R[j], double(b.work[j])});
    o.csv = csv.str();
    return o;
}

Strategy parse_strategy(const std::string& s)
{
    for (Strategy x : kAllStrategies)
        if (s == strategy_name(x)) return x;
    throw DomainError("unknown strategy '" + s + "'");
}

struct PolicyFile {
    std::string kind;
    std::optional<int> j;
    std::optional<double> u, c, t_star, lump, theta;
    std::vector<double> cutoffs;
    std::optional<std::string> bank, strategy;
};

PolicyFile parse_policy(const json& p)
{
    if (!p.is_object()) throw DomainError("policy: expected a JSON object");
    static const std::vector<std::string> known{"kind",   "j",    "u",    "c",    "t_star",
                                                "lump",   "theta", "cutoffs", "bank", "strategy"};
    for (auto it = p.begin(); it != p.end(); ++it)
        if (std::find(known.begin(), known.end(), it.key()) == known.end())
            throw DomainError("policy: unknown key '" + it.key() + "'");
    PolicyFile f;
    if (!p.contains("kind") || !p.at("kind").is_string()) throw DomainError("policy.kind: expected a string");
    f.kind = p.at("kind").get<std::string>();
    if (p.contains("j")) {
        if (!p.at("j").is_number_integer()) throw DomainError("policy.j: expected an integer");
        f.j = p.at("j").get<int>();
    }
    auto number = [&](const char* key, std::optional<double>& dst) {
        if (!p.contains(key)) return;
        if (!p.at(key).is_number()) throw DomainError(std::string("policy.") + key + ": expected a number");
        dst = p.at(key).get<double>();
    };
    number("u", f.u);
    number("c", f.c);
    number("t_star", f.t_star);
    number("lump", f.lump);
    number("theta", f.theta);
    if (p.contains("cutoffs")) {
        if (!p.at("cutoffs").is_array()) throw DomainError("policy.cutoffs: expected an array");
        for (const json& v : p.at("cutoffs")) {
            if (!v.is_number()) throw DomainError("policy.cutoffs: expected numbers");
            f.cutoffs.push_back(v.get<double>());
        }
    }
    for (auto [key, dst] : {std::pair{"bank", &f.bank}, {"strategy", &f.strategy}})
        if (p.contains(key)) {
            if (!p.at(key).is_string()) throw DomainError(std::string("policy.") + key + ": expected a string");
            *dst = p.at(key).get<std::string>();
        }
    return f;
}

Outputs cmd_simulate(const RunConfig& c, const json& cfg, const Flags& f)
{
    if (f.policy.empty()) throw DomainError("simulate needs --policy");
    const Model m(c.model);
    const PolicyFile pf = parse_policy(read_json_file(f.policy));
    const int j = pf.j.value_or(c.run.j.value_or(1));
    if (j < 1 || j > m.I()) throw DomainError("policy.j must lie in [1, I]");
    auto need = [](const std::optional<double>& v, const char* key) {
        if (!v) throw DomainError(std::string("policy.") + key + " is required for this kind");
        return *v;
    };
    std::vector<PmhSolution> pmh;
    std::unique_ptr<Contract> contract;
    if (pf.kind == "upper") {
        pmh = solve_pmh_all(m);
        contract = std::make_unique<UpperContract>(m, pmh, j, need(pf.u, "u"));
    } else if (pf.kind == "lower") {
        contract = std::make_unique<LowerContract>(m, j, need(pf.u, "u"));
    } else if (pf.kind == "cutoff") {
        std::vector<double> cut = pf.cutoffs;
        if (cut.empty()) cut = solve_nu(m, j, need(pf.u, "u")).cutoffs;
        contract = std::make_unique<CutoffContract>(m, j, cut);
    } else if (pf.kind == "short_term") {
        contract = std::make_unique<ShortTermContract>(m, j, pf.c.value_or(0.0), pf.t_star.value_or(0.0),
                                                       pf.lump.value_or(0.0), pf.theta.value_or(0.0));
    } else {
        throw DomainError("policy.kind must be one of upper, lower, cutoff, short_term");
    }
    const Bank bank = parse_bank(pf.bank.value_or(c.run.bank.value_or("bad")));
    const long n = c.run.paths.value_or(10000);
    const std::uint64_t seed = c.run.seed.value_or(1);
    if (n < 100) throw DomainError("at least 100 paths are required");
    Outputs o;
    o.summary = {{"command", "simulate"}, {"config", cfg}, {"policy", read_json_file(f.policy)},
                 {"bank", bank_name(bank)}};
    const std::string strat = pf.strategy.value_or("best_response");
    if (strat == "best_response") {
        const InvestorEstimate e = estimate_investor_value(m, *contract, bank, n, seed);
        o.summary["response"] = strategy_name(e.response);
        o.summary["bank_value"] = estimate_json(e.bank);
        o.summary["investor_value"] = estimate_json(e.investor);
    } else {
        const Strategy s = parse_strategy(strat);
        const auto paths = simulate_many(m, *contract, bank, s, n, seed);
        std::vector<double> bv(n), iv(n);
        for (long i = 0; i < n; ++i) {
            bv[i] = paths[i].bank_value;
            iv[i] = paths[i].investor_value;
        }
        o.summary["response"] = strategy_name(s);
        o.summary["bank_value"] = estimate_json(summarize(bv, seed));
        o.summary["investor_value"] = estimate_json(summarize(iv, seed));
    }
    if (!f.events.empty()) {
        SimOptions opt;
        opt.log_events = true;
        const Strategy s = strat == "best_response" ? parse_strategy(o.summary["response"].get<std::string>())
                                                    : parse_strategy(strat);
        const SimPath path = simulate_path(m, *contract, bank, s, seed, 0, opt);
        std::ostringstream ev;
        ev << "# config: " << cfg.dump() << "\n" << "time,event,pool,state\n";
        for (const SimEvent& e : path.events)
            ev << num(e.time) << "," << event_name(e.type) << "," << e.pool << "," << num(e.state) << "\n";
        o.events = ev.str();
    }
    return o;
}

void add_common(CLI::App* sub, Flags& f)
{
    sub->add_option("--config", f.config, "JSON config (model object or {model, run, output})");
    sub->add_option("--out", f.out, "output prefix for .json/.csv/.svg files");
}

std::unique_ptr<tbb::global_control> thread_cap()
{
    const char* env = std::getenv("CONTRACTLAB_THREADS");
    if (env == nullptr || *env == '\0') return nullptr;
    char* end = nullptr;
    const long n = std::strtol(env, &end, 10);
    if (*end != '\0' || n < 1) throw DomainError("CONTRACTLAB_THREADS must be a positive integer");
    return std::make_unique<tbb::global_control>(tbb::global_control::max_allowed_parallelism,
                                                 static_cast<std::size_t>(n));
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Securitisation contract laboratory", "contractlab"};
    app.require_subcommand(1);
    Flags f;
    const std::vector<std::string> names{"validate", "credible-set", "pmh",      "boundary-values", "solve-hjb",
                                         "policy",   "reservation",  "simulate", "figure"};
    std::map<std::string, CLI::App*> sub;
    sub["validate"] = app.add_subcommand("validate", "check structure and the three standing assumptions");
    sub["credible-set"] = app.add_subcommand("credible-set", "credible-set geometry for j loans left");
    sub["pmh"] = app.add_subcommand("pmh", "pure moral hazard investor values and payment boundaries");
    sub["boundary-values"] = app.add_subcommand("boundary-values", "investor values on both boundaries");
    sub["solve-hjb"] = app.add_subcommand("solve-hjb", "interior value functions on a boundary-fitted grid");
    sub["policy"] = app.add_subcommand("policy", "optimal boundary contract controls at a state");
    sub["reservation"] = app.add_subcommand("reservation", "reservation utilities for both bank types");
    sub["simulate"] = app.add_subcommand("simulate", "Monte Carlo values of a contract policy");
    sub["figure"] = app.add_subcommand("figure", "credible-set region data and plot");
    for (const auto& n : names) add_common(sub[n], f);
    for (const char* n : {"credible-set", "pmh", "boundary-values", "solve-hjb", "policy", "figure"})
        sub[n]->add_option("--j", f.j, "loans left (levels 1..j for pmh and solve-hjb)");
    for (const char* n : {"credible-set", "boundary-values", "figure"})
        sub[n]->add_option("--points", f.points, "number of sample abscissae");
    sub["boundary-values"]->add_option("--u", f.u, "also report values at this bad-bank state");
    sub["solve-hjb"]->add_option("--bank", f.bank, "good or bad");
    sub["solve-hjb"]->add_option("--resolution", f.resolution, "grid nodes per axis");
    sub["solve-hjb"]->add_flag("--menu", f.menu, "solve both systems and report optimal menu values");
    sub["policy"]->add_option("--u", f.u, "bad-bank state");
    sub["policy"]->add_option("--side,--boundary", f.boundary, "upper or lower")->check(CLI::IsMember({"upper", "lower"}));
    sub["simulate"]->add_option("--policy", f.policy, "contract policy JSON")->required();
    sub["simulate"]->add_option("--paths", f.paths, "number of paths");
    sub["simulate"]->add_option("--seed", f.seed, "master seed");
    sub["simulate"]->add_option("--events", f.events, "event log CSV of the first path");

    std::vector<const char*> argv{"contractlab"};
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, err, err);
        err << app.help();
        return kExitUsage;
    }

    try {
        const auto cap = thread_cap();
        RunConfig c;
        if (!f.config.empty()) c = config_from_json(read_json_file(f.config));
        if (!f.out.empty()) c.out = f.out;
        if (f.j) c.run.j = f.j;
        if (f.bank) c.run.bank = f.bank;
        if (f.resolution) c.run.resolution = f.resolution;
        if (f.paths) c.run.paths = f.paths;
        if (f.seed) c.run.seed = f.seed;
        if (f.u) c.run.u = f.u;
        if (f.points) c.run.points = f.points;
        check_structure(c.model);
        if (c.run.points && *c.run.points < 2) throw DomainError("points must be at least 2");
        const json cfg = config_to_json(c);

        Outputs o;
        if (sub["validate"]->parsed()) o = cmd_validate(c, cfg);
        else if (sub["credible-set"]->parsed()) o = cmd_credible_set(c, cfg);
        else if (sub["pmh"]->parsed()) o = cmd_pmh(c, cfg);
        else if (sub["boundary-values"]->parsed()) o = cmd_boundary_values(c, cfg);
        else if (sub["solve-hjb"]->parsed()) o = cmd_solve_hjb(c, cfg, f);
        else if (sub["policy"]->parsed()) o = cmd_policy(c, cfg, f);
        else if (sub["reservation"]->parsed()) o = cmd_reservation(c, cfg);
        else if (sub["simulate"]->parsed()) o = cmd_simulate(c, cfg, f);
        else o = cmd_figure(c, cfg);

        // Everything is computed before the first file is touched.
        if (!c.out.empty()) {
            write_atomic(c.out + ".json", o.summary.dump(2) + "\n");
            if (!o.csv.empty()) write_atomic(c.out + ".csv", o.csv);
            if (!o.svg.empty()) write_atomic(c.out + ".svg", o.svg);
        }
        if (!o.events.empty()) write_atomic(f.events, o.events);
        out << o.summary.dump(2) << "\n";
        return kExitOk;
    } catch (const SolverError& e) {
        err << "error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitDomain;
    }
}

int run_cli(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace contractlab
