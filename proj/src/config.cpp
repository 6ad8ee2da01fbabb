#include "contractlab/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace contractlab {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* where)
{
    if (!j.is_object()) throw DomainError(std::string(where) + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!known.count(it.key())) throw DomainError(std::string(where) + ": unknown key '" + it.key() + "'");
}

double get_number(const json& j, const char* key)
{
    const json& v = j.at(key);
    if (!v.is_number()) throw DomainError(std::string("model.") + key + ": expected a number");
    return v.get<double>();
}

template <class T>
T get_integer(const json& v, const std::string& key)
{
    if (!v.is_number_integer()) throw DomainError(key + ": expected an integer");
    if (v.is_number_unsigned()) return static_cast<T>(v.get<std::uint64_t>());
    const long long x = v.get<long long>();
    if (x < 0) throw DomainError(key + ": expected a non-negative integer");
    return static_cast<T>(x);
}

} // namespace

ModelParams params_from_json(const json& j)
{
    reject_unknown(j, {"I", "mu", "B", "eps", "r", "alpha", "rho_g", "rho_b", "p_g", "p_b"}, "model");
    ModelParams p;
    if (j.contains("I")) p.I = get_integer<int>(j.at("I"), "model.I");
    for (auto [key, field] : {std::pair{"mu", &p.mu}, {"B", &p.B}, {"eps", &p.eps}, {"r", &p.r},
                              {"rho_g", &p.rho_g}, {"rho_b", &p.rho_b}, {"p_g", &p.p_g}, {"p_b", &p.p_b}})
        if (j.contains(key)) *field = get_number(j, key);
    if (j.contains("alpha")) {
        const json& a = j.at("alpha");
        if (!a.is_array()) throw DomainError("model.alpha: expected an array");
        p.alpha.clear();
        for (const json& v : a) {
            if (!v.is_number()) throw DomainError("model.alpha: expected numbers");
            p.alpha.push_back(v.get<double>());
        }
    }
    // A single pool size given with the default single rate: repeat it.
    if (j.contains("I") && !j.contains("alpha")) p.alpha.assign(p.I, p.alpha.front());
    check_structure(p);
    return p;
}

json params_to_json(const ModelParams& p)
{
    json j;
    j["I"] = p.I;
    j["mu"] = p.mu;
    j["B"] = p.B;
    j["eps"] = p.eps;
    j["r"] = p.r;
    j["alpha"] = p.alpha;
    j["rho_g"] = p.rho_g;
    j["rho_b"] = p.rho_b;
    j["p_g"] = p.p_g;
    j["p_b"] = p.p_b;
    return j;
}

RunConfig config_from_json(const json& j)
{
    RunConfig c;
    if (!j.is_object()) throw DomainError("config: expected a JSON object");
    if (!j.contains("model")) {
        c.model = params_from_json(j);
        return c;
    }
    reject_unknown(j, {"model", "run", "output"}, "config");
    c.model = params_from_json(j.at("model"));
    if (j.contains("run")) {
        const json& r = j.at("run");
        reject_unknown(r, {"j", "bank", "resolution", "paths", "seed", "u", "points"}, "run");
        if (r.contains("j")) c.run.j = get_integer<int>(r.at("j"), "run.j");
        if (r.contains("bank")) {
            if (!r.at("bank").is_string()) throw DomainError("run.bank: expected a string");
            c.run.bank = r.at("bank").get<std::string>();
        }
        if (r.contains("resolution")) c.run.resolution = get_integer<int>(r.at("resolution"), "run.resolution");
        if (r.contains("paths")) c.run.paths = get_integer<long>(r.at("paths"), "run.paths");
        if (r.contains("seed")) c.run.seed = get_integer<std::uint64_t>(r.at("seed"), "run.seed");
        if (r.contains("points")) c.run.points = get_integer<int>(r.at("points"), "run.points");
        if (r.contains("u")) {
            if (!r.at("u").is_number()) throw DomainError("run.u: expected a number");
            c.run.u = r.at("u").get<double>();
        }
    }
    if (j.contains("output")) {
        const json& o = j.at("output");
        reject_unknown(o, {"prefix"}, "output");
        if (!o.at("prefix").is_string()) throw DomainError("output.prefix: expected a string");
        c.out = o.at("prefix").get<std::string>();
    }
    return c;
}

json config_to_json(const RunConfig& c)
{
    json j;
    j["model"] = params_to_json(c.model);
    json r = json::object();
    if (c.run.j) r["j"] = *c.run.j;
    if (c.run.bank) r["bank"] = *c.run.bank;
    if (c.run.resolution) r["resolution"] = *c.run.resolution;
    if (c.run.paths) r["paths"] = *c.run.paths;
    if (c.run.seed) r["seed"] = *c.run.seed;
    if (c.run.u) r["u"] = *c.run.u;
    if (c.run.points) r["points"] = *c.run.points;
    j["run"] = r;
    if (!c.out.empty()) j["output"] = {{"prefix", c.out}};
    return j;
}

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return json::parse(ss.str());
    } catch (const json::exception& e) {
        throw DomainError(path + ": " + e.what());
    }
}

void write_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DomainError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw DomainError("write failed for " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp);
        throw DomainError("cannot rename into " + path + ": " + ec.message());
    }
}

std::string num(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

} // namespace contractlab
