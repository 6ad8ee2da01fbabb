#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "contractlab/model.hpp"

namespace contractlab {

using json = nlohmann::ordered_json;

// Strict schema: every key must be known; missing keys keep their defaults.
ModelParams params_from_json(const json& j);
json params_to_json(const ModelParams& p);

// Subcommand parameters; unset fields fall back to per-command defaults.
struct RunParams {
    std::optional<int> j;
    std::optional<std::string> bank;
    std::optional<int> resolution;
    std::optional<long> paths;
    std::optional<std::uint64_t> seed;
    std::optional<double> u;
    std::optional<int> points;
};

struct RunConfig {
    ModelParams model;
    RunParams run;
    std::string out;  // output prefix; empty means stdout only
};

// Accepts either a bare model object or {"model": ..., "run": ..., "output": ...}.
RunConfig config_from_json(const json& j);
json config_to_json(const RunConfig& c);
json read_json_file(const std::string& path);

// Writes to a sibling temporary file and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

// Shortest decimal form that parses back to the same double, at most 17 significant digits.
std::string num(double x);

} // namespace contractlab
