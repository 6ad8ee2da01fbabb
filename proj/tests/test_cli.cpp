#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "contractlab/cli.hpp"
#include "contractlab/config.hpp"
#include "contractlab/credible_set.hpp"

using namespace contractlab;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code = 0;
    std::string out, err;
};

Run run(const std::vector<std::string>& args)
{
    std::ostringstream o, e;
    Run r;
    r.code = run_cli(args, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

// Fresh scratch directory per test case.
struct Scratch {
    fs::path dir;
    Scratch()
    {
        dir = fs::temp_directory_path() / ("contractlab_cli_" + std::to_string(std::rand()));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string file(const std::string& name, const std::string& content) const
    {
        const fs::path p = dir / name;
        std::ofstream(p) << content;
        return p.string();
    }
    std::string path(const std::string& name) const { return (dir / name).string(); }
};

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const char* kFig1 = R"({"I": 1, "mu": 0.1, "B": 0.002, "eps": 0.25, "r": 0.02, "alpha": [0.055],
                        "rho_g": 2.0, "rho_b": 1.0, "p_g": 0.5, "p_b": 0.5})";

} // namespace

TEST_CASE("validate reports the three conditions")
{
    Scratch s;
    const Run r = run({"validate", "--config", s.file("m.json", kFig1)});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    CHECK(j.at("command") == "validate");
    for (const char* k : {"cond_i", "cond_ii", "cond_iii", "all"}) CHECK(j.contains(k));
}

TEST_CASE("figure for one loan carries the closed-form kinks")
{
    Scratch s;
    const std::string prefix = s.path("fig");
    const Run r = run({"figure", "--j", "1", "--config", s.file("m.json", kFig1), "--out", prefix});
    REQUIRE(r.code == kExitOk);
    const json j = json::parse(r.out);
    const Model m(ModelParams{});
    const CredibleSet cs(m, 1);
    CHECK(j.at("left_endpoint")[0].get<double>() == doctest::Approx(0.0225352).epsilon(1e-6));
    CHECK(j.at("left_endpoint")[1].get<double>() == doctest::Approx(0.0225352).epsilon(1e-6));
    CHECK(j.at("b_hat").get<double>() == doctest::Approx(0.1454545).epsilon(1e-6));
    CHECK(j.at("U_b_hat").get<double>() == doctest::Approx(0.2909091).epsilon(1e-6));
    CHECK(j.at("C").get<double>() == doctest::Approx(0.0225352).epsilon(1e-6));
    CHECK(j.at("x_star").get<double>() == cs.x_star());
    CHECK(j.at("U_x_star").get<double>() == cs.upper(cs.x_star()));
    CHECK(fs::exists(prefix + ".json"));
    CHECK(fs::exists(prefix + ".csv"));
    CHECK(fs::exists(prefix + ".svg"));
    // The CSV echoes the effective config before the header.
    const std::string csv = slurp(prefix + ".csv");
    CHECK(csv.rfind("# config: ", 0) == 0);
    CHECK(csv.find("u_b,lower,upper") != std::string::npos);
}

TEST_CASE("malformed policy file leaves no outputs")
{
    Scratch s;
    const std::string prefix = s.path("sim");
    for (const char* bad : {"{not json", R"({"kind": "upper", "u": "x"})", R"({"kind": "warp"})",
                            R"({"kind": "upper", "u": 0.2, "extra": 1})"}) {
        const std::string policy = s.file("p.json", bad);
        const Run r = run({"simulate", "--config", s.file("m.json", kFig1), "--policy", policy, "--out", prefix,
                           "--paths", "200", "--events", s.path("ev.csv")});
        CHECK(r.code == kExitDomain);
        CHECK(!fs::exists(prefix + ".json"));
        CHECK(!fs::exists(prefix + ".csv"));
        CHECK(!fs::exists(s.path("ev.csv")));
    }
}

TEST_CASE("usage errors and domain errors")
{
    Scratch s;
    CHECK(run({"validate", "--bogus"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"policy", "--side", "sideways"}).code == kExitUsage);
    CHECK(run({"figure", "--j", "0"}).code == kExitDomain);
    CHECK(run({"validate", "--config", s.file("bad.json", R"({"rho_g": 0.5})")}).code == kExitDomain);
    CHECK(run({"validate", "--config", s.file("unk.json", R"({"gamma": 1})")}).code == kExitDomain);
    CHECK(run({"validate", "--config", s.path("missing.json")}).code == kExitDomain);
}

TEST_CASE("policy and reservation subcommands")
{
    Scratch s;
    const Run up = run({"policy", "--side", "upper", "--j", "1", "--u", "0.1"});
    REQUIRE(up.code == kExitOk);
    const Run lo = run({"policy", "--boundary", "lower", "--j", "1", "--u", "0.1"});
    REQUIRE(lo.code == kExitOk);
    const Run res = run({"reservation"});
    REQUIRE(res.code == kExitOk);
    CHECK(json::parse(res.out).at("command") == "reservation");
}

TEST_CASE("same config and seed give byte-identical outputs")
{
    Scratch s;
    const std::string cfg = s.file("m.json", kFig1);
    const std::string policy = s.file("p.json", R"({"kind": "upper", "u": 0.1, "bank": "bad"})");
    std::string first_json, first_csv;
    for (int rep = 0; rep < 2; ++rep) {
        const std::string prefix = s.path("run");
        const Run r = run({"simulate", "--config", cfg, "--policy", policy, "--paths", "500", "--seed", "7", "--out",
                           prefix, "--events", prefix + "_ev.csv"});
        REQUIRE(r.code == kExitOk);
        const std::string js = slurp(prefix + ".json"), ev = slurp(prefix + "_ev.csv");
        if (rep == 0) {
            first_json = js;
            first_csv = ev;
        } else {
            CHECK(js == first_json);
            CHECK(ev == first_csv);
        }
    }
    // The effective config, output prefix included, is echoed, so reruns share the prefix.
    std::string csv, svg;
    for (int rep = 0; rep < 2; ++rep) {
        REQUIRE(run({"figure", "--config", cfg, "--out", s.path("fig")}).code == kExitOk);
        if (rep == 0) {
            csv = slurp(s.path("fig.csv"));
            svg = slurp(s.path("fig.svg"));
        } else {
            CHECK(slurp(s.path("fig.csv")) == csv);
            CHECK(slurp(s.path("fig.svg")) == svg);
        }
    }
}

TEST_CASE("thread cap from the environment")
{
    setenv("CONTRACTLAB_THREADS", "zero", 1);
    CHECK(run({"validate"}).code == kExitDomain);
    setenv("CONTRACTLAB_THREADS", "1", 1);
    CHECK(run({"validate"}).code == kExitOk);
    unsetenv("CONTRACTLAB_THREADS");
}

TEST_CASE("full precision numbers round-trip")
{
    for (double x : {0.1, 1.0 / 3.0, 0.07666064267940474, 1e-300, 12345.678901234567})
        CHECK(std::stod(num(x)) == x);
}
