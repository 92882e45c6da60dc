#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include "commands.hpp"
#include "config.hpp"
#include "relsim/errors.hpp"

using namespace relsim;
using namespace relsim::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Scratch {
    fs::path dir;
    Scratch()
    {
        static int counter = 0;
        dir = fs::temp_directory_path() / ("relsim_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    fs::path write(const std::string& name, const std::string& text) const
    {
        const fs::path p = dir / name;
        std::ofstream(p) << text;
        return p;
    }
};

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

const char* const two_body = R"({
  "constants": {"c": 20.0, "K": 1.0},
  "integrator": {"dt": 0.001, "t_end": 0.5, "output_stride": 10},
  "particles": [
    {"label": "a", "m": 1.0, "q": 1.0, "pos": [0.5, 0.0, 0.0], "vel": [0.0, -0.6, 0.0]},
    {"label": "b", "m": 1.0, "q": -1.0, "pos": [-0.5, 0.0, 0.0], "vel": [0.0, 0.6, 0.0]}
  ]
})";

std::string config_error(const std::string& text)
{
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

struct Captured {
    std::ostringstream out;
    std::ostringstream err;
    Io io() { return {out, err}; }
};

} // namespace

TEST_CASE("a valid two-body configuration parses")
{
    const RunConfig cfg = parse_config_text(two_body);
    CHECK(cfg.scenario == ScenarioKind::trajectory);
    REQUIRE(cfg.particles.size() == 2);
    CHECK(cfg.particles[1].label == "b");
    CHECK(cfg.sim.coupling.c == 20.0);
    CHECK(cfg.sim.coupling.sign == SignConvention::coulomb_consistent);
    CHECK(cfg.sim.output_stride == 10);
}

TEST_CASE("unknown keys are rejected with their path")
{
    json doc = json::parse(two_body);
    doc["particles"][0]["spin"] = 1;
    CHECK(config_error(doc.dump()).find("particles[0].spin") != std::string::npos);
    doc = json::parse(two_body);
    doc["extra"] = true;
    CHECK(config_error(doc.dump()).find("extra") != std::string::npos);
}

TEST_CASE("superluminal velocities are rejected with their path")
{
    json doc = json::parse(two_body);
    doc["particles"][1]["vel"] = {0.0, 20.0, 0.0};
    CHECK(config_error(doc.dump()).find("particles[1].vel") != std::string::npos);
}

TEST_CASE("physical invariants are checked on load")
{
    json doc = json::parse(two_body);
    doc["particles"][0]["m"] = 0.0;
    CHECK(config_error(doc.dump()).find("particles[0].m") != std::string::npos);
    doc = json::parse(two_body);
    doc["particles"][1]["label"] = "a";
    CHECK_FALSE(config_error(doc.dump()).empty());
    doc = json::parse(two_body);
    doc["integrator"]["dt"] = -1.0;
    CHECK(config_error(doc.dump()).find("integrator.dt") != std::string::npos);
}

TEST_CASE("malformed json reports a line and column")
{
    const std::string msg = config_error("{\n  \"constants\": {\"c\": 1,,}\n}");
    CHECK(msg.find("line 2") != std::string::npos);
}

TEST_CASE("presets fill constants and may be overridden")
{
    const RunConfig em = parse_config_text(R"({"preset": "em_gaussian", "integrator": {"dt": 0.1, "t_end": 1},
        "particles": [{"m": 1, "q": 1, "pos": [0, 0, 0]}]})");
    CHECK(em.sim.coupling.K == 1.0);
    CHECK(em.sim.coupling.c == 2.99792458e10);
    CHECK(em.particles[0].label == "p0");

    const RunConfig grav = parse_config_text(R"({"preset": "gravity_si", "integrator": {"dt": 0.1, "t_end": 1},
        "particles": [{"m": 5.0, "pos": [0, 0, 0]}]})");
    CHECK(grav.sim.coupling.K == -constants::G);
    CHECK(grav.sim.coupling.c == constants::c_si);
    CHECK(grav.particles[0].q == 5.0);
    CHECK_FALSE(config_error(R"({"preset": "gravity_si", "integrator": {"dt": 0.1, "t_end": 1},
        "particles": [{"m": 5.0, "q": 2.0, "pos": [0, 0, 0]}]})").empty());

    const RunConfig fast = parse_config_text(R"({"preset": "em_gaussian", "constants": {"c": 3.0}, "integrator": {"dt": 0.1, "t_end": 1},
        "particles": [{"m": 1, "q": 1, "pos": [0, 0, 0]}]})");
    CHECK(fast.sim.coupling.c == 3.0);
}

TEST_CASE("dumped configuration re-parses to the same run")
{
    const RunConfig a = parse_config_text(two_body);
    const json dumped = to_json(a);
    const RunConfig b = parse_config(dumped);
    CHECK(to_json(b) == dumped);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(a.initial.particles[k].u.y == b.initial.particles[k].u.y);
    }
}

TEST_CASE("scenario configurations reject trajectory sections")
{
    const RunConfig m = parse_config_text(R"({"scenario": {"name": "mercury", "orbits": 12, "amplify": 1e4}})");
    CHECK(m.scenario == ScenarioKind::mercury);
    CHECK(m.mercury.orbits == 12);
    CHECK_FALSE(config_error(R"({"scenario": "mercury", "integrator": {"dt": 1}})").empty());
}

TEST_CASE("doubles are written with 17 significant digits")
{
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(1.0 / 3.0) == "0.33333333333333331");
    TrajectoryRow row;
    row.t = 0.5;
    row.pos = {1, 2, 3};
    row.vel = {0.25, 0, -0.25};
    row.gamma = 1.0;
    CHECK(csv_row(row, "x") == "0.5,x,1,2,3,0.25,0,-0.25,1\n");
}

TEST_CASE("thread cap from the environment")
{
    CHECK(check_threads("1") == 1u);
    CHECK(check_threads(nullptr) >= 1u);
    CHECK(check_threads("2") <= 2u);
    CHECK_THROWS_AS(check_threads("zero"), ConfigError);
    CHECK_THROWS_AS(check_threads("0"), ConfigError);
}

TEST_CASE("run writes the trajectory and summary")
{
    Scratch s;
    const fs::path cfg = s.write("two.json", two_body);
    Captured cap;
    REQUIRE(cmd_run({cfg, s.dir / "out", false}, cap.io()) == exit_ok);
    const std::string csv = slurp(s.dir / "out" / "trajectory.csv");
    CHECK(csv.rfind(csv_header, 0) == 0);
    // 500 steps at stride 10 plus the initial row, two particles
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 51);
    const json summary = json::parse(slurp(s.dir / "out" / "summary.json"));
    CHECK(summary["status"] == "ok");
    CHECK(summary["max_norm_residual"].get<double>() <= 1e-12);
}

TEST_CASE("collision run exits with a numerical failure and records its time")
{
    Scratch s;
    const fs::path cfg = s.write("c.json", R"({
      "constants": {"c": 10.0, "K": 1.0},
      "integrator": {"dt": 0.001, "t_end": 5.0, "output_stride": 100},
      "particles": [
        {"label": "a", "m": 1.0, "q": 1.0, "pos": [-0.5, 0.0, 0.0]},
        {"label": "b", "m": 1.0, "q": -1.0, "pos": [0.5, 0.0, 0.0]}
      ]})");
    Captured cap;
    CHECK(cmd_run({cfg, s.dir / "out", false}, cap.io()) == exit_numerical);
    const json summary = json::parse(slurp(s.dir / "out" / "summary.json"));
    CHECK(summary["status"] == "failed");
    CHECK(summary["failure"]["cause"] == "singular_field");
    CHECK(summary["failure"]["time"].get<double>() > 0.7);
}

TEST_CASE("configuration problems exit with a usage error")
{
    Scratch s;
    Captured cap;
    CHECK(cmd_run({s.dir / "missing.json", std::nullopt, false}, cap.io()) == exit_usage);
    const fs::path bad = s.write("bad.json", R"({"constants": {"c": 1, "K": 1}, "integrator": {"dt": 0.1, "t_end": 1},
        "particles": [{"m": 1, "pos": [0, 0, 0], "vel": [2, 0, 0]}]})");
    CHECK(cmd_run({bad, s.dir / "out", false}, cap.io()) == exit_usage);
    CHECK(cap.err.str().find("particles[0].vel") != std::string::npos);
}

TEST_CASE("check suites pass and the negative control fails")
{
    Captured cap;
    CHECK(cmd_check({"gauge", 7, 0, false, 2}, cap.io()) == exit_ok);
    CHECK(cmd_check({"oracle", 7, 0, false, 2}, cap.io()) == exit_ok);
    CHECK(cmd_check({"oracle", 7, 0, true, 2}, cap.io()) == exit_property);
    CHECK(cmd_check({"nonsense", 7, 0, false, 2}, cap.io()) == exit_usage);
}

TEST_CASE("mercury with too few orbits is a usage error")
{
    MercuryConfig cfg;
    cfg.orbit.amplify = 1e4;
    cfg.orbits = 3;
    Captured cap;
    CHECK(cmd_mercury(cfg, cap.io()) == exit_usage);
}

TEST_CASE("mercury prints a report with the reference comparison")
{
    MercuryConfig cfg;
    cfg.orbit.amplify = 1e4;
    cfg.extrapolate = true;
    Captured cap;
    REQUIRE(cmd_mercury(cfg, cap.io()) == exit_ok);
    const json rep = json::parse(cap.out.str());
    CHECK(rep.contains("paper_comparison"));
    CHECK(rep["relative_error_vs_analytic"].get<double>() <= 0.01);
}

TEST_CASE("probe reports the static potential under both conventions")
{
    Scratch s;
    json doc = {{"constants", {{"c", 1.0}, {"K", 1.0}, {"sign_convention", "paper_literal"}}},
                {"integrator", {{"dt", 0.01}, {"t_end", 0.0}}},
                {"particles", {{{"label", "sun"}, {"m", 1.0}, {"q", 1.0}, {"pos", {0, 0, 0}}, {"motion", "prescribed"}}}}};
    const fs::path lit = s.write("lit.json", doc.dump());
    doc["constants"]["sign_convention"] = "coulomb_consistent";
    const fs::path cons = s.write("cons.json", doc.dump());

    for (const auto& [path, sign] : {std::pair{lit, 1.0}, std::pair{cons, -1.0}}) {
        Captured cap;
        REQUIRE(cmd_probe({path, {0.0, 1.0, 0.0, 0.0}, "sun"}, cap.io()) == exit_ok);
        const json out = json::parse(cap.out.str());
        CHECK(out["A_lower"][0].get<double>() == sign);
        CHECK(out["A_lower"][1].get<double>() == 0.0);
        CHECK(out["retarded_time"].get<double>() == -1.0);
    }
    Captured cap;
    CHECK(cmd_probe({lit, {0.0, 1.0, 0.0, 0.0}, "moon"}, cap.io()) == exit_usage);
    CHECK(cmd_probe({lit, {0.0, 0.0, 0.0, 0.0}, "sun"}, cap.io()) == exit_numerical);
}

TEST_CASE("probe before the recorded history exits with a numerical failure")
{
    Scratch s;
    // a lone source needs no retarded field of its own, so the run itself
    // does not reach before the start
    json doc = json::parse(two_body);
    doc["integrator"]["prehistory"] = "none";
    doc["particles"].erase(1);
    const fs::path cfg = s.write("p.json", doc.dump());
    Captured cap;
    CHECK(cmd_probe({cfg, {0.1, 5.0, 0.0, 0.0}, "a"}, cap.io()) == exit_numerical);
    CHECK(cmd_probe({cfg, {5.0, 1.0, 0.0, 0.0}, "a"}, cap.io()) == exit_numerical);
    CHECK(cmd_probe({cfg, {0.45, 3.0, 0.0, 0.0}, "a"}, cap.io()) == exit_ok);
}

TEST_CASE("the binary is deterministic")
{
    Scratch s;
    const fs::path cfg = s.write("two.json", two_body);
    const std::string bin = SIM_BINARY;
    for (const char* run : {"r1", "r2"}) {
        const std::string cmd = "\"" + bin + "\" run --config \"" + cfg.string() + "\" --out \""
                                + (s.dir / run).string() + "\" > /dev/null";
        REQUIRE(std::system(cmd.c_str()) == 0);
    }
    const std::string a = slurp(s.dir / "r1" / "trajectory.csv");
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(s.dir / "r2" / "trajectory.csv"));
}

TEST_CASE("binary exit codes follow the contract")
{
    const std::string bin = SIM_BINARY;
    auto code = [&](const std::string& args) {
        const int status = std::system(("\"" + bin + "\" " + args + " > /dev/null 2>&1").c_str());
        return WEXITSTATUS(status);
    };
    CHECK(code("check gauge --seed 7") == 0);
    CHECK(code("check covariance --seed 7 --corrupt-sign") == 3);
    CHECK(code("mercury --orbits 3 --amplify 10000") == 1);
    CHECK(code("frobnicate") == 1);
}
