#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include <json.hpp>

#include "config.hpp"
#include "relsim/scenarios.hpp"
#include "relsim/suites.hpp"

namespace relsim::cli {

enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,     ///< configuration, usage or insufficient data
    exit_numerical = 2, ///< singular field, non-convergence, history exhausted
    exit_property = 3,  ///< a property suite failed
};

struct Io {
    std::ostream& out;
    std::ostream& err;
};

struct RunOptions {
    std::filesystem::path config;
    std::optional<std::filesystem::path> out_dir;
    bool dump_config = false;
};

struct CheckOptions {
    std::string which;
    std::uint64_t seed = 1;
    std::size_t cases = 0;
    bool corrupt_sign = false;
    unsigned threads = 1;
};

struct ProbeOptions {
    std::filesystem::path config;
    std::array<double, 4> event{}; ///< t, x, y, z
    std::string source;
};

int cmd_run(const RunOptions& opt, Io io);
int cmd_check(const CheckOptions& opt, Io io);
int cmd_mercury(const MercuryConfig& cfg, Io io);
int cmd_probe(const ProbeOptions& opt, Io io);

/// Worker count for the check suites: hardware concurrency, capped by the
/// SIM_THREADS value when given. Throws ConfigError for a malformed value.
unsigned check_threads(const char* sim_threads);

/// Shortest-free, locale-independent 17-significant-digit rendering.
std::string format_double(double v);

inline constexpr const char* csv_header = "t,label,x,y,z,vx,vy,vz,gamma\n";
std::string csv_row(const TrajectoryRow& row, const std::string& label);

nlohmann::json to_json(const PrecessionReport& rep);
nlohmann::json to_json(const NonrelReport& rep);
nlohmann::json to_json(const SuiteReport& rep);

} // namespace relsim::cli
