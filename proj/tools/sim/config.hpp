#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "relsim/dynamics.hpp"
#include "relsim/scenarios.hpp"

namespace relsim::cli {

/// Invalid configuration; the message starts with the offending field path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path.empty() ? what : path + ": " + what), path_(path)
    {
    }
    [[nodiscard]] const std::string& path() const { return path_; }

private:
    std::string path_;
};

enum class ScenarioKind { trajectory, mercury, nonrel_limit };

struct OutputSpec {
    std::string directory = "out";
    bool csv = true;
    bool json = true;
};

struct RunConfig {
    SimConfig sim;
    std::vector<Particle> particles;
    SystemState initial;
    std::vector<Vec3> velocities; ///< as given, so dumps re-parse to the same u
    ScenarioKind scenario = ScenarioKind::trajectory;
    MercuryConfig mercury;
    NonrelConfig nonrel;
    OutputSpec output;
};

/// Parses and validates a configuration document. Presets are expanded so the
/// result is fully explicit.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Fully resolved document; parse_config(to_json(cfg)) reproduces cfg.
nlohmann::json to_json(const RunConfig& cfg);

std::string to_string(ScenarioKind k);

} // namespace relsim::cli
