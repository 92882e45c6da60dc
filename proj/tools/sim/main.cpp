#include <cmath>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

std::array<double, 4> parse_event(const std::string& text)
{
    std::array<double, 4> ev{};
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 4; ++i) {
        const std::size_t end = text.find(',', pos);
        const std::string part = text.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
        char* stop = nullptr;
        ev[i] = std::strtod(part.c_str(), &stop);
        if (part.empty() || *stop != '\0' || !std::isfinite(ev[i]) || (i < 3) != (end != std::string::npos)) {
            throw relsim::cli::ConfigError("--event", "expected t,x,y,z, got '" + text + "'");
        }
        pos = end + 1;
    }
    return ev;
}

} // namespace

int main(int argc, char** argv)
{
    using namespace relsim::cli;
    CLI::App app{"Relativistic point-particle simulator with retarded interactions"};
    app.require_subcommand(1);

    RunOptions run;
    std::string out_dir;
    auto* run_cmd = app.add_subcommand("run", "integrate a configuration and write CSV/JSON output");
    run_cmd->add_option("--config", run.config, "configuration JSON")->required();
    run_cmd->add_option("--out", out_dir, "output directory (overrides output.directory)");
    run_cmd->add_flag("--dump-config", run.dump_config, "print the resolved configuration and exit");

    CheckOptions check;
    auto* check_cmd = app.add_subcommand("check", "run a randomized property suite");
    check_cmd->add_option("which", check.which, "normalization | gauge | bianchi | maxwell | covariance | oracle")
        ->required();
    check_cmd->add_option("--seed", check.seed, "random seed")->required();
    check_cmd->add_option("--cases", check.cases, "number of cases (0 = suite default)");
    check_cmd->add_flag("--corrupt-sign", check.corrupt_sign, "negative control: flip one side's sign convention");

    relsim::MercuryConfig mercury;
    auto* mercury_cmd = app.add_subcommand("mercury", "perihelion advance of Mercury about a Sun at rest");
    mercury_cmd->add_option("--orbits", mercury.orbits, "orbits to integrate (at least 6)")->required();
    mercury_cmd->add_option("--amplify", mercury.orbit.amplify, "c is reduced by sqrt(amplify)")->required();
    mercury_cmd->add_option("--steps-per-orbit", mercury.steps_per_orbit, "RK4 steps per orbit");
    mercury_cmd->add_option("--e", mercury.orbit.e, "eccentricity");
    mercury_cmd->add_flag("--extrapolate", mercury.extrapolate, "carry the advance to the true c via 1/c^2");

    ProbeOptions probe;
    std::string event;
    auto* probe_cmd = app.add_subcommand("probe", "potential and field of one source at an event");
    probe_cmd->add_option("--config", probe.config, "configuration JSON")->required();
    probe_cmd->add_option("--event", event, "t,x,y,z")->required();
    probe_cmd->add_option("--source", probe.source, "source particle label")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    const Io io{std::cout, std::cerr};
    try {
        if (*run_cmd) {
            if (!out_dir.empty()) {
                run.out_dir = out_dir;
            }
            return cmd_run(run, io);
        }
        if (*check_cmd) {
            check.threads = check_threads(std::getenv("SIM_THREADS"));
            return cmd_check(check, io);
        }
        if (*mercury_cmd) {
            return cmd_mercury(mercury, io);
        }
        probe.event = parse_event(event);
        return cmd_probe(probe, io);
    } catch (const ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return exit_usage;
    }
}
