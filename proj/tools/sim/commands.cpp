#include "commands.hpp"

#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

namespace relsim::cli {

using nlohmann::json;

namespace {

int guarded(Io io, const std::function<int()>& body)
{
    try {
        return body();
    } catch (const ConfigError& e) {
        io.err << "config error: " << e.what() << '\n';
        return exit_usage;
    } catch (const DomainError& e) {
        io.err << "invalid input: " << e.what() << '\n';
        return exit_usage;
    } catch (const InsufficientData& e) {
        io.err << "insufficient data: " << e.what() << '\n';
        return exit_usage;
    } catch (const NumericalError& e) {
        io.err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::filesystem::filesystem_error& e) {
        io.err << "i/o error: " << e.what() << '\n';
        return exit_usage;
    }
}

json vec_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

void write_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::filesystem::filesystem_error("cannot write", path, std::make_error_code(std::errc::io_error));
    }
}

int run_trajectory(const RunConfig& cfg, const std::filesystem::path& dir, Io io)
{
    std::filesystem::create_directories(dir);
    std::ofstream csv;
    if (cfg.output.csv) {
        csv.open(dir / "trajectory.csv", std::ios::binary);
        if (!csv) {
            throw std::filesystem::filesystem_error("cannot write", dir / "trajectory.csv",
                                                    std::make_error_code(std::errc::io_error));
        }
        csv << csv_header;
    }

    std::size_t rows = 0;
    auto sink = [&](const TrajectoryRow& row) {
        ++rows;
        if (cfg.output.csv) {
            csv << csv_row(row, cfg.particles[row.index].label);
        }
    };

    json summary;
    summary["scenario"] = "trajectory";
    summary["particles"] = cfg.particles.size();
    const auto start = std::chrono::steady_clock::now();
    int code = exit_ok;
    try {
        const SimulationResult res = simulate(cfg.sim, cfg.particles, cfg.initial, sink);
        summary["status"] = "ok";
        summary["steps"] = res.diag.steps;
        summary["max_norm_residual"] = res.diag.max_norm_residual;
        summary["max_orth_residual"] = res.diag.max_orth_residual;
        summary["energy_initial"] = res.diag.energy_initial;
        summary["energy_final"] = res.diag.energy_final;
        summary["energy_max_rel_drift"] = res.diag.energy_max_rel_drift;
        summary["warnings"] = res.diag.warnings;
        for (const auto& w : res.diag.warnings) {
            io.err << "warning: " << w << '\n';
        }
    } catch (const SimulationError& e) {
        summary["status"] = "failed";
        summary["failure"] = {{"time", e.time()}, {"cause", e.cause()}, {"message", e.what()}};
        io.err << "numerical failure: " << e.what() << '\n';
        code = exit_numerical;
    }
    summary["rows"] = rows;
    summary["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (cfg.output.csv) {
        csv.flush();
        if (!csv) {
            throw std::filesystem::filesystem_error("cannot write", dir / "trajectory.csv",
                                                    std::make_error_code(std::errc::io_error));
        }
    }
    if (cfg.output.json) {
        write_file(dir / "summary.json", summary.dump(2) + "\n");
    }
    io.out << summary.dump(2) << '\n';
    return code;
}

} // namespace

std::string format_double(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

std::string csv_row(const TrajectoryRow& row, const std::string& label)
{
    std::string line;
    line.reserve(220);
    line += format_double(row.t);
    line += ',';
    line += label;
    for (double v : {row.pos.x, row.pos.y, row.pos.z, row.vel.x, row.vel.y, row.vel.z, row.gamma}) {
        line += ',';
        line += format_double(v);
    }
    line += '\n';
    return line;
}

unsigned check_threads(const char* sim_threads)
{
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (sim_threads == nullptr || *sim_threads == '\0') {
        return hw;
    }
    const std::string_view s(sim_threads);
    unsigned n = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), n);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || n == 0) {
        throw ConfigError("SIM_THREADS", "expected a positive integer, got '" + std::string(s) + "'");
    }
    return std::min(n, hw);
}

json to_json(const PrecessionReport& rep)
{
    json j = {{"perihelion_times", rep.perihelion_times},
              {"perihelion_angles", rep.perihelion_angles},
              {"advance_per_orbit", rep.advance_per_orbit},
              {"advance_arcsec_per_century", rep.advance_arcsec_per_century},
              {"fit_residual", rep.fit_residual},
              {"analytic_advance_per_orbit", rep.analytic_reference},
              {"relative_error_vs_analytic", rep.relative_error},
              {"anomalistic_period", rep.period},
              {"c", rep.c},
              {"energy_max_rel_drift", rep.energy_max_rel_drift}};
    if (rep.extrapolation) {
        const ExtrapolationReport& e = *rep.extrapolation;
        j["extrapolation"] = {{"amplify_primary", e.amplify_primary},
                              {"amplify_secondary", e.amplify_secondary},
                              {"advance_primary", e.advance_primary},
                              {"advance_secondary", e.advance_secondary},
                              {"fitted_exponent", e.fitted_exponent},
                              {"scaling_verified", e.scaling_verified},
                              {"advance_per_orbit", e.advance_per_orbit},
                              {"arcsec_per_century", e.arcsec_per_century},
                              {"analytic_arcsec_per_century", e.analytic_arcsec_per_century}};
        j["paper_comparison"] = {{"reference_arcsec_per_century", e.reference_arcsec_per_century},
                                 {"measured_arcsec_per_century", e.arcsec_per_century},
                                 {"relative_difference", e.relative_difference}};
    }
    return j;
}

json to_json(const NonrelReport& rep)
{
    return {{"betas", rep.betas}, {"deviations", rep.deviations}, {"exponent", rep.exponent}};
}

json to_json(const SuiteReport& rep)
{
    json metrics = json::array();
    for (const auto& m : rep.metrics) {
        metrics.push_back({{"name", m.name}, {"value", m.value}, {"lo", m.lo}, {"hi", m.hi}, {"passed", m.passed()}});
    }
    return {{"suite", rep.name}, {"cases", rep.cases}, {"passed", rep.passed()}, {"metrics", metrics}};
}

int cmd_run(const RunOptions& opt, Io io)
{
    return guarded(io, [&] {
        const RunConfig cfg = load_config(opt.config);
        if (opt.dump_config) {
            io.out << to_json(cfg).dump(2) << '\n';
            return static_cast<int>(exit_ok);
        }
        const std::filesystem::path dir = opt.out_dir.value_or(cfg.output.directory);
        switch (cfg.scenario) {
        case ScenarioKind::trajectory:
            return run_trajectory(cfg, dir, io);
        case ScenarioKind::mercury: {
            const json rep = to_json(mercury_scenario(cfg.mercury));
            if (cfg.output.json) {
                std::filesystem::create_directories(dir);
                write_file(dir / "report.json", rep.dump(2) + "\n");
            }
            io.out << rep.dump(2) << '\n';
            return static_cast<int>(exit_ok);
        }
        case ScenarioKind::nonrel_limit: {
            const json rep = to_json(nonrel_limit_suite(cfg.nonrel));
            if (cfg.output.json) {
                std::filesystem::create_directories(dir);
                write_file(dir / "report.json", rep.dump(2) + "\n");
            }
            io.out << rep.dump(2) << '\n';
            return static_cast<int>(exit_ok);
        }
        }
        return static_cast<int>(exit_usage);
    });
}

int cmd_check(const CheckOptions& opt, Io io)
{
    return guarded(io, [&] {
        SuiteOptions so;
        so.seed = opt.seed;
        so.cases = opt.cases;
        so.threads = opt.threads;
        so.corrupt_sign = opt.corrupt_sign;
        const SuiteReport rep = run_suite(opt.which, so);
        io.out << "check " << rep.name << " seed=" << opt.seed << " cases=" << rep.cases << '\n';
        for (const auto& m : rep.metrics) {
            io.out << "  " << m.name << " = " << m.value << "  allowed [" << m.lo << ", " << m.hi << "]  "
                   << (m.passed() ? "pass" : "FAIL") << '\n';
        }
        io.out << (rep.passed() ? "PASS" : "FAIL") << '\n';
        return static_cast<int>(rep.passed() ? exit_ok : exit_property);
    });
}

int cmd_mercury(const MercuryConfig& cfg, Io io)
{
    return guarded(io, [&] {
        io.out << to_json(mercury_scenario(cfg)).dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

int cmd_probe(const ProbeOptions& opt, Io io)
{
    return guarded(io, [&] {
        const RunConfig cfg = load_config(opt.config);
        if (cfg.scenario != ScenarioKind::trajectory) {
            throw ConfigError("scenario", "probe needs a trajectory configuration");
        }
        std::size_t idx = cfg.particles.size();
        for (std::size_t i = 0; i < cfg.particles.size(); ++i) {
            if (cfg.particles[i].label == opt.source) {
                idx = i;
            }
        }
        if (idx == cfg.particles.size()) {
            throw ConfigError("--source", "no particle labelled '" + opt.source + "'");
        }
        const Particle& p = cfg.particles[idx];
        if (!p.sources_field()) {
            throw ConfigError("--source", "particle '" + opt.source + "' sources no field");
        }
        const Coupling& cpl = cfg.sim.coupling;

        std::optional<WorldLine> line;
        if (p.motion == Motion::prescribed) {
            const ParticleState& s = cfg.initial.particles[idx];
            line = WorldLine::inertial({cfg.initial.t, s.pos, velocity_from_u(s.u, cpl.c)}, cpl.c);
        } else {
            SimulationResult res = simulate(cfg.sim, cfg.particles, cfg.initial, [](const TrajectoryRow&) {});
            line = std::move(res.lines[idx]);
        }

        const double t = opt.event[0];
        const Vec3 x{opt.event[1], opt.event[2], opt.event[3]};
        const PotentialGradient g = lw_potential_gradient(cpl, p.q, *line, t, x);
        const FieldTensor F = FieldTensor::from_gradient(g.d);
        json f = json::array();
        for (std::size_t a = 0; a < 4; ++a) {
            json row = json::array();
            for (std::size_t b = 0; b < 4; ++b) {
                row.push_back(F(a, b));
            }
            f.push_back(row);
        }
        const json out = {{"source", p.label},
                          {"event", opt.event},
                          {"retarded_time", g.ret.t_ret},
                          {"retarded_position", vec_json(g.ret.source.pos)},
                          {"retarded_velocity", vec_json(g.ret.source.vel)},
                          {"distance", g.ret.r},
                          {"denominator", g.ret.denom},
                          {"A_lower", g.a.a},
                          {"F_lower", f}};
        io.out << out.dump(2) << '\n';
        return static_cast<int>(exit_ok);
    });
}

} // namespace relsim::cli
