#include "relsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace relsim {

void Particle::validate() const
{
    if (is_test) {
        if (!std::isfinite(qm_ratio)) {
            throw DomainError("particle '" + label + "': test particle needs a finite charge-to-mass ratio");
        }
        return;
    }
    if (!(m > 0.0) || !std::isfinite(m)) {
        throw DomainError("particle '" + label + "': mass must be positive");
    }
    if (!std::isfinite(q)) {
        throw DomainError("particle '" + label + "': charge must be finite");
    }
}

void SimConfig::validate() const
{
    coupling.validate();
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw DomainError("SimConfig: dt must be positive");
    }
    if (!std::isfinite(t_end)) {
        throw DomainError("SimConfig: t_end must be finite");
    }
    if (output_stride == 0) {
        throw DomainError("SimConfig: output_stride must be at least 1");
    }
}

double gamma_from_u(const Vec3& u, double c) { return std::sqrt(1.0 + norm2(u) / (c * c)); }

Vec3 velocity_from_u(const Vec3& u, double c) { return u / gamma_from_u(u, c); }

Vec3 u_from_velocity(const ThreeVelocity& v) { return v.vec() * gamma_tilde(v); }

Vec3 lorentz_term(const ThreeVelocity& v, const FieldTensor& F)
{
    const Vec3& w = v.vec();
    Vec3 out;
    for (std::size_t i = 1; i <= 3; ++i) {
        double magnetic = 0.0;
        for (std::size_t j = 1; j <= 3; ++j) {
            magnetic += F(i, j) * w[j - 1];
        }
        out[i - 1] = F(i, 0) + magnetic / v.c();
    }
    return out;
}

Vec3 coordinate_force(const Particle& p, const ThreeVelocity& v, const FieldTensor& F, const Coupling&)
{
    return lorentz_term(v, F) * p.q;
}

Vec3 du_dt(const Particle& p, const ThreeVelocity& v, const FieldTensor& F, const Coupling&)
{
    return lorentz_term(v, F) * p.charge_to_mass();
}

Vec3 coordinate_acceleration(const Vec3& u, const Vec3& dudt, double c)
{
    const double g = gamma_from_u(u, c);
    return dudt / g - u * (dot(u, dudt) / (g * g * g * c * c));
}

double orthogonality_residual(const FieldTensor& F, const FourVector& u)
{
    double sum = 0.0;
    double scale = 0.0;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = 0; nu < 4; ++nu) {
            const double term = F(mu, nu) * u[mu] * u[nu];
            sum += term;
            scale += std::abs(term);
        }
    }
    return scale > 0.0 ? std::abs(sum) / scale : 0.0;
}

FieldTensor field_on(const SimConfig& cfg, std::span<const Particle> particles, std::span<const WorldLine> lines,
                     std::span<const SourceParticle> external, std::size_t k, double t, const Vec3& x)
{
    FieldTensor total;
    for (std::size_t j = 0; j < particles.size(); ++j) {
        if (j != k && particles[j].sources_field()) {
            total += lw_field(cfg.coupling, particles[j].q, lines[j], t, x);
        }
    }
    for (const SourceParticle& s : external) {
        if (s.q != 0.0) {
            total += lw_field(cfg.coupling, s.q, s.w, t, x);
        }
    }
    return total;
}

namespace {

struct Rate {
    Vec3 dx;
    Vec3 du;
};

std::vector<Rate> rates(const SimConfig& cfg, std::span<const Particle> particles, std::span<const WorldLine> lines,
                        std::span<const SourceParticle> external, double t, const SystemState& s)
{
    const double c = cfg.coupling.c;
    std::vector<Rate> out(particles.size());
    for (std::size_t k = 0; k < particles.size(); ++k) {
        if (particles[k].motion == Motion::prescribed) {
            continue;
        }
        const ThreeVelocity v(velocity_from_u(s.particles[k].u, c), c);
        const FieldTensor F = field_on(cfg, particles, lines, external, k, t, s.particles[k].pos);
        out[k] = {v.vec(), du_dt(particles[k], v, F, cfg.coupling)};
    }
    return out;
}

SystemState advance(const SystemState& s, const std::vector<Rate>& r, double h)
{
    SystemState out = s;
    for (std::size_t k = 0; k < r.size(); ++k) {
        out.particles[k].pos += r[k].dx * h;
        out.particles[k].u += r[k].du * h;
    }
    return out;
}

const char* cause_of(const std::exception& e)
{
    if (dynamic_cast<const SingularField*>(&e)) {
        return "singular_field";
    }
    if (dynamic_cast<const NonConvergence*>(&e)) {
        return "non_convergence";
    }
    if (dynamic_cast<const HistoryExhausted*>(&e)) {
        return "history_exhausted";
    }
    return "numerical";
}

/// Rejects a step across which a pair collides or moves by more than its
/// separation; either way the fixed step no longer resolves the encounter.
void check_encounters(const SimConfig& cfg, std::span<const Particle> particles, const SystemState& before,
                      const SystemState& after, std::span<const SourceParticle> external)
{
    const double r_sing = cfg.coupling.tol.singular_radius();
    auto check = [&](const Vec3& r0, const Vec3& r1, const std::string& a, const std::string& b) {
        const Vec3 d = r1 - r0;
        const double dd = norm2(d);
        const double s = dd > 0.0 ? std::clamp(-dot(r0, d) / dd, 0.0, 1.0) : 0.0;
        const double closest = norm(r0 + d * s);
        if (closest < r_sing) {
            std::ostringstream os;
            os << "'" << a << "' and '" << b << "' collide (closest approach " << closest << " within the step)";
            throw SingularField(os.str());
        }
        if (std::sqrt(dd) >= std::min(norm(r0), norm(r1))) {
            std::ostringstream os;
            os << "close encounter of '" << a << "' and '" << b << "' is not resolved by dt = " << cfg.dt
               << " (separation " << std::min(norm(r0), norm(r1)) << ")";
            throw SingularField(os.str());
        }
    };
    for (std::size_t a = 0; a < particles.size(); ++a) {
        for (std::size_t b = a + 1; b < particles.size(); ++b) {
            if (!particles[a].sources_field() && !particles[b].sources_field()) {
                continue;
            }
            check(before.particles[a].pos - before.particles[b].pos, after.particles[a].pos - after.particles[b].pos,
                  particles[a].label, particles[b].label);
        }
        for (const auto& src : external) {
            if (src.q == 0.0) {
                continue;
            }
            check(before.particles[a].pos - src.w.state(before.t).pos, after.particles[a].pos - src.w.state(after.t).pos,
                  particles[a].label, "external source");
        }
    }
}

} // namespace

SystemState step(const SimConfig& cfg, std::span<const Particle> particles, const SystemState& state,
                 std::span<const WorldLine> lines, std::span<const SourceParticle> external, double dt)
{
    const double h = dt > 0.0 ? dt : cfg.dt;
    const double t = state.t;
    const auto k1 = rates(cfg, particles, lines, external, t, state);
    const auto k2 = rates(cfg, particles, lines, external, t + 0.5 * h, advance(state, k1, 0.5 * h));
    const auto k3 = rates(cfg, particles, lines, external, t + 0.5 * h, advance(state, k2, 0.5 * h));
    const auto k4 = rates(cfg, particles, lines, external, t + h, advance(state, k3, h));

    SystemState out = state;
    out.t = t + h;
    for (std::size_t k = 0; k < particles.size(); ++k) {
        auto& p = out.particles[k];
        if (particles[k].motion == Motion::prescribed) {
            p.pos = lines[k].state(out.t).pos;
            continue;
        }
        p.pos += (k1[k].dx + 2.0 * k2[k].dx + 2.0 * k3[k].dx + k4[k].dx) * (h / 6.0);
        p.u += (k1[k].du + 2.0 * k2[k].du + 2.0 * k3[k].du + k4[k].du) * (h / 6.0);
        if (!is_finite(p.pos) || !is_finite(p.u)) {
            throw NumericalError("step: non-finite state for particle '" + particles[k].label + "'");
        }
    }
    return out;
}

double quasi_static_energy(const SimConfig& cfg, std::span<const Particle> particles, const SystemState& state,
                           std::span<const SourceParticle> external)
{
    const double c = cfg.coupling.c;
    // pair energy q q' K_f / r with K_f the force constant of the static limit
    const double kf = -cfg.coupling.potential_constant();
    double e = 0.0;
    for (std::size_t k = 0; k < particles.size(); ++k) {
        const auto& p = particles[k];
        const Vec3& u = state.particles[k].u;
        const double kinetic = norm2(u) / (gamma_from_u(u, c) + 1.0); // (gamma - 1) c^2
        const double weight = p.is_test ? 1.0 : p.m;
        const double coupling = p.is_test ? p.qm_ratio : p.q;
        e += weight * kinetic;
        for (std::size_t j = 0; j < particles.size(); ++j) {
            if (j == k || !particles[j].sources_field()) {
                continue;
            }
            if (!p.is_test && j < k) {
                continue; // massive pairs counted once
            }
            const double r = norm(state.particles[k].pos - state.particles[j].pos);
            e += coupling * particles[j].q * kf / r;
        }
        for (const SourceParticle& s : external) {
            const double r = norm(state.particles[k].pos - s.w.state(state.t).pos);
            e += coupling * s.q * kf / r;
        }
    }
    return e;
}

SimulationResult simulate(const SimConfig& cfg, const std::vector<Particle>& particles, const SystemState& initial,
                          const RowSink& sink, std::span<const SourceParticle> external)
{
    cfg.validate();
    if (initial.particles.size() != particles.size()) {
        throw DomainError("simulate: initial state does not match the particle list");
    }
    const double c = cfg.coupling.c;
    SimulationResult res;
    for (std::size_t k = 0; k < particles.size(); ++k) {
        particles[k].validate();
        const auto& s = initial.particles[k];
        if (!is_finite(s.pos) || !is_finite(s.u)) {
            throw DomainError("simulate: non-finite initial state for '" + particles[k].label + "'");
        }
        const Vec3 v = velocity_from_u(s.u, c);
        if (particles[k].motion == Motion::prescribed) {
            res.lines.push_back(WorldLine::inertial({initial.t, s.pos, v}, c));
        } else {
            SampledHistory h(c, cfg.prehistory, FuturePolicy::inertial);
            h.append({initial.t, s.pos, v});
            res.lines.push_back(WorldLine::sampled(std::move(h)));
        }
    }

    double min_sep = std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < particles.size(); ++a) {
        for (std::size_t b = a + 1; b < particles.size(); ++b) {
            if (particles[a].sources_field() || particles[b].sources_field()) {
                min_sep = std::min(min_sep, norm(initial.particles[a].pos - initial.particles[b].pos));
            }
        }
        for (const auto& s : external) {
            min_sep = std::min(min_sep, norm(initial.particles[a].pos - s.w.state(initial.t).pos));
        }
    }
    if (cfg.dt >= min_sep / c) {
        std::ostringstream os;
        os << "dt = " << cfg.dt << " is not below the light-crossing time " << min_sep / c
           << " of the closest pair; retarded queries will use inertial extrapolation";
        res.diag.warnings.push_back(os.str());
    }

    const double span = cfg.t_end - initial.t;
    const auto n_steps = span > 0.0 ? static_cast<std::size_t>(std::ceil(span / cfg.dt - 1e-9)) : 0;
    res.diag.energy_initial = quasi_static_energy(cfg, particles, initial, external);
    const double e_scale = std::abs(res.diag.energy_initial);

    auto emit = [&](const SystemState& s) {
        for (std::size_t k = 0; k < particles.size(); ++k) {
            const auto& p = s.particles[k];
            TrajectoryRow row;
            row.t = s.t;
            row.index = k;
            row.pos = p.pos;
            row.gamma = gamma_from_u(p.u, c);
            row.vel = p.u / row.gamma;
            const FourVector u4(row.gamma, p.u / c);
            row.norm_residual = std::abs(minkowski_inner(u4, u4) - 1.0);
            if (cfg.row_diagnostics && particles[k].motion == Motion::dynamic) {
                const FieldTensor F = field_on(cfg, particles, res.lines, external, k, s.t, p.pos);
                row.orth_residual = orthogonality_residual(F, u4);
            }
            res.diag.max_norm_residual = std::max(res.diag.max_norm_residual, row.norm_residual);
            res.diag.max_orth_residual = std::max(res.diag.max_orth_residual, row.orth_residual);
            if (sink) {
                sink(row);
            } else {
                res.rows.push_back(row);
            }
        }
        const double e = quasi_static_energy(cfg, particles, s, external);
        const double drift = std::abs(e - res.diag.energy_initial) / (e_scale > 0.0 ? e_scale : 1.0);
        res.diag.energy_max_rel_drift = std::max(res.diag.energy_max_rel_drift, drift);
        res.diag.energy_final = e;
    };

    SystemState state = initial;
    try {
        emit(state);
        for (std::size_t n = 1; n <= n_steps; ++n) {
            const double t_next = (n == n_steps) ? cfg.t_end : initial.t + static_cast<double>(n) * cfg.dt;
            SystemState next = step(cfg, particles, state, res.lines, external, t_next - state.t);
            next.t = t_next;
            check_encounters(cfg, particles, state, next, external);
            state = std::move(next);
            for (std::size_t k = 0; k < particles.size(); ++k) {
                if (auto* h = res.lines[k].history()) {
                    h->append({state.t, state.particles[k].pos, velocity_from_u(state.particles[k].u, c)});
                }
            }
            res.diag.steps = n;
            if (n % cfg.output_stride == 0 || n == n_steps) {
                emit(state);
            }
        }
    } catch (const NumericalError& e) {
        std::ostringstream os;
        os << "simulation failed at t = " << state.t << ": " << e.what();
        throw SimulationError(os.str(), state.t, cause_of(e));
    } catch (const DomainError& e) {
        std::ostringstream os;
        os << "simulation failed at t = " << state.t << ": " << e.what();
        throw SimulationError(os.str(), state.t, "domain");
    }

    for (auto& line : res.lines) {
        if (auto* h = line.history()) {
            h->set_future(FuturePolicy::error);
        }
    }
    res.final_state = state;
    return res;
}

SimulationResult test_particle_orbit(const SimConfig& cfg, const SourceParticle& source, const Particle& probe,
                                     const ParticleState& initial, double t0, const RowSink& sink)
{
    Particle p = probe;
    p.motion = Motion::dynamic;
    SystemState s{t0, {initial}};
    const SourceParticle ext[] = {source};
    return simulate(cfg, {p}, s, sink, ext);
}

} // namespace relsim
