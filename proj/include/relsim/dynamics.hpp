#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "relsim/errors.hpp"
#include "relsim/fields.hpp"
#include "relsim/relkin.hpp"
#include "relsim/worldline.hpp"

namespace relsim {

enum class Motion {
    dynamic,    ///< integrated under the fields of the other particles
    prescribed, ///< moves uniformly with its initial velocity; sources fields only
};

struct Particle {
    std::string label;
    double m = 1.0;
    double q = 0.0;
    /// Test particles feel fields through `qm_ratio` and source none.
    bool is_test = false;
    double qm_ratio = 1.0;
    Motion motion = Motion::dynamic;

    [[nodiscard]] double charge_to_mass() const { return is_test ? qm_ratio : q / m; }
    [[nodiscard]] bool sources_field() const { return !is_test && q != 0.0; }
    void validate() const;
};

struct SimConfig {
    Coupling coupling;
    double dt = 1e-3;
    double t_end = 1.0;
    std::size_t output_stride = 1;
    PrehistoryPolicy prehistory = PrehistoryPolicy::inertial;
    /// Evaluate u.u and F u u at every output row (one extra field sum per row).
    bool row_diagnostics = true;

    void validate() const;
};

/// Position and u = gamma v of one particle.
struct ParticleState {
    Vec3 pos;
    Vec3 u;
};

struct SystemState {
    double t = 0.0;
    std::vector<ParticleState> particles;
};

double gamma_from_u(const Vec3& u, double c);
Vec3 velocity_from_u(const Vec3& u, double c);
Vec3 u_from_velocity(const ThreeVelocity& v);

/// F_{i0} + (1/c) F_{ij} v^j: the spatial Lorentz force per unit charge.
Vec3 lorentz_term(const ThreeVelocity& v, const FieldTensor& F);

/// Right side of m d(gamma v)/dt, i.e. q (F_{i0} + F_{ij} v^j / c).
Vec3 coordinate_force(const Particle& p, const ThreeVelocity& v, const FieldTensor& F, const Coupling& cpl);

/// du/dt = force / m; test particles use their charge-to-mass ratio.
Vec3 du_dt(const Particle& p, const ThreeVelocity& v, const FieldTensor& F, const Coupling& cpl);

/// dv/dt given u and du/dt.
Vec3 coordinate_acceleration(const Vec3& u, const Vec3& dudt, double c);

/// F_{mu nu} u^mu u^nu relative to the sum of |terms|; zero by antisymmetry.
double orthogonality_residual(const FieldTensor& F, const FourVector& u);

/// Total field on particle k from every other source and from `external`.
FieldTensor field_on(const SimConfig& cfg, std::span<const Particle> particles, std::span<const WorldLine> lines,
                     std::span<const SourceParticle> external, std::size_t k, double t, const Vec3& x);

/// One classical RK4 step of (pos, u) for all dynamic particles. Field sums
/// use `lines`, which must cover every retarded time up to state.t; later
/// queries fall back on the histories' future policy.
SystemState step(const SimConfig& cfg, std::span<const Particle> particles, const SystemState& state,
                 std::span<const WorldLine> lines, std::span<const SourceParticle> external = {}, double dt = 0.0);

struct TrajectoryRow {
    double t = 0.0;
    std::size_t index = 0;
    Vec3 pos;
    Vec3 vel;
    double gamma = 1.0;
    double norm_residual = 0.0;  ///< |u.u - 1|
    double orth_residual = 0.0;  ///< orthogonality_residual of the total field
};

using RowSink = std::function<void(const TrajectoryRow&)>;

struct Diagnostics {
    double max_norm_residual = 0.0;
    double max_orth_residual = 0.0;
    /// Kinetic plus instantaneous static pair energy; exact invariant only for
    /// sources at rest.
    double energy_initial = 0.0;
    double energy_final = 0.0;
    double energy_max_rel_drift = 0.0;
    std::size_t steps = 0;
    std::vector<std::string> warnings;
};

struct SimulationResult {
    std::vector<TrajectoryRow> rows; ///< empty when a sink was supplied
    SystemState final_state;
    std::vector<WorldLine> lines;
    Diagnostics diag;
};

/// Step error with the simulation time at which it occurred.
class SimulationError : public NumericalError {
public:
    SimulationError(const std::string& what, double time, std::string cause)
        : NumericalError(what), time_(time), cause_(std::move(cause))
    {
    }
    [[nodiscard]] double time() const { return time_; }
    [[nodiscard]] const std::string& cause() const { return cause_; }

private:
    double time_;
    std::string cause_;
};

/// Integrates from initial.t to cfg.t_end, appending every accepted state to
/// the dynamic particles' histories. Rows go to `sink` when given, otherwise
/// into the result. Deterministic for identical inputs.
SimulationResult simulate(const SimConfig& cfg, const std::vector<Particle>& particles, const SystemState& initial,
                          const RowSink& sink = {}, std::span<const SourceParticle> external = {});

/// Non-rest energy of the configuration (see Diagnostics).
double quasi_static_energy(const SimConfig& cfg, std::span<const Particle> particles, const SystemState& state,
                           std::span<const SourceParticle> external = {});

/// Integrates one probe in the field of one prescribed source.
SimulationResult test_particle_orbit(const SimConfig& cfg, const SourceParticle& source, const Particle& probe,
                                     const ParticleState& initial, double t0 = 0.0, const RowSink& sink = {});

} // namespace relsim
