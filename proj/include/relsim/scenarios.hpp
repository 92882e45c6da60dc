#pragma once

#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

#include "relsim/dynamics.hpp"
#include "relsim/vec.hpp"

namespace relsim {

namespace constants {
inline constexpr double G = 6.673e-11;          // m^3 kg^-1 s^-2
inline constexpr double c_si = 299792458.0;     // m/s
inline constexpr double day = 86400.0;          // s
inline constexpr double julian_century_days = 36525.0;
inline constexpr double arcsec_per_rad = 180.0 * 3600.0 / std::numbers::pi;
inline constexpr double mercury_reference_arcsec = 7.18; // per century, static-Sun relativistic law
} // namespace constants

/// Test-particle orbit about a central mass at rest. Defaults are Mercury and the Sun.
struct OrbitSpec {
    double central_mass = 1.989e30;   // kg
    double probe_mass = 3.3011e23;    // kg; the probe is a test particle, only reported
    double a = 5.7909e10;             // m
    double e = 0.2056;
    double period_days = 87.969;      // sidereal period used for the century conversion
    double G = constants::G;
    std::optional<double> c_override; // m/s; replaces the SI speed of light
    /// Relativistic amplification: the simulation uses c / sqrt(amplify).
    double amplify = 1.0;

    [[nodiscard]] double gm() const { return G * central_mass; }
    [[nodiscard]] double unamplified_c() const { return c_override.value_or(constants::c_si); }
    [[nodiscard]] double c() const;
    /// Newtonian period 2 pi sqrt(a^3 / GM).
    [[nodiscard]] double kepler_period() const;
    void validate() const;
};

/// Starting state: perihelion a(1 - e) on +x, Newtonian vis-viva speed along +y.
ParticleState perihelion_start(const OrbitSpec& spec);

/// Closed-form perihelion advance (rad per orbit) of a test particle in a
/// static 1/r potential: 2 pi (1 / sqrt(1 - (GM / (l c))^2) - 1), with l the
/// conserved gamma r^2 dphi/dt of the perihelion_start state.
/// Throws DomainError for unbound orbits.
double sr_coulomb_advance(const OrbitSpec& spec);

struct OrbitSample {
    double t = 0.0;
    Vec3 pos;
    Vec3 vel;
};

struct Perihelion {
    double t = 0.0;
    double angle = 0.0; ///< unwrapped position angle in the orbital plane
};

/// Local minima of |pos|, refined by a parabola through three samples.
/// Throws InsufficientData for fewer than 2 minima or a circular orbit.
std::vector<Perihelion> detect_perihelia(std::span<const OrbitSample> samples);

struct AdvanceFit {
    double advance_per_orbit = 0.0; ///< rad
    double period = 0.0;            ///< anomalistic period from the perihelion times
    double residual = 0.0;          ///< rms of the angle fit, rad
};

/// Least-squares line through (k, angle_k); needs at least 5 perihelia.
AdvanceFit fit_advance(std::span<const Perihelion> perihelia);

struct ExtrapolationReport {
    double amplify_primary = 0.0;
    double amplify_secondary = 0.0;
    double advance_primary = 0.0;
    double advance_secondary = 0.0;
    double fitted_exponent = 0.0; ///< advance ~ c^-p
    bool scaling_verified = false;
    double advance_per_orbit = 0.0; ///< at the unamplified c
    double arcsec_per_century = 0.0;
    double analytic_arcsec_per_century = 0.0;
    double reference_arcsec_per_century = constants::mercury_reference_arcsec;
    double relative_difference = 0.0; ///< vs the reference value
};

struct PrecessionReport {
    std::vector<double> perihelion_times;
    std::vector<double> perihelion_angles;
    double advance_per_orbit = 0.0;
    double advance_arcsec_per_century = 0.0; ///< at the simulated c
    double fit_residual = 0.0;
    double analytic_reference = 0.0;         ///< sr_coulomb_advance at the simulated c
    double relative_error = 0.0;             ///< measured vs analytic
    double period = 0.0;
    double c = 0.0;
    double energy_max_rel_drift = 0.0;
    std::optional<ExtrapolationReport> extrapolation;
};

struct MercuryConfig {
    OrbitSpec orbit;
    int orbits = 10;
    int steps_per_orbit = 4000;
    bool extrapolate = false;
};

/// Measured precession of a single run (no century extrapolation).
PrecessionReport precession_run(const OrbitSpec& spec, int orbits, int steps_per_orbit);

/// Test particle about a Sun at rest under the relativistic gravity law.
/// With `extrapolate`, a second amplification checks the 1/c^2 scaling and the
/// advance is carried to the unamplified c and converted to arcsec/century.
PrecessionReport mercury_scenario(const MercuryConfig& cfg);

struct NonrelConfig {
    std::vector<double> betas{1e-1, 1e-2, 1e-3};
    double orbits = 1.0;
    int steps_per_orbit = 4000;
    /// Heavy over light mass. The cross term of order (v/c)^3 in the retarded
    /// interaction is suppressed by the reduced-mass fraction.
    double mass_ratio = 1000.0;
    /// Initial relative speed over the circular speed at the starting separation.
    double speed_factor = 0.85;
};

struct NonrelReport {
    std::vector<double> betas;
    std::vector<double> deviations; ///< max |x - x_static| per orbit over initial separation
    double exponent = 0.0;          ///< deviation ~ beta^p
};

/// Two-body bound pair under the retarded law versus a plain static-Coulomb
/// integrator, for each v/c in `betas`; v is the initial relative speed.
NonrelReport nonrel_limit_suite(const NonrelConfig& cfg);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

} // namespace relsim
