#include "relsim/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace relsim {

namespace {
constexpr double two_pi = 2.0 * std::numbers::pi;
} // namespace

double OrbitSpec::c() const { return unamplified_c() / std::sqrt(amplify); }

double OrbitSpec::kepler_period() const { return two_pi * std::sqrt(a * a * a / gm()); }

void OrbitSpec::validate() const
{
    if (!(a > 0.0) || !std::isfinite(a)) {
        throw DomainError("OrbitSpec: semi-major axis must be positive");
    }
    if (!(e >= 0.0 && e < 1.0)) {
        throw DomainError("OrbitSpec: eccentricity must lie in [0, 1)");
    }
    if (!(central_mass > 0.0) || !(G > 0.0)) {
        throw DomainError("OrbitSpec: central mass and G must be positive");
    }
    if (!(amplify >= 1.0) || !std::isfinite(amplify)) {
        throw DomainError("OrbitSpec: amplify must be >= 1");
    }
    if (c_override && !(*c_override > 0.0)) {
        throw DomainError("OrbitSpec: c_override must be positive");
    }
}

ParticleState perihelion_start(const OrbitSpec& spec)
{
    spec.validate();
    const double rp = spec.a * (1.0 - spec.e);
    const double vp = std::sqrt(spec.gm() * (1.0 + spec.e) / rp);
    const ThreeVelocity v({0.0, vp, 0.0}, spec.c());
    return {{rp, 0.0, 0.0}, u_from_velocity(v)};
}

double sr_coulomb_advance(const OrbitSpec& spec)
{
    const ParticleState s = perihelion_start(spec);
    const double c = spec.c();
    const double k = spec.gm();
    const double rp = s.pos.x;
    const double g = gamma_from_u(s.u, c);
    // specific energy above rest: (gamma - 1) c^2 - k / r
    const double binding = norm2(s.u) / (g + 1.0) - k / rp;
    if (!(binding < 0.0)) {
        throw DomainError("sr_coulomb_advance: orbit is unbound");
    }
    const double ell = rp * s.u.y; // gamma r v at perihelion
    const double x = k / (ell * c);
    if (!(x < 1.0)) {
        throw DomainError("sr_coulomb_advance: angular momentum below the capture limit");
    }
    // 1/sqrt(1 - x^2) - 1 without cancellation
    return two_pi * std::expm1(-0.5 * std::log1p(-x * x));
}

std::vector<Perihelion> detect_perihelia(std::span<const OrbitSample> samples)
{
    if (samples.size() < 3) {
        throw InsufficientData("detect_perihelia: need at least 3 samples");
    }
    const Vec3 n = cross(samples.front().pos, samples.front().vel);
    if (!(norm(n) > 0.0)) {
        throw InsufficientData("detect_perihelia: first sample has no angular momentum");
    }
    const Vec3 e1 = samples.front().pos / norm(samples.front().pos);
    const Vec3 nhat = n / norm(n);
    const Vec3 e2 = cross(nhat, e1);

    std::vector<double> r(samples.size());
    std::vector<double> phi(samples.size());
    double prev = 0.0;
    double turns = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const Vec3& p = samples[i].pos;
        r[i] = norm(p);
        const double a = std::atan2(dot(p, e2), dot(p, e1));
        if (i > 0) {
            const double jump = a - prev;
            if (jump < -std::numbers::pi) {
                turns += two_pi;
            } else if (jump > std::numbers::pi) {
                turns -= two_pi;
            }
        }
        prev = a;
        phi[i] = a + turns;
    }

    const auto [rmin, rmax] = std::minmax_element(r.begin(), r.end());
    if ((*rmax - *rmin) <= 1e-9 * *rmax) {
        throw InsufficientData("detect_perihelia: radius is constant, no isolated minima");
    }

    std::vector<Perihelion> out;
    for (std::size_t i = 1; i + 1 < samples.size(); ++i) {
        if (!(r[i] < r[i - 1] && r[i] <= r[i + 1])) {
            continue;
        }
        // parabola through the three samples in local time tau = t - t_i
        const double ta = samples[i - 1].t - samples[i].t;
        const double tb = samples[i + 1].t - samples[i].t;
        const double sa = (r[i - 1] - r[i]) / ta;
        const double sb = (r[i + 1] - r[i]) / tb;
        const double curv = (sb - sa) / (tb - ta);
        if (!(curv > 0.0)) {
            continue;
        }
        // r(tau) = r_i + slope0 tau + curv tau^2
        const double slope0 = sa - curv * ta;
        const double tau = -slope0 / (2.0 * curv);

        // quadratic (Lagrange) interpolation of the angle at tau
        const double la = tau * (tau - tb) / (ta * (ta - tb));
        const double l0 = (tau - ta) * (tau - tb) / (ta * tb);
        const double lb = tau * (tau - ta) / (tb * (tb - ta));
        out.push_back({samples[i].t + tau, la * phi[i - 1] + l0 * phi[i] + lb * phi[i + 1]});
    }
    if (out.size() < 2) {
        std::ostringstream os;
        os << "detect_perihelia: found " << out.size() << " perihelia, need at least 2";
        throw InsufficientData(os.str());
    }
    return out;
}

AdvanceFit fit_advance(std::span<const Perihelion> p)
{
    if (p.size() < 5) {
        std::ostringstream os;
        os << "fit_advance: " << p.size() << " perihelia, need at least 5";
        throw InsufficientData(os.str());
    }
    const double n = static_cast<double>(p.size());
    const double kbar = 0.5 * (n - 1.0);
    double skk = 0.0;
    double sphi = 0.0;
    double st = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double dk = static_cast<double>(k) - kbar;
        skk += dk * dk;
        sphi += dk * (p[k].angle - p[0].angle);
        st += dk * (p[k].t - p[0].t);
    }
    AdvanceFit fit;
    const double slope = sphi / skk;
    fit.advance_per_orbit = slope - two_pi;
    fit.period = st / skk;

    double mean = 0.0;
    for (const auto& q : p) {
        mean += q.angle - p[0].angle;
    }
    mean /= n;
    double ss = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double model = mean + slope * (static_cast<double>(k) - kbar);
        const double d = (p[k].angle - p[0].angle) - model;
        ss += d * d;
    }
    fit.residual = std::sqrt(ss / n);
    return fit;
}

PrecessionReport precession_run(const OrbitSpec& spec, int orbits, int steps_per_orbit)
{
    spec.validate();
    if (orbits < 6) {
        std::ostringstream os;
        os << "precession run needs at least 6 orbits for 5 perihelia, got " << orbits;
        throw InsufficientData(os.str());
    }
    if (steps_per_orbit < 50) {
        throw DomainError("precession run needs at least 50 steps per orbit");
    }
    const double c = spec.c();
    const double period = spec.kepler_period();

    SimConfig cfg;
    cfg.coupling.c = c;
    cfg.coupling.K = -spec.G;
    cfg.coupling.sign = SignConvention::coulomb_consistent;
    cfg.coupling.tol.length_scale = spec.a;
    cfg.dt = period / steps_per_orbit;
    cfg.t_end = (orbits + 0.25) * period;
    cfg.output_stride = 1;
    cfg.row_diagnostics = false;

    // gravity: charge is the mass, test particle with unit charge-to-mass ratio
    const SourceParticle sun{spec.central_mass, WorldLine::at_rest({}, c)};
    Particle probe{"probe", spec.probe_mass, 0.0, true, 1.0, Motion::dynamic};

    std::vector<OrbitSample> samples;
    samples.reserve(static_cast<std::size_t>((orbits + 1) * steps_per_orbit));
    const auto result = test_particle_orbit(cfg, sun, probe, perihelion_start(spec), 0.0,
                                            [&](const TrajectoryRow& row) {
                                                samples.push_back({row.t, row.pos, row.vel});
                                            });

    const auto perihelia = detect_perihelia(samples);
    const AdvanceFit fit = fit_advance(perihelia);

    PrecessionReport rep;
    for (const auto& p : perihelia) {
        rep.perihelion_times.push_back(p.t);
        rep.perihelion_angles.push_back(p.angle);
    }
    rep.advance_per_orbit = fit.advance_per_orbit;
    rep.fit_residual = fit.residual;
    rep.period = fit.period;
    rep.c = c;
    rep.advance_arcsec_per_century = fit.advance_per_orbit *
                                     (constants::julian_century_days * constants::day / fit.period) *
                                     constants::arcsec_per_rad;
    rep.analytic_reference = sr_coulomb_advance(spec);
    rep.relative_error = std::abs(rep.advance_per_orbit - rep.analytic_reference) / rep.analytic_reference;
    rep.energy_max_rel_drift = result.diag.energy_max_rel_drift;
    return rep;
}

PrecessionReport mercury_scenario(const MercuryConfig& cfg)
{
    const OrbitSpec& spec = cfg.orbit;
    spec.validate();
    // the elements must be mutually consistent under Kepler's third law
    const double period_s = spec.period_days * constants::day;
    const double lhs = spec.a * spec.a * spec.a / (period_s * period_s);
    const double rhs = spec.gm() / (4.0 * std::numbers::pi * std::numbers::pi);
    if (std::abs(lhs / rhs - 1.0) > 5e-3) {
        std::ostringstream os;
        os << "mercury_scenario: a^3/T^2 = " << lhs << " differs from GM/4pi^2 = " << rhs << " by more than 0.5%";
        throw DomainError(os.str());
    }

    PrecessionReport rep = precession_run(spec, cfg.orbits, cfg.steps_per_orbit);
    if (!cfg.extrapolate) {
        return rep;
    }

    ExtrapolationReport ex;
    OrbitSpec second = spec;
    second.amplify = spec.amplify >= 4.0 ? spec.amplify / 4.0 : spec.amplify * 4.0;
    const PrecessionReport rep2 = precession_run(second, cfg.orbits, cfg.steps_per_orbit);
    ex.amplify_primary = spec.amplify;
    ex.amplify_secondary = second.amplify;
    ex.advance_primary = rep.advance_per_orbit;
    ex.advance_secondary = rep2.advance_per_orbit;
    ex.fitted_exponent = -std::log(rep.advance_per_orbit / rep2.advance_per_orbit) / std::log(rep.c / rep2.c);
    ex.scaling_verified = std::abs(ex.fitted_exponent - 2.0) <= 0.02;

    const double c_true = spec.unamplified_c();
    ex.advance_per_orbit = rep.advance_per_orbit * (rep.c / c_true) * (rep.c / c_true);
    const double orbits_per_century = constants::julian_century_days / spec.period_days;
    ex.arcsec_per_century = ex.advance_per_orbit * orbits_per_century * constants::arcsec_per_rad;
    OrbitSpec plain = spec;
    plain.amplify = 1.0;
    ex.analytic_arcsec_per_century = sr_coulomb_advance(plain) * orbits_per_century * constants::arcsec_per_rad;
    ex.relative_difference =
        std::abs(ex.arcsec_per_century - ex.reference_arcsec_per_century) / ex.reference_arcsec_per_century;
    rep.extrapolation = ex;
    return rep;
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2) {
        throw InsufficientData("loglog_slope: need at least two matching points");
    }
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

namespace {

struct PairSetup {
    std::vector<Particle> particles;
    SystemState initial;
    double period = 0.0;
    double r_min = 0.0;
    double speed = 0.0;
};

// Opposite unit charges, K = 1, separation 1, starting at apoapsis with the
// relative speed `speed_factor` times the circular speed.
PairSetup bound_pair(const NonrelConfig& cfg)
{
    PairSetup s;
    const double heavy = cfg.mass_ratio;
    const double total = 1.0 + heavy;
    s.particles = {{"light", 1.0, 1.0}, {"heavy", heavy, -1.0}};
    const double k = total / heavy; // coupling over reduced mass
    const double v_rel = cfg.speed_factor * std::sqrt(k);
    s.speed = v_rel;
    const double energy = 0.5 * v_rel * v_rel - k;
    const double a = -k / (2.0 * energy);
    s.period = 2.0 * std::numbers::pi * std::sqrt(a * a * a / k);
    s.r_min = 2.0 * a - 1.0;
    s.initial.t = 0.0;
    s.initial.particles = {{{-heavy / total, 0.0, 0.0}, {0.0, -v_rel * heavy / total, 0.0}},
                           {{1.0 / total, 0.0, 0.0}, {0.0, v_rel / total, 0.0}}};
    return s;
}

struct NewtonState {
    Vec3 x[2];
    Vec3 v[2];
};

NewtonState newton_rates(const NewtonState& s, const double q[2], const double m[2], double k_force)
{
    NewtonState d;
    const Vec3 r = s.x[0] - s.x[1];
    const double rn = norm(r);
    const Vec3 f0 = r * (q[0] * q[1] * k_force / (rn * rn * rn));
    d.x[0] = s.v[0];
    d.x[1] = s.v[1];
    d.v[0] = f0 / m[0];
    d.v[1] = -f0 / m[1];
    return d;
}

NewtonState axpy(const NewtonState& s, const NewtonState& d, double h)
{
    NewtonState o = s;
    for (int i = 0; i < 2; ++i) {
        o.x[i] += d.x[i] * h;
        o.v[i] += d.v[i] * h;
    }
    return o;
}

} // namespace

NonrelReport nonrel_limit_suite(const NonrelConfig& cfg)
{
    NonrelReport rep;
    if (!(cfg.speed_factor > 0.0 && cfg.speed_factor < 1.0) || !(cfg.mass_ratio >= 1.0)) {
        throw DomainError("nonrel_limit_suite: speed_factor must lie in (0, 1) and mass_ratio be >= 1");
    }
    const PairSetup pair = bound_pair(cfg);
    const double q[2] = {pair.particles[0].q, pair.particles[1].q};
    const double m[2] = {pair.particles[0].m, pair.particles[1].m};

    for (double beta : cfg.betas) {
        if (!(beta > 0.0 && beta < 1.0)) {
            throw DomainError("nonrel_limit_suite: v/c must lie in (0, 1)");
        }
        SimConfig sc;
        sc.coupling.c = pair.speed / beta;
        sc.coupling.K = 1.0;
        sc.coupling.sign = SignConvention::coulomb_consistent;
        sc.dt = std::min(pair.period / cfg.steps_per_orbit, 0.25 * pair.r_min / sc.coupling.c);
        const auto n_steps = static_cast<std::size_t>(std::ceil(cfg.orbits * pair.period / sc.dt));
        sc.t_end = static_cast<double>(n_steps) * sc.dt;
        sc.output_stride = 1;
        sc.row_diagnostics = false;

        std::vector<Vec3> positions;
        positions.reserve(2 * (n_steps + 1));
        simulate(sc, pair.particles, pair.initial, [&](const TrajectoryRow& row) { positions.push_back(row.pos); });

        // static Coulomb reference with the same step grid
        const double k_force = sc.coupling.K;
        NewtonState s;
        for (int i = 0; i < 2; ++i) {
            s.x[i] = pair.initial.particles[i].pos;
            s.v[i] = velocity_from_u(pair.initial.particles[i].u, sc.coupling.c);
        }
        double worst = 0.0;
        for (std::size_t n = 0;; ++n) {
            for (int i = 0; i < 2; ++i) {
                worst = std::max(worst, norm(positions[2 * n + i] - s.x[i]));
            }
            if (n == n_steps) {
                break;
            }
            const double h = sc.dt;
            const NewtonState k1 = newton_rates(s, q, m, k_force);
            const NewtonState k2 = newton_rates(axpy(s, k1, 0.5 * h), q, m, k_force);
            const NewtonState k3 = newton_rates(axpy(s, k2, 0.5 * h), q, m, k_force);
            const NewtonState k4 = newton_rates(axpy(s, k3, h), q, m, k_force);
            for (int i = 0; i < 2; ++i) {
                s.x[i] += (k1.x[i] + 2.0 * k2.x[i] + 2.0 * k3.x[i] + k4.x[i]) * (h / 6.0);
                s.v[i] += (k1.v[i] + 2.0 * k2.v[i] + 2.0 * k3.v[i] + k4.v[i]) * (h / 6.0);
            }
        }
        rep.betas.push_back(beta);
        rep.deviations.push_back(worst / cfg.orbits); // separation is 1
    }
    if (rep.betas.size() >= 2) {
        rep.exponent = loglog_slope(rep.betas, rep.deviations);
    }
    return rep;
}

} // namespace relsim
