#include "relsim/suites.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>

namespace relsim {

namespace {

constexpr double field_threshold = 1e-6;
constexpr double ratio_lo = 3.5;
constexpr double ratio_hi = 4.5;
// Coarse step for the convergence measurement, as a fraction of the field's
// length scale; truncation error dominates round-off there and at half of it.
constexpr double coarse_step = 0.02;

std::mt19937_64 case_rng(std::uint64_t seed, std::size_t index, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
    return std::mt19937_64(seq);
}

double uniform(std::mt19937_64& rng, double lo, double hi)
{
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vec3 unit_vector(std::mt19937_64& rng)
{
    const double z = uniform(rng, -1.0, 1.0);
    const double phi = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double s = std::sqrt(1.0 - z * z);
    return {s * std::cos(phi), s * std::sin(phi), z};
}

Vec3 orthogonal_unit(const Vec3& n)
{
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    const Vec3 v = cross(n, helper);
    return v / norm(v);
}

/// Runs body(i) for i < n on up to `threads` workers; results stay indexed
/// so reductions are independent of scheduling. The first exception by case
/// index is rethrown.
template <class T>
std::vector<T> fan_out(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& body)
{
    std::vector<T> out(n);
    std::vector<std::exception_ptr> errors(n);
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    auto run = [&](unsigned w) {
        for (std::size_t i = w; i < n; i += workers) {
            try {
                out[i] = body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        run(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(run, w);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    return out;
}

Coupling flipped(Coupling cpl)
{
    cpl.sign = cpl.sign == SignConvention::coulomb_consistent ? SignConvention::paper_literal
                                                               : SignConvention::coulomb_consistent;
    return cpl;
}

SourceKind kind_for(std::size_t i, bool include_rest)
{
    if (include_rest) {
        switch (i % 3) {
        case 0:
            return SourceKind::at_rest;
        case 1:
            return SourceKind::inertial;
        default:
            return SourceKind::circular;
        }
    }
    return i % 2 == 0 ? SourceKind::inertial : SourceKind::circular;
}

struct ConvergenceCase {
    double fine = 0.0;      ///< relative residual at the default step
    double coarse = 0.0;    ///< absolute residual at the coarse step
    double half = 0.0;      ///< absolute residual at half the coarse step
};

/// Collects a residual suite: threshold at the default step and the O(h^2)
/// ratio from the summed coarse/half residuals.
SuiteReport convergence_report(std::string name, const std::vector<ConvergenceCase>& cases)
{
    SuiteReport rep;
    rep.name = std::move(name);
    rep.cases = cases.size();
    double worst = 0.0;
    double coarse = 0.0;
    double half = 0.0;
    for (const auto& c : cases) {
        worst = std::max(worst, c.fine);
        coarse += c.coarse;
        half += c.half;
    }
    rep.metrics.push_back({"max_relative_residual", worst, 0.0, field_threshold});
    rep.metrics.push_back({"halving_ratio", half > 0.0 ? coarse / half : 0.0, ratio_lo, ratio_hi});
    return rep;
}

std::size_t or_default(std::size_t n, std::size_t fallback)
{
    return n == 0 ? fallback : n;
}

} // namespace

bool SuiteReport::passed() const
{
    return std::all_of(metrics.begin(), metrics.end(), [](const Metric& m) { return m.passed(); });
}

FieldCase random_field_case(std::uint64_t seed, std::size_t index, SourceKind kind)
{
    auto rng = case_rng(seed, index, static_cast<std::uint64_t>(kind) + 1);
    FieldCase fc;
    fc.cpl.c = 1.0;
    fc.cpl.K = uniform(rng, 0.5, 2.0);
    const double q = uniform(rng, 0.5, 2.0) * (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0);
    constexpr double radius = 1.0;

    switch (kind) {
    case SourceKind::at_rest:
        fc.src = {q, WorldLine::at_rest(unit_vector(rng) * uniform(rng, 0.0, radius), fc.cpl.c)};
        break;
    case SourceKind::inertial: {
        const Vec3 v = unit_vector(rng) * uniform(rng, 0.05, 0.9);
        fc.src = {q, WorldLine::inertial({0.0, unit_vector(rng) * uniform(rng, 0.0, radius), v}, fc.cpl.c)};
        break;
    }
    case SourceKind::circular: {
        AnalyticCircular ac;
        const Vec3 n = unit_vector(rng);
        ac.e1 = orthogonal_unit(n);
        ac.e2 = cross(n, ac.e1);
        ac.radius = radius;
        ac.omega = uniform(rng, 0.1, 0.7) * fc.cpl.c / radius;
        ac.phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        fc.src = {q, WorldLine::circular(ac, fc.cpl.c)};
        break;
    }
    }

    static constexpr double scales[] = {3.0, 10.0, 30.0};
    const double dist = scales[index % 3] * radius * uniform(rng, 1.0, 1.5);
    fc.t = uniform(rng, -5.0, 5.0);
    fc.x = unit_vector(rng) * dist;
    return fc;
}

LorentzTransform random_lorentz(std::mt19937_64& rng, double max_beta)
{
    const LorentzTransform rot = rotation(unit_vector(rng), uniform(rng, 0.0, 2.0 * std::numbers::pi));
    const LorentzTransform b = boost(unit_vector(rng) * uniform(rng, 0.0, max_beta));
    return b * rot;
}

SuiteReport normalization_suite(const SuiteOptions& opt)
{
    const std::size_t n = or_default(opt.cases, 1000);
    struct Case {
        double norm = 0.0;
        double closure = 0.0;
        double membership = 0.0;
    };
    const auto results = fan_out<Case>(n, opt.threads, [&](std::size_t i) {
        auto rng = case_rng(opt.seed, i, 100);
        const double c = std::exp(uniform(rng, -3.0, 3.0));
        const ThreeVelocity v(unit_vector(rng) * (uniform(rng, 0.0, 0.9) * c), c);
        Case out;
        out.norm = std::abs(minkowski_inner(four_velocity(v), four_velocity(v)) - 1.0);

        const LorentzTransform L = random_lorentz(rng, 0.9);
        const LorentzTransform id = L * L.inverse();
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = 0; b < 4; ++b) {
                out.closure = std::max(out.closure, std::abs(id(a, b) - (a == b ? 1.0 : 0.0)));
            }
        }
        out.membership = L.membership_residual();
        return out;
    });

    SuiteReport rep;
    rep.name = "normalization";
    rep.cases = n;
    double norm_max = 0.0;
    double closure_max = 0.0;
    double member_max = 0.0;
    for (const auto& r : results) {
        norm_max = std::max(norm_max, r.norm);
        closure_max = std::max(closure_max, r.closure);
        member_max = std::max(member_max, r.membership);
    }
    const Tolerances tol;
    rep.metrics.push_back({"max_abs_uu_minus_1", norm_max, 0.0, tol.normalization});
    rep.metrics.push_back({"max_inverse_closure", closure_max, 0.0, 1e-11});
    rep.metrics.push_back({"max_membership_residual", member_max, 0.0, tol.lorentz_membership});
    return rep;
}

SuiteReport oracle_suite(const SuiteOptions& opt)
{
    const std::size_t n = or_default(opt.cases, 100);
    const auto errors = fan_out<double>(n, opt.threads, [&](std::size_t i) {
        const FieldCase fc = random_field_case(opt.seed, i, kind_for(i, false));
        const FieldTensor an = lw_field(fc.cpl, fc.src, fc.t, fc.x);
        const Coupling fd_cpl = opt.corrupt_sign ? flipped(fc.cpl) : fc.cpl;
        const FieldTensor fd = fd_field(fd_cpl, fc.src, fc.t, fc.x, default_fd_step(fc.cpl, fc.src, fc.t, fc.x));
        double diff = 0.0;
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = a + 1; b < 4; ++b) {
                diff = std::max(diff, std::abs(an(a, b) - fd(a, b)));
            }
        }
        return diff / an.max_abs();
    });
    SuiteReport rep;
    rep.name = "oracle";
    rep.cases = n;
    rep.metrics.push_back({"max_relative_difference", *std::max_element(errors.begin(), errors.end()), 0.0,
                           field_threshold});
    return rep;
}

SuiteReport gauge_suite(const SuiteOptions& opt)
{
    const std::size_t n = or_default(opt.cases, 60);
    const auto cases = fan_out<ConvergenceCase>(n, opt.threads, [&](std::size_t i) {
        const FieldCase fc = random_field_case(opt.seed, i, kind_for(i, false));
        const double r = field_length_scale(fc.cpl, fc.src, fc.t, fc.x);
        ConvergenceCase out;
        out.fine = gauge_divergence(fc.cpl, fc.src, fc.t, fc.x, default_fd_step(fc.cpl, fc.src, fc.t, fc.x)).relative();
        out.coarse = gauge_divergence(fc.cpl, fc.src, fc.t, fc.x, coarse_step * r).relative();
        out.half = gauge_divergence(fc.cpl, fc.src, fc.t, fc.x, 0.5 * coarse_step * r).relative();
        return out;
    });
    return convergence_report("gauge", cases);
}

SuiteReport bianchi_suite(const SuiteOptions& opt)
{
    static constexpr std::array<std::array<std::size_t, 3>, 4> triples{
        {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    const std::size_t n = or_default(opt.cases, 40);
    const auto cases = fan_out<ConvergenceCase>(n, opt.threads, [&](std::size_t i) {
        const FieldCase fc = random_field_case(opt.seed, i, kind_for(i, true));
        const double r = field_length_scale(fc.cpl, fc.src, fc.t, fc.x);
        const double h = default_fd_step(fc.cpl, fc.src, fc.t, fc.x);
        ConvergenceCase out;
        for (const auto& idx : triples) {
            out.fine = std::max(out.fine, bianchi_residual(fc.cpl, fc.src, fc.t, fc.x, h, idx).relative());
            out.coarse += bianchi_residual(fc.cpl, fc.src, fc.t, fc.x, coarse_step * r, idx).relative();
            out.half += bianchi_residual(fc.cpl, fc.src, fc.t, fc.x, 0.5 * coarse_step * r, idx).relative();
        }
        return out;
    });
    return convergence_report("bianchi", cases);
}

SuiteReport maxwell_suite(const SuiteOptions& opt)
{
    const std::size_t n = or_default(opt.cases, 40);
    const auto cases = fan_out<ConvergenceCase>(n, opt.threads, [&](std::size_t i) {
        const FieldCase fc = random_field_case(opt.seed, i, kind_for(i, true));
        const double r = field_length_scale(fc.cpl, fc.src, fc.t, fc.x);
        const double h = default_fd_step(fc.cpl, fc.src, fc.t, fc.x);
        ConvergenceCase out;
        for (const auto& res : vacuum_maxwell_residual(fc.cpl, fc.src, fc.t, fc.x, h)) {
            out.fine = std::max(out.fine, res.relative());
        }
        for (const auto& res : vacuum_maxwell_residual(fc.cpl, fc.src, fc.t, fc.x, coarse_step * r)) {
            out.coarse += res.relative();
        }
        for (const auto& res : vacuum_maxwell_residual(fc.cpl, fc.src, fc.t, fc.x, 0.5 * coarse_step * r)) {
            out.half += res.relative();
        }
        return out;
    });
    return convergence_report("maxwell", cases);
}

namespace {

/// covariance_check with the transformed side evaluated under `other`.
Residual covariance_pair(const Coupling& cpl, const Coupling& other, const SourceParticle& src, double t,
                         const Vec3& x, const LorentzTransform& L)
{
    const auto a = lw_potential(cpl, src, t, x).raised();
    const FourVector ev = L.apply(FourVector::event(t, x, cpl.c));
    const SourceParticle moved{src.q, transform_worldline(L, src.w, cpl.c)};
    const auto actual = lw_potential(other, moved, ev[0] / cpl.c, ev.spatial()).raised();
    const FourVector predicted = L.apply(FourVector(a[0], a[1], a[2], a[3]));
    Residual r;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        r.value = std::max(r.value, std::abs(predicted[mu] - actual[mu]));
        r.scale = std::max(r.scale, std::abs(actual[mu]));
    }
    return r;
}

} // namespace

SuiteReport covariance_suite(const SuiteOptions& opt)
{
    const std::size_t n = or_default(opt.cases, 50);
    auto sweep = [&](SourceKind kind) {
        const auto res = fan_out<double>(n, opt.threads, [&](std::size_t i) {
            const FieldCase fc = random_field_case(opt.seed, i, kind);
            auto rng = case_rng(opt.seed, i, 200 + static_cast<std::uint64_t>(kind));
            const LorentzTransform L = random_lorentz(rng, 0.9);
            const Coupling other = opt.corrupt_sign ? flipped(fc.cpl) : fc.cpl;
            return covariance_pair(fc.cpl, other, fc.src, fc.t, fc.x, L).relative();
        });
        return *std::max_element(res.begin(), res.end());
    };
    SuiteReport rep;
    rep.name = "covariance";
    rep.cases = 2 * n;
    rep.metrics.push_back({"static_max_relative_residual", sweep(SourceKind::at_rest), 0.0, 1e-9});
    rep.metrics.push_back({"circular_max_relative_residual", sweep(SourceKind::circular), 0.0, 1e-8});
    return rep;
}

SuiteReport run_suite(std::string_view which, const SuiteOptions& opt)
{
    if (which == "normalization") {
        return normalization_suite(opt);
    }
    if (which == "oracle") {
        return oracle_suite(opt);
    }
    if (which == "gauge") {
        return gauge_suite(opt);
    }
    if (which == "bianchi") {
        return bianchi_suite(opt);
    }
    if (which == "maxwell") {
        return maxwell_suite(opt);
    }
    if (which == "covariance") {
        return covariance_suite(opt);
    }
    throw DomainError("unknown check suite '" + std::string(which) +
                      "' (expected normalization, gauge, bianchi, maxwell, covariance or oracle)");
}

} // namespace relsim
