#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "relsim/errors.hpp"
#include "relsim/fields.hpp"

using namespace relsim;

namespace {

Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Vec3 v{n(rng), n(rng), n(rng)};
    return v / norm(v);
}

Coupling literal(double K = 1.0, double c = 1.0)
{
    Coupling cpl;
    cpl.c = c;
    cpl.K = K;
    cpl.sign = SignConvention::paper_literal;
    return cpl;
}

SourceParticle circular_source(double q = 1.0, double omega = 0.6)
{
    AnalyticCircular ac;
    ac.radius = 1.0;
    ac.omega = omega;
    ac.e1 = Vec3{1, 1, 0} / std::sqrt(2.0);
    ac.e2 = Vec3{0, 0, 1};
    return {q, WorldLine::circular(ac, 1.0)};
}

double max_diff(const FieldTensor& a, const FieldTensor& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
        }
    }
    return m;
}

} // namespace

TEST_CASE("static source potential is exactly qK/r under the literal convention")
{
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> logr(-3.0, 3.0);
    const double q = 1.7;
    const double K = 0.8;
    const SourceParticle src{q, WorldLine::at_rest({}, 1.0)};
    for (int i = 0; i < 100; ++i) {
        const double r = std::pow(10.0, logr(rng));
        const FourPotential a = lw_potential(literal(K), src, 3.0, random_unit(rng) * r);
        CHECK(std::abs(a[0] - q * K / r) <= 1e-14 * (q * K / r));
        CHECK(a[1] == 0.0);
        CHECK(a[2] == 0.0);
        CHECK(a[3] == 0.0);
    }
}

TEST_CASE("coulomb-consistent convention flips the potential sign")
{
    Coupling cpl;
    const SourceParticle src{1.0, WorldLine::at_rest({}, 1.0)};
    CHECK(lw_potential(cpl, src, 0.0, {1, 0, 0})[0] == doctest::Approx(-1.0));
    CHECK(lw_potential(literal(), src, 0.0, {1, 0, 0})[0] == doctest::Approx(1.0));
}

TEST_CASE("uncharged source has no potential")
{
    const SourceParticle src{0.0, WorldLine::at_rest({}, 1.0)};
    const FourPotential a = lw_potential(literal(), src, 0.0, {0, 0, 0});
    for (std::size_t mu = 0; mu < 4; ++mu) {
        CHECK(a[mu] == 0.0);
    }
}

TEST_CASE("static source field is radial")
{
    const double q = -2.0;
    const double K = 1.5;
    const SourceParticle src{q, WorldLine::at_rest({}, 1.0)};
    const Vec3 x{1.0, -2.0, 0.5};
    const double r = norm(x);
    const FieldTensor F = lw_field(literal(K), src, 0.0, x);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(F(i, 0) == doctest::Approx(-q * K * x[i - 1] / (r * r * r)).epsilon(1e-14));
        CHECK(F(0, i) == -F(i, 0));
    }
    CHECK(F(1, 2) == 0.0);
    CHECK(F(1, 3) == 0.0);
    CHECK(F(2, 3) == 0.0);
}

TEST_CASE("uniformly moving source equals the boosted static potential")
{
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double c = 1.0;
        const Vec3 v = random_unit(rng) * (0.9 * std::abs(u(rng)));
        const SourceParticle src{1.3, WorldLine::inertial({0.0, {}, v}, c)};
        const double t = 5.0 * u(rng);
        const Vec3 x = random_unit(rng) * (0.5 + 10.0 * std::abs(u(rng))) + v * t;
        const FourPotential a = lw_potential(literal(0.7), src, t, x);
        const auto expect = oracle::boosted_coulomb(1.3 * 0.7, c, t, x, v);
        double scale = 0.0;
        double diff = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            scale = std::max(scale, std::abs(expect[mu]));
            diff = std::max(diff, std::abs(a[mu] - expect[mu]));
        }
        CHECK(diff <= 1e-10 * scale);
    }
}

TEST_CASE("field tensor is antisymmetric on read")
{
    const FieldTensor F = lw_field(literal(), circular_source(), 2.0, {3, 1, -2});
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(F(i, i) == 0.0);
        for (std::size_t j = 0; j < 4; ++j) {
            CHECK(F(i, j) + F(j, i) == 0.0);
        }
    }
    FieldTensor G;
    CHECK_THROWS_AS(G.set(2, 2, 1.0), DomainError);
}

TEST_CASE("analytic field agrees with finite differences of the potential")
{
    const Coupling cpl = literal();
    for (const auto& src : {circular_source(), SourceParticle{1.0, WorldLine::inertial({0, {}, {0.5, -0.3, 0.2}}, 1.0)}}) {
        for (double t : {-3.0, 0.4, 7.0}) {
            for (const Vec3& x : {Vec3{3, 0, 0}, Vec3{-5, 8, 1}, Vec3{20, -20, 15}}) {
                const FieldTensor an = lw_field(cpl, src, t, x);
                const FieldTensor fd = fd_field(cpl, src, t, x, default_fd_step(cpl, src, t, x));
                CHECK(max_diff(an, fd) <= std::max(1e-6 * an.max_abs(), 1e-9));
            }
        }
    }
}

TEST_CASE("finite-difference field of a static source converges at second order")
{
    const Coupling cpl = literal();
    const SourceParticle src{1.0, WorldLine::at_rest({}, 1.0)};
    const Vec3 x{1.0, 0.5, -0.3};
    const FieldTensor exact = lw_field(cpl, src, 0.0, x);
    const double e1 = max_diff(fd_field(cpl, src, 0.0, x, 0.02), exact);
    const double e2 = max_diff(fd_field(cpl, src, 0.0, x, 0.01), exact);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("finite-difference stencil may not reach the source")
{
    const SourceParticle src{1.0, WorldLine::at_rest({}, 1.0)};
    CHECK_THROWS_AS(fd_field(literal(), src, 0.0, {1, 0, 0}, 0.5), SingularField);
    CHECK_THROWS_AS(gauge_divergence(literal(), src, 0.0, {1, 0, 0}, 0.6), SingularField);
}

TEST_CASE("lorenz gauge")
{
    const Coupling cpl = literal();
    const SourceParticle rest{2.0, WorldLine::at_rest({}, 1.0)};
    const Vec3 x{2.0, 1.0, 0.0};
    const double a0 = lw_potential(cpl, rest, 0.0, x)[0];
    CHECK(std::abs(gauge_divergence(cpl, rest, 0.0, x, 1e-3).value) <= 1e-10 * a0 / norm(x));

    const SourceParticle src = circular_source();
    const Vec3 y{4.0, -3.0, 2.0};
    CHECK(gauge_divergence(cpl, src, 1.0, y, default_fd_step(cpl, src, 1.0, y)).relative() <= 1e-6);
    const double coarse = std::abs(gauge_divergence(cpl, src, 1.0, y, 0.02).value);
    const double fine = std::abs(gauge_divergence(cpl, src, 1.0, y, 0.01).value);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("homogeneous maxwell equations")
{
    const Coupling cpl = literal();
    const std::array<std::array<std::size_t, 3>, 4> triples{{{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}}};
    const SourceParticle rest{1.0, WorldLine::at_rest({}, 1.0)};
    const SourceParticle src = circular_source();
    const Vec3 x{2.0, -1.0, 2.5};
    for (const auto& idx : triples) {
        CHECK(std::abs(bianchi_residual(cpl, rest, 0.0, x, default_fd_step(cpl, rest, 0.0, x), idx).value) <= 1e-9);
        CHECK(bianchi_residual(cpl, src, 0.5, x, default_fd_step(cpl, src, 0.5, x), idx).relative() <= 1e-6);
        const double coarse = std::abs(bianchi_residual(cpl, src, 0.5, x, 0.02, idx).value);
        const double fine = std::abs(bianchi_residual(cpl, src, 0.5, x, 0.01, idx).value);
        CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.1));
    }
    CHECK_THROWS_AS(bianchi_residual(cpl, src, 0.5, x, 0.01, {0, 0, 1}), DomainError);
}

TEST_CASE("vacuum maxwell equations off the source")
{
    const Coupling cpl = literal();
    const SourceParticle rest{1.0, WorldLine::at_rest({}, 1.0)};
    const SourceParticle src = circular_source();
    const Vec3 x{-3.0, 1.0, 2.0};
    for (const auto& r : vacuum_maxwell_residual(cpl, rest, 0.0, x, default_fd_step(cpl, rest, 0.0, x))) {
        CHECK(std::abs(r.value) <= 1e-9);
    }
    const auto fine = vacuum_maxwell_residual(cpl, src, 0.5, x, 0.01);
    const auto coarse = vacuum_maxwell_residual(cpl, src, 0.5, x, 0.02);
    const auto tiny = vacuum_maxwell_residual(cpl, src, 0.5, x, default_fd_step(cpl, src, 0.5, x));
    for (std::size_t nu = 0; nu < 4; ++nu) {
        CHECK(tiny[nu].relative() <= 1e-6);
        CHECK(std::abs(coarse[nu].value / fine[nu].value) == doctest::Approx(4.0).epsilon(0.1));
    }
    CHECK_THROWS_AS(vacuum_maxwell_residual(cpl, rest, 0.0, {1, 0, 0}, 0.2), DomainError);
}

TEST_CASE("potential transforms as a covector")
{
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Coupling cpl = literal();
    const SourceParticle rest{1.0, WorldLine::at_rest({0.2, 0.1, 0}, 1.0)};
    const SourceParticle circ = circular_source();
    CHECK(covariance_check(cpl, circ, 1.0, {3, 2, 1}, LorentzTransform{}).value == 0.0);
    for (int i = 0; i < 20; ++i) {
        const Vec3 b = random_unit(rng) * (0.9 * std::abs(u(rng)));
        const LorentzTransform L = boost(b);
        const Vec3 x = random_unit(rng) * 6.0;
        CHECK(covariance_check(cpl, rest, 2.0 * u(rng), x, L).relative() <= 1e-9);
        CHECK(covariance_check(cpl, circ, 2.0 * u(rng), x, L).relative() <= 1e-8);
    }
}

TEST_CASE("potential and field are linear in charge and coupling")
{
    const SourceParticle one = circular_source(1.0);
    const SourceParticle two = circular_source(2.0);
    const Vec3 x{3, -4, 1};
    const FieldTensor f1 = lw_field(literal(1.0), one, 0.3, x);
    const FieldTensor f2 = lw_field(literal(1.0), two, 0.3, x);
    const FieldTensor f3 = lw_field(literal(3.0), one, 0.3, x);
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = i + 1; j < 4; ++j) {
            CHECK(f2(i, j) == doctest::Approx(2.0 * f1(i, j)).epsilon(1e-15));
            CHECK(f3(i, j) == doctest::Approx(3.0 * f1(i, j)).epsilon(1e-15));
        }
    }
}
