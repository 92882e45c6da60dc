#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "relsim/errors.hpp"
#include "relsim/relkin.hpp"

using namespace relsim;

namespace {

Vec3 random_unit(std::mt19937_64& rng)
{
    std::normal_distribution<double> n;
    Vec3 v{n(rng), n(rng), n(rng)};
    return v / norm(v);
}

FourVector random_four(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> u(-3.0, 3.0);
    return {u(rng), u(rng), u(rng), u(rng)};
}

double max_dev_from_identity(const LorentzTransform& L)
{
    double m = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            m = std::max(m, std::abs(L(a, b) - (a == b ? 1.0 : 0.0)));
        }
    }
    return m;
}

} // namespace

TEST_CASE("minkowski inner product of unit and null vectors")
{
    CHECK(minkowski_inner({1, 0, 0, 0}, {1, 0, 0, 0}) == 1.0);
    CHECK(minkowski_inner({1, 1, 0, 0}, {1, 1, 0, 0}) == 0.0);
    CHECK(minkowski_inner({2, 1, 1, 1}, {1, 0, 0, 1}) == 1.0);
}

TEST_CASE("four vector rejects non-finite components")
{
    CHECK_THROWS_AS(FourVector(std::nan(""), 0, 0, 0), DomainError);
    CHECK_THROWS_AS(FourVector(0, std::numeric_limits<double>::infinity(), 0, 0), DomainError);
}

TEST_CASE("gamma factor")
{
    CHECK(gamma_tilde(ThreeVelocity({0, 0, 0}, 1.0)) == 1.0);
    CHECK(gamma_tilde(ThreeVelocity({0.6, 0, 0}, 1.0)) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(gamma_tilde(ThreeVelocity({0, 0.6 * 3e8, 0}, 3e8)) == doctest::Approx(1.25).epsilon(1e-15));
    CHECK_THROWS_AS(ThreeVelocity({1.0, 0, 0}, 1.0), DomainError);
    CHECK_THROWS_AS(ThreeVelocity({0.8, 0.8, 0}, 1.0), DomainError);
}

TEST_CASE("four velocity at 0.6c")
{
    const FourVector u = four_velocity(ThreeVelocity({0.6, 0, 0}, 1.0));
    CHECK(u[0] == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(u[1] == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(u[2] == 0.0);
    CHECK(std::abs(minkowski_inner(u, u) - 1.0) <= 1e-14);

    const FourVector rest = four_velocity(ThreeVelocity({0, 0, 0}, 7.0));
    CHECK(rest[0] == 1.0);
    CHECK(rest[1] == 0.0);
}

TEST_CASE("four velocity normalization over random subluminal velocities")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> speed(0.0, 0.9);
    std::uniform_real_distribution<double> logc(-5.0, 10.0);
    double worst = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const double c = std::pow(10.0, logc(rng));
        const FourVector u = four_velocity(ThreeVelocity(random_unit(rng) * (speed(rng) * c), c));
        worst = std::max(worst, std::abs(minkowski_inner(u, u) - 1.0));
    }
    CHECK(worst <= 1e-14);
}

TEST_CASE("boost along x maps the time axis")
{
    const FourVector x = boost({0.6, 0, 0}).apply({1, 0, 0, 0});
    CHECK(x[0] == doctest::Approx(1.25).epsilon(1e-15));
    CHECK(x[1] == doctest::Approx(-0.75).epsilon(1e-15));
    CHECK(x[2] == 0.0);
    CHECK(x[3] == 0.0);
}

TEST_CASE("zero boost is the identity and superluminal boosts are rejected")
{
    CHECK(boost({0, 0, 0}).is_identity());
    CHECK_THROWS_AS(boost({1.0, 0, 0}), DomainError);
    CHECK_THROWS_AS(boost({0.6, 0.9, 0}), DomainError);
}

TEST_CASE("boost and its opposite compose to the identity")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mag(0.0, 0.95);
    for (int i = 0; i < 200; ++i) {
        const Vec3 b = random_unit(rng) * mag(rng);
        CHECK(max_dev_from_identity(boost(b) * boost(-b)) <= 1e-12);
        CHECK(max_dev_from_identity(boost(b) * boost(b).inverse()) <= 1e-12);
    }
}

TEST_CASE("collinear boosts compose by relativistic velocity addition")
{
    for (const auto& [b1, b2] : {std::pair{0.3, 0.5}, std::pair{0.9, 0.9}, std::pair{-0.7, 0.2}}) {
        const double sum = (b1 + b2) / (1.0 + b1 * b2);
        const LorentzTransform composed = boost({0, b1, 0}) * boost({0, b2, 0});
        const LorentzTransform direct = boost({0, sum, 0});
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t c = 0; c < 4; ++c) {
                CHECK(composed(a, c) == doctest::Approx(direct(a, c)).epsilon(1e-12).scale(1.0));
            }
        }
    }
}

TEST_CASE("inner products are invariant under random boosts")
{
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> mag(0.0, 0.9);
    for (int i = 0; i < 500; ++i) {
        const LorentzTransform L = boost(random_unit(rng) * mag(rng));
        const FourVector a = random_four(rng);
        const FourVector b = random_four(rng);
        const FourVector la = L.apply(a);
        const FourVector lb = L.apply(b);
        double scale = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            scale += std::abs(la[mu] * lb[mu]);
        }
        CHECK(std::abs(minkowski_inner(la, lb) - minkowski_inner(a, b)) <= 1e-12 * scale);
    }
}

TEST_CASE("compositions of generated transforms stay in the group")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> mag(0.0, 0.9);
    std::uniform_real_distribution<double> ang(0.0, 6.283185307179586);
    for (int i = 0; i < 200; ++i) {
        const LorentzTransform L = boost(random_unit(rng) * mag(rng)) * rotation(random_unit(rng), ang(rng)) *
                                   boost(random_unit(rng) * mag(rng));
        CHECK(L.membership_residual() <= 1e-11);
        CHECK(L(0, 0) >= 1.0);
    }
}

TEST_CASE("lorentz transform constructor validates membership and time orientation")
{
    Matrix4 parity{{{1, 0, 0, 0}, {0, -1, 0, 0}, {0, 0, -1, 0}, {0, 0, 0, -1}}};
    CHECK_NOTHROW(LorentzTransform{parity});
    Matrix4 reversal{{{-1, 0, 0, 0}, {0, 1, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    CHECK_THROWS_AS(LorentzTransform{reversal}, DomainError);
    Matrix4 stretch{{{1, 0, 0, 0}, {0, 2, 0, 0}, {0, 0, 1, 0}, {0, 0, 0, 1}}};
    CHECK_THROWS_AS(LorentzTransform{stretch}, DomainError);
}

TEST_CASE("covector contraction is frame independent")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> mag(0.0, 0.9);
    for (int i = 0; i < 100; ++i) {
        const LorentzTransform L = boost(random_unit(rng) * mag(rng));
        const FourVector x = random_four(rng);
        const FourVector lower = random_four(rng);
        const std::array<double, 4> a{lower[0], lower[1], lower[2], lower[3]};
        const auto a2 = L.apply_covector(a);
        const FourVector x2 = L.apply(x);
        double before = 0.0;
        double after = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            before += a[mu] * x[mu];
            after += a2[mu] * x2[mu];
        }
        CHECK(after == doctest::Approx(before).epsilon(1e-11).scale(10.0));
    }
}

TEST_CASE("rotations keep time and spatial length")
{
    const LorentzTransform R = rotation({0, 0, 1}, 0.5 * 3.141592653589793);
    const FourVector x = R.apply({2.0, 1.0, 0.0, 3.0});
    CHECK(x[0] == 2.0);
    CHECK(std::hypot(x[1], x[2]) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(x[3] == 3.0);
    CHECK(R.membership_residual() <= 1e-15);
}
