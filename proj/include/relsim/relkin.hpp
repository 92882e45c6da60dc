#pragma once

// Minkowski-space kinematics with signature (+,-,-,-) and x^0 = ct.

#include <array>
#include <cstddef>

#include "relsim/tolerances.hpp"
#include "relsim/vec.hpp"

namespace relsim {

/// Contravariant four-component quantity. For events x^0 = c t in length
/// units; the same type carries dimensionless four-velocities.
class FourVector {
public:
    constexpr FourVector() = default;
    FourVector(double x0, double x1, double x2, double x3);
    FourVector(double x0, const Vec3& spatial);

    /// Event at coordinate time t and position x.
    static FourVector event(double t, const Vec3& x, double c);

    constexpr double operator[](std::size_t mu) const { return c_[mu]; }
    constexpr double& operator[](std::size_t mu) { return c_[mu]; }
    [[nodiscard]] Vec3 spatial() const { return {c_[1], c_[2], c_[3]}; }
    [[nodiscard]] const std::array<double, 4>& components() const { return c_; }

    friend bool operator==(const FourVector&, const FourVector&) = default;

private:
    std::array<double, 4> c_{};
};

/// Diagonal of the metric, eta_{mu mu} = eta^{mu mu}.
constexpr double metric(std::size_t mu) { return mu == 0 ? 1.0 : -1.0; }

double minkowski_inner(const FourVector& a, const FourVector& b);

/// Coordinate 3-velocity with |v| < c enforced on construction.
class ThreeVelocity {
public:
    /// Throws DomainError if |v| >= c, c <= 0 or v is not finite.
    ThreeVelocity(const Vec3& v, double c);

    [[nodiscard]] const Vec3& vec() const { return v_; }
    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] double speed() const { return norm(v_); }
    [[nodiscard]] double beta() const { return norm(v_) / c_; }

private:
    Vec3 v_;
    double c_;
};

/// (1 - |v|^2/c^2)^(-1/2). The proper-time rate dt/ds is this divided by c.
double gamma_tilde(const ThreeVelocity& v);

/// Dimensionless u^mu = (gamma, gamma v / c); u.u = 1.
FourVector four_velocity(const ThreeVelocity& v);

using Matrix4 = std::array<std::array<double, 4>, 4>;

/// Element of the orthochronous Lorentz group, stored as Lambda^mu_nu with
/// mu the row index.
class LorentzTransform {
public:
    /// Identity.
    LorentzTransform();
    /// Validates L^T eta L = eta per component within `membership_tol` and
    /// Lambda^0_0 >= 1; throws DomainError otherwise.
    explicit LorentzTransform(const Matrix4& lambda, double membership_tol = Tolerances{}.lorentz_membership);

    [[nodiscard]] double operator()(std::size_t mu, std::size_t nu) const { return m_[mu][nu]; }
    [[nodiscard]] const Matrix4& matrix() const { return m_; }
    [[nodiscard]] bool is_identity() const;

    [[nodiscard]] FourVector apply(const FourVector& x) const;
    /// Transforms lower-index components: A'_mu = eta Lambda eta A.
    [[nodiscard]] std::array<double, 4> apply_covector(const std::array<double, 4>& a) const;
    [[nodiscard]] LorentzTransform inverse() const;

    /// Largest per-component deviation of L^T eta L from eta.
    [[nodiscard]] double membership_residual() const;

    friend LorentzTransform operator*(const LorentzTransform& a, const LorentzTransform& b);

private:
    struct Unchecked {};
    LorentzTransform(const Matrix4& lambda, Unchecked) : m_(lambda) {}

    Matrix4 m_;
};

/// Pure boost with velocity beta (units of c). Throws DomainError for |beta| >= 1.
LorentzTransform boost(const Vec3& beta);

/// Spatial rotation by `angle` radians about `axis` (right-handed, passive
/// components rotate with the frame held fixed).
LorentzTransform rotation(const Vec3& axis, double angle);

} // namespace relsim
