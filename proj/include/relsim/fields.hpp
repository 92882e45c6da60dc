#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "relsim/relkin.hpp"
#include "relsim/retard.hpp"
#include "relsim/tolerances.hpp"
#include "relsim/worldline.hpp"

namespace relsim {

/// How the interaction constant enters the potential.
///
/// The verbatim potential combined with the Lorentz-force law yields a static
/// force -q q' K x / r^3, the opposite sign of the static Coulomb law
/// m x'' = q grad U with Laplacian U = 4 pi q' K delta. `coulomb_consistent`
/// uses -K inside the potential so the static limit is exactly that law and
/// K = -G attracts. `paper_literal` keeps the formulas as written.
enum class SignConvention { coulomb_consistent, paper_literal };

struct Coupling {
    double c = 1.0;
    double K = 1.0;
    SignConvention sign = SignConvention::coulomb_consistent;
    Tolerances tol;

    /// Constant multiplying q in the potential.
    [[nodiscard]] double potential_constant() const { return sign == SignConvention::coulomb_consistent ? -K : K; }
    /// Throws DomainError unless c is positive and K finite.
    void validate() const;
};

struct SourceParticle {
    double q = 0.0;
    WorldLine w;
};

/// Lower-index four-potential A_mu.
struct FourPotential {
    std::array<double, 4> a{};
    double operator[](std::size_t mu) const { return a[mu]; }
    double& operator[](std::size_t mu) { return a[mu]; }
    /// A^mu = eta^{mu mu} A_mu.
    [[nodiscard]] std::array<double, 4> raised() const { return {a[0], -a[1], -a[2], -a[3]}; }
};

/// Antisymmetric F_{mu nu}; six independent components, expanded on read.
class FieldTensor {
public:
    FieldTensor() = default;
    /// Antisymmetric part (M - M^T) of a full matrix, i.e. F_{mu nu} = M[mu][nu] - M[nu][mu].
    static FieldTensor from_gradient(const std::array<std::array<double, 4>, 4>& d);

    [[nodiscard]] double operator()(std::size_t mu, std::size_t nu) const;
    void set(std::size_t mu, std::size_t nu, double value);
    [[nodiscard]] double max_abs() const;

    FieldTensor& operator+=(const FieldTensor& o);

private:
    static std::size_t slot(std::size_t mu, std::size_t nu);
    std::array<double, 6> f_{}; // 01 02 03 12 13 23
};

/// Potential with its analytic observer-coordinate gradient d[mu][nu] = dA_nu/dx^mu.
struct PotentialGradient {
    FourPotential a;
    std::array<std::array<double, 4>, 4> d{};
    RetardedEvent ret;
};

/// Lienard-Wiechert potential of `src` at the event (t, x).
FourPotential lw_potential(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x);

/// Potential and its gradient. Derivatives through the retarded time come
/// from implicit differentiation of c (t - t') = |x - x_src(t')|.
PotentialGradient lw_potential_gradient(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x);
PotentialGradient lw_potential_gradient(const Coupling& cpl, double q, const WorldLine& w, double t, const Vec3& x);

/// F_{mu nu} = dA_nu/dx^mu - dA_mu/dx^nu, analytic.
FieldTensor lw_field(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x);
FieldTensor lw_field(const Coupling& cpl, double q, const WorldLine& w, double t, const Vec3& x);

/// Distance over which the field varies: the retarded distance r, or for an
/// accelerated source c^2 (1 - n.beta) / |a| when that is shorter.
double field_length_scale(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x);

/// eps^(1/3) times field_length_scale.
double default_fd_step(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x);

/// Central-difference gradient dA_nu/dx^mu with step h (x^0 steps are h/c in time).
/// Throws SingularField if h >= r/2.
std::array<std::array<double, 4>, 4> fd_potential_gradient(const Coupling& cpl, const SourceParticle& src, double t,
                                                           const Vec3& x, double h);

/// Field tensor from central differences of the potential.
FieldTensor fd_field(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h);

/// A residual with the magnitude of the terms that cancel into it.
struct Residual {
    double value = 0.0;
    double scale = 0.0;
    [[nodiscard]] double relative() const { return scale > 0.0 ? std::abs(value) / scale : std::abs(value); }
};

/// Central-difference d_mu F_{alpha beta} of the analytic field: g[mu][alpha][beta].
using FieldGradient = std::array<std::array<std::array<double, 4>, 4>, 4>;
FieldGradient fd_field_gradient(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h);
double max_abs(const FieldGradient& g);

/// sum_mu eta^{mu mu} dA_mu/dx^mu by central differences; scale is the sum of |terms|.
Residual gauge_divergence(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h);

/// d_l F_{mn} + d_m F_{nl} + d_n F_{lm}; indices must be distinct. Scale is the
/// largest field-gradient component.
Residual bianchi_residual(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h,
                          std::array<std::size_t, 3> idx);

/// sum_mu eta^{mu mu} d_mu F_{mu nu} for nu = 0..3, off the world line. Scale is
/// the largest field-gradient component. Throws DomainError if the observer is
/// closer than 10 h to the retarded source position.
std::array<Residual, 4> vacuum_maxwell_residual(const Coupling& cpl, const SourceParticle& src, double t,
                                                const Vec3& x, double h);

/// Max-norm of Lambda A^mu(x) - A'^mu(Lambda x), where A' is computed from the
/// transformed world line. Scale is max |A'^mu|.
Residual covariance_check(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x,
                          const LorentzTransform& L);

} // namespace relsim
