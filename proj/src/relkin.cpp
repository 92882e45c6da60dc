#include "relsim/relkin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relsim/errors.hpp"

namespace relsim {

FourVector::FourVector(double x0, double x1, double x2, double x3) : c_{x0, x1, x2, x3}
{
    for (double v : c_) {
        if (!std::isfinite(v)) {
            throw DomainError("FourVector: non-finite component");
        }
    }
}

FourVector::FourVector(double x0, const Vec3& s) : FourVector(x0, s.x, s.y, s.z) {}

FourVector FourVector::event(double t, const Vec3& x, double c) { return {c * t, x}; }

double minkowski_inner(const FourVector& a, const FourVector& b)
{
    return a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3];
}

ThreeVelocity::ThreeVelocity(const Vec3& v, double c) : v_(v), c_(c)
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("ThreeVelocity: speed of light must be positive and finite");
    }
    if (!is_finite(v)) {
        throw DomainError("ThreeVelocity: non-finite component");
    }
    if (norm2(v) >= c * c) {
        std::ostringstream os;
        os << "ThreeVelocity: |v| = " << norm(v) << " is not below c = " << c;
        throw DomainError(os.str());
    }
}

double gamma_tilde(const ThreeVelocity& v)
{
    const double b2 = norm2(v.vec()) / (v.c() * v.c());
    return 1.0 / std::sqrt(1.0 - b2);
}

FourVector four_velocity(const ThreeVelocity& v)
{
    const double g = gamma_tilde(v);
    return {g, v.vec() * (g / v.c())};
}

LorentzTransform::LorentzTransform()
    : m_{{{1.0, 0.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 0.0}, {0.0, 0.0, 1.0, 0.0}, {0.0, 0.0, 0.0, 1.0}}}
{
}

LorentzTransform::LorentzTransform(const Matrix4& lambda, double membership_tol) : m_(lambda)
{
    for (const auto& row : m_) {
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw DomainError("LorentzTransform: non-finite entry");
            }
        }
    }
    const double res = membership_residual();
    if (res > membership_tol) {
        std::ostringstream os;
        os << "LorentzTransform: L^T eta L deviates from eta by " << res;
        throw DomainError(os.str());
    }
    if (m_[0][0] < 1.0 - membership_tol) {
        throw DomainError("LorentzTransform: not orthochronous (Lambda^0_0 < 1)");
    }
}

bool LorentzTransform::is_identity() const { return m_ == LorentzTransform{}.m_; }

double LorentzTransform::membership_residual() const
{
    double worst = 0.0;
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            double s = 0.0;
            for (std::size_t mu = 0; mu < 4; ++mu) {
                s += m_[mu][a] * metric(mu) * m_[mu][b];
            }
            const double target = (a == b) ? metric(a) : 0.0;
            worst = std::max(worst, std::abs(s - target));
        }
    }
    return worst;
}

FourVector LorentzTransform::apply(const FourVector& x) const
{
    std::array<double, 4> out{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        double s = 0.0;
        for (std::size_t nu = 0; nu < 4; ++nu) {
            s += m_[mu][nu] * x[nu];
        }
        out[mu] = s;
    }
    return {out[0], out[1], out[2], out[3]};
}

std::array<double, 4> LorentzTransform::apply_covector(const std::array<double, 4>& a) const
{
    std::array<double, 4> out{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        double s = 0.0;
        for (std::size_t nu = 0; nu < 4; ++nu) {
            s += m_[mu][nu] * metric(nu) * a[nu];
        }
        out[mu] = metric(mu) * s;
    }
    return out;
}

LorentzTransform LorentzTransform::inverse() const
{
    // Lambda^{-1} = eta Lambda^T eta
    Matrix4 inv{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = 0; nu < 4; ++nu) {
            inv[mu][nu] = metric(mu) * m_[nu][mu] * metric(nu);
        }
    }
    return {inv, Unchecked{}};
}

LorentzTransform operator*(const LorentzTransform& a, const LorentzTransform& b)
{
    Matrix4 p{};
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < 4; ++k) {
                s += a.m_[i][k] * b.m_[k][j];
            }
            p[i][j] = s;
        }
    }
    return {p, LorentzTransform::Unchecked{}};
}

LorentzTransform boost(const Vec3& beta)
{
    if (!is_finite(beta)) {
        throw DomainError("boost: non-finite beta");
    }
    const double b2 = norm2(beta);
    if (b2 >= 1.0) {
        std::ostringstream os;
        os << "boost: |beta| = " << std::sqrt(b2) << " is not below 1";
        throw DomainError(os.str());
    }
    if (b2 == 0.0) {
        return {};
    }
    const double g = 1.0 / std::sqrt(1.0 - b2);
    Matrix4 m{};
    m[0][0] = g;
    for (std::size_t i = 0; i < 3; ++i) {
        m[0][i + 1] = -g * beta[i];
        m[i + 1][0] = -g * beta[i];
        for (std::size_t j = 0; j < 3; ++j) {
            m[i + 1][j + 1] = (i == j ? 1.0 : 0.0) + (g - 1.0) * beta[i] * beta[j] / b2;
        }
    }
    return LorentzTransform(m);
}

LorentzTransform rotation(const Vec3& axis, double angle)
{
    const double n = norm(axis);
    if (!(n > 0.0) || !std::isfinite(n) || !std::isfinite(angle)) {
        throw DomainError("rotation: axis must be a finite non-zero vector");
    }
    const Vec3 k = axis / n;
    const double cs = std::cos(angle);
    const double sn = std::sin(angle);
    // Rodrigues: R = cos I + sin [k]x + (1 - cos) k k^T
    const double kx[3][3] = {{0.0, -k.z, k.y}, {k.z, 0.0, -k.x}, {-k.y, k.x, 0.0}};
    Matrix4 m{};
    m[0][0] = 1.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            m[i + 1][j + 1] = (i == j ? cs : 0.0) + sn * kx[i][j] + (1.0 - cs) * k[i] * k[j];
        }
    }
    return LorentzTransform(m);
}

} // namespace relsim
