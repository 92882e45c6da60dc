#include "relsim/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "relsim/errors.hpp"

namespace relsim {

namespace {

using Grad = std::array<std::array<double, 4>, 4>;

Vec3 unit(std::size_t i)
{
    Vec3 e;
    e[i] = 1.0;
    return e;
}

/// Event (t, x) displaced by `delta` along coordinate x^mu.
std::pair<double, Vec3> shifted(double c, double t, const Vec3& x, std::size_t mu, double delta)
{
    if (mu == 0) {
        return {t + delta / c, x};
    }
    return {t, x + unit(mu - 1) * delta};
}

} // namespace

void Coupling::validate() const
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("Coupling: c must be positive and finite");
    }
    if (!std::isfinite(K)) {
        throw DomainError("Coupling: K must be finite");
    }
}

FieldTensor FieldTensor::from_gradient(const Grad& d)
{
    FieldTensor f;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        for (std::size_t nu = mu + 1; nu < 4; ++nu) {
            f.f_[slot(mu, nu)] = d[mu][nu] - d[nu][mu];
        }
    }
    return f;
}

std::size_t FieldTensor::slot(std::size_t mu, std::size_t nu)
{
    // (mu < nu) -> 01 02 03 12 13 23
    static constexpr std::size_t table[4][4] = {{6, 0, 1, 2}, {0, 6, 3, 4}, {1, 3, 6, 5}, {2, 4, 5, 6}};
    return table[mu][nu];
}

double FieldTensor::operator()(std::size_t mu, std::size_t nu) const
{
    if (mu == nu) {
        return 0.0;
    }
    const double v = f_[slot(mu, nu)];
    return mu < nu ? v : -v;
}

void FieldTensor::set(std::size_t mu, std::size_t nu, double value)
{
    if (mu == nu) {
        throw DomainError("FieldTensor: diagonal components are identically zero");
    }
    f_[slot(mu, nu)] = mu < nu ? value : -value;
}

double FieldTensor::max_abs() const
{
    double m = 0.0;
    for (double v : f_) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

FieldTensor& FieldTensor::operator+=(const FieldTensor& o)
{
    for (std::size_t i = 0; i < f_.size(); ++i) {
        f_[i] += o.f_[i];
    }
    return *this;
}

FourPotential lw_potential(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x)
{
    if (src.q == 0.0) {
        return {};
    }
    const RetardedEvent ev = retarded_state(cpl.c, t, x, src.w, cpl.tol);
    const double kappa = src.q * cpl.potential_constant();
    const Vec3& v = ev.source.vel;
    // A_mu = eta_{mu mu} q K (dx^mu/dt') / (c r - r.v), dx^0/dt' = c
    FourPotential a;
    a[0] = kappa * cpl.c / ev.denom;
    a[1] = -kappa * v.x / ev.denom;
    a[2] = -kappa * v.y / ev.denom;
    a[3] = -kappa * v.z / ev.denom;
    return a;
}

PotentialGradient lw_potential_gradient(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x)
{
    return lw_potential_gradient(cpl, src.q, src.w, t, x);
}

PotentialGradient lw_potential_gradient(const Coupling& cpl, double q, const WorldLine& w, double t, const Vec3& x)
{
    PotentialGradient out;
    out.ret = retarded_state(cpl.c, t, x, w, cpl.tol);
    if (q == 0.0) {
        return out;
    }
    const double c = cpl.c;
    const RetardedEvent& ev = out.ret;
    const Vec3& v = ev.source.vel;
    const Vec3& acc = ev.source.acc;
    const double D = ev.denom;
    const double kappa = q * cpl.potential_constant();

    const std::array<double, 4> U{c, v.x, v.y, v.z};
    for (std::size_t nu = 0; nu < 4; ++nu) {
        out.a[nu] = metric(nu) * kappa * U[nu] / D;
    }

    for (std::size_t mu = 0; mu < 4; ++mu) {
        // dt'/dx^mu from the retardation constraint
        const double dtp = (mu == 0) ? ev.r / D : -ev.r_vec[mu - 1] / D;
        Vec3 drv = v * (-dtp);
        if (mu > 0) {
            drv[mu - 1] += 1.0;
        }
        // r = x^0 - c t'
        const double dr = (mu == 0 ? 1.0 : 0.0) - c * dtp;
        const Vec3 dv = acc * dtp;
        const double dD = c * dr - dot(drv, v) - dot(ev.r_vec, dv);
        const std::array<double, 4> dU{0.0, dv.x, dv.y, dv.z};
        for (std::size_t nu = 0; nu < 4; ++nu) {
            out.d[mu][nu] = metric(nu) * kappa * (dU[nu] * D - U[nu] * dD) / (D * D);
        }
    }
    return out;
}

FieldTensor lw_field(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x)
{
    return FieldTensor::from_gradient(lw_potential_gradient(cpl, src.q, src.w, t, x).d);
}

FieldTensor lw_field(const Coupling& cpl, double q, const WorldLine& w, double t, const Vec3& x)
{
    return FieldTensor::from_gradient(lw_potential_gradient(cpl, q, w, t, x).d);
}

double field_length_scale(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x)
{
    const RetardedEvent ev = retarded_state(cpl.c, t, x, src.w, cpl.tol);
    const double acc = norm(ev.source.acc);
    if (acc == 0.0) {
        return ev.r;
    }
    return std::min(ev.r, ev.denom / ev.r * cpl.c / acc);
}

double default_fd_step(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x)
{
    return std::cbrt(std::numeric_limits<double>::epsilon()) * field_length_scale(cpl, src, t, x);
}

namespace {

void require_stencil(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h)
{
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw DomainError("finite-difference step must be positive");
    }
    const RetardedEvent ev = retarded_state(cpl.c, t, x, src.w, cpl.tol);
    if (h >= 0.5 * ev.r) {
        std::ostringstream os;
        os << "finite-difference step " << h << " reaches the source (r = " << ev.r << ")";
        throw SingularField(os.str());
    }
}

} // namespace

Grad fd_potential_gradient(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h)
{
    require_stencil(cpl, src, t, x, h);
    Grad d{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        const auto [tp, xp] = shifted(cpl.c, t, x, mu, h);
        const auto [tm, xm] = shifted(cpl.c, t, x, mu, -h);
        const FourPotential ap = lw_potential(cpl, src, tp, xp);
        const FourPotential am = lw_potential(cpl, src, tm, xm);
        for (std::size_t nu = 0; nu < 4; ++nu) {
            d[mu][nu] = (ap[nu] - am[nu]) / (2.0 * h);
        }
    }
    return d;
}

FieldTensor fd_field(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h)
{
    return FieldTensor::from_gradient(fd_potential_gradient(cpl, src, t, x, h));
}

FieldGradient fd_field_gradient(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h)
{
    require_stencil(cpl, src, t, x, h);
    FieldGradient g{};
    for (std::size_t mu = 0; mu < 4; ++mu) {
        const auto [tp, xp] = shifted(cpl.c, t, x, mu, h);
        const auto [tm, xm] = shifted(cpl.c, t, x, mu, -h);
        const FieldTensor fp = lw_field(cpl, src, tp, xp);
        const FieldTensor fm = lw_field(cpl, src, tm, xm);
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = 0; b < 4; ++b) {
                g[mu][a][b] = (fp(a, b) - fm(a, b)) / (2.0 * h);
            }
        }
    }
    return g;
}

double max_abs(const FieldGradient& g)
{
    double m = 0.0;
    for (const auto& plane : g) {
        for (const auto& row : plane) {
            for (double v : row) {
                m = std::max(m, std::abs(v));
            }
        }
    }
    return m;
}

Residual gauge_divergence(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h)
{
    const Grad d = fd_potential_gradient(cpl, src, t, x, h);
    Residual r;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        r.value += metric(mu) * d[mu][mu];
        r.scale += std::abs(d[mu][mu]);
    }
    return r;
}

Residual bianchi_residual(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x, double h,
                          std::array<std::size_t, 3> idx)
{
    const auto [l, m, n] = idx;
    if (l > 3 || m > 3 || n > 3 || l == m || m == n || l == n) {
        throw DomainError("bianchi_residual: indices must be distinct and in 0..3");
    }
    const FieldGradient g = fd_field_gradient(cpl, src, t, x, h);
    return {g[l][m][n] + g[m][n][l] + g[n][l][m], max_abs(g)};
}

std::array<Residual, 4> vacuum_maxwell_residual(const Coupling& cpl, const SourceParticle& src, double t,
                                                const Vec3& x, double h)
{
    const RetardedEvent ev = retarded_state(cpl.c, t, x, src.w, cpl.tol);
    if (ev.r < 10.0 * h) {
        throw DomainError("vacuum_maxwell_residual: observer is within 10 h of the source");
    }
    const FieldGradient g = fd_field_gradient(cpl, src, t, x, h);
    const double scale = max_abs(g);
    std::array<Residual, 4> out{};
    for (std::size_t nu = 0; nu < 4; ++nu) {
        double s = 0.0;
        for (std::size_t mu = 0; mu < 4; ++mu) {
            s += metric(mu) * g[mu][mu][nu];
        }
        out[nu] = {s, scale};
    }
    return out;
}

Residual covariance_check(const Coupling& cpl, const SourceParticle& src, double t, const Vec3& x,
                          const LorentzTransform& L)
{
    const FourPotential a = lw_potential(cpl, src, t, x);
    const FourVector ev = L.apply(FourVector::event(t, x, cpl.c));
    const SourceParticle moved{src.q, transform_worldline(L, src.w, cpl.c)};
    const FourPotential a2 = lw_potential(cpl, moved, ev[0] / cpl.c, ev.spatial());

    const FourVector predicted = L.apply(FourVector(a.raised()[0], a.raised()[1], a.raised()[2], a.raised()[3]));
    const auto actual = a2.raised();
    Residual r;
    for (std::size_t mu = 0; mu < 4; ++mu) {
        r.value = std::max(r.value, std::abs(predicted[mu] - actual[mu]));
        r.scale = std::max(r.scale, std::abs(actual[mu]));
    }
    return r;
}

} // namespace relsim
