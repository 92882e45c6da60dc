#include "relsim/worldline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "relsim/detail/roots.hpp"
#include "relsim/errors.hpp"

namespace relsim {

namespace {

void require_subluminal(const Vec3& v, double c, const char* what)
{
    if (!is_finite(v) || norm2(v) >= c * c) {
        std::ostringstream os;
        os << what << ": speed " << norm(v) << " is not below c = " << c;
        throw DomainError(os.str());
    }
}

KinState hermite(const HistoryNode& a, const HistoryNode& b, double t)
{
    const double h = b.t - a.t;
    const double s = (t - a.t) / h;
    const double s2 = s * s;
    const double s3 = s2 * s;
    const Vec3 dp = b.pos - a.pos;

    // basis: h10 = s^3 - 2s^2 + s, h01 = -2s^3 + 3s^2, h11 = s^3 - s^2
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    const double d10 = 3.0 * s2 - 4.0 * s + 1.0;
    const double d01 = 6.0 * s - 6.0 * s2;
    const double d11 = 3.0 * s2 - 2.0 * s;
    const double dd10 = 6.0 * s - 4.0;
    const double dd01 = 6.0 - 12.0 * s;
    const double dd11 = 6.0 * s - 2.0;

    KinState k;
    k.t = t;
    k.pos = a.pos + dp * h01 + (a.vel * h10 + b.vel * h11) * h;
    k.vel = dp * (d01 / h) + a.vel * d10 + b.vel * d11;
    k.acc = dp * (dd01 / (h * h)) + (a.vel * dd10 + b.vel * dd11) / h;
    return k;
}

KinState inertial_state(const Inertial& w, double t)
{
    return {t, w.pos + w.vel * (t - w.t0), w.vel, {}};
}

KinState circular_state(const AnalyticCircular& w, double t)
{
    const double th = w.omega * t + w.phase;
    const double cs = std::cos(th);
    const double sn = std::sin(th);
    const Vec3 radial = w.e1 * cs + w.e2 * sn;
    const Vec3 tangent = w.e2 * cs - w.e1 * sn;
    return {t, w.center + radial * w.radius, tangent * (w.radius * w.omega),
            radial * (-w.radius * w.omega * w.omega)};
}

KinState transformed_state(const Transformed& tr, double t1)
{
    const auto& L = tr.lambda;
    const double c = tr.c;
    const WorldLine& base = *tr.base;
    const Vec3 l0{L(0, 1), L(0, 2), L(0, 3)};

    // (Lambda x(t))^0 / c - t1, increasing in t for subluminal lines
    auto g = [&](double t) -> std::pair<double, double> {
        const KinState s = base.state(t);
        return {(L(0, 0) * c * t + dot(l0, s.pos)) / c - t1, (L(0, 0) * c + dot(l0, s.vel)) / c};
    };

    double x0 = t1 / L(0, 0);
    if (auto last = base.latest_time(); last && x0 > *last) {
        x0 = *last;
    }
    const auto [g0, dg0] = g(x0);
    const double step0 = std::max(1.01 * std::abs(g0) / dg0, 1e-12 * (std::abs(x0) + 1.0));
    const Tolerances tol;
    const auto root = detail::solve_increasing(g, x0, step0, tol.retard_max_iterations, tol.bracket_max_doublings);
    const double scale = std::abs(t1) + std::abs(root.x) + 1.0;
    if (!root.converged || std::abs(root.f) > 1e-12 * scale) {
        std::ostringstream os;
        os << "transform_worldline: frame-time root not found for t1 = " << t1 << " (residual " << root.f << ")";
        throw NonConvergence(os.str());
    }

    const KinState s = base.state(root.x);
    KinState out;
    out.t = t1;
    Vec3 lv;   // Lambda^i_j v^j
    Vec3 la;   // Lambda^i_j a^j
    Vec3 num;  // Lambda^i_0 c + Lambda^i_j v^j
    for (std::size_t i = 0; i < 3; ++i) {
        double px = L(i + 1, 0) * c * root.x;
        for (std::size_t j = 0; j < 3; ++j) {
            px += L(i + 1, j + 1) * s.pos[j];
            lv[i] += L(i + 1, j + 1) * s.vel[j];
            la[i] += L(i + 1, j + 1) * s.acc[j];
        }
        out.pos[i] = px;
        num[i] = L(i + 1, 0) * c + lv[i];
    }
    const double den = L(0, 0) * c + dot(l0, s.vel);
    out.vel = num * (c / den);
    out.acc = (la * den - num * dot(l0, s.acc)) * (c * c / (den * den * den));
    return out;
}

} // namespace

SampledHistory::SampledHistory(double c, PrehistoryPolicy before, FuturePolicy after)
    : c_(c), before_(before), after_(after)
{
    if (!(c > 0.0) || !std::isfinite(c)) {
        throw DomainError("SampledHistory: speed of light must be positive and finite");
    }
}

void SampledHistory::append(const HistoryNode& node)
{
    if (!std::isfinite(node.t) || !is_finite(node.pos)) {
        throw DomainError("SampledHistory: non-finite node");
    }
    if (!nodes_.empty() && !(node.t > nodes_.back().t)) {
        std::ostringstream os;
        os << "SampledHistory: node time " << node.t << " does not follow " << nodes_.back().t;
        throw DomainError(os.str());
    }
    require_subluminal(node.vel, c_, "SampledHistory");
    nodes_.push_back(node);
}

KinState SampledHistory::state(double t) const
{
    if (nodes_.empty()) {
        throw HistoryExhausted("SampledHistory: no nodes");
    }
    const HistoryNode& first = nodes_.front();
    const HistoryNode& last = nodes_.back();
    if (t < first.t) {
        if (before_ == PrehistoryPolicy::none) {
            std::ostringstream os;
            os << "SampledHistory: t = " << t << " precedes the first node at " << first.t;
            throw HistoryExhausted(os.str());
        }
        return {t, first.pos + first.vel * (t - first.t), first.vel, {}};
    }
    if (t > last.t) {
        if (after_ == FuturePolicy::error) {
            std::ostringstream os;
            os << "SampledHistory: t = " << t << " is past the last node at " << last.t;
            throw HistoryExhausted(os.str());
        }
        return {t, last.pos + last.vel * (t - last.t), last.vel, {}};
    }
    if (nodes_.size() == 1) {
        return {t, first.pos, first.vel, {}};
    }
    // first node with node.t > t; t == last.t uses the final segment
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t,
                               [](double v, const HistoryNode& n) { return v < n.t; });
    if (it == nodes_.end()) {
        --it;
    }
    const HistoryNode& b = *it;
    const HistoryNode& a = *(it - 1);
    KinState k = hermite(a, b, t);
    if (t == a.t) {
        k.pos = a.pos;
        k.vel = a.vel;
    } else if (t == b.t) {
        k.pos = b.pos;
        k.vel = b.vel;
    }
    return k;
}

WorldLine WorldLine::inertial(const Inertial& w, double c)
{
    require_subluminal(w.vel, c, "Inertial world line");
    if (!std::isfinite(w.t0) || !is_finite(w.pos)) {
        throw DomainError("Inertial world line: non-finite state");
    }
    return WorldLine(w);
}

WorldLine WorldLine::circular(const AnalyticCircular& w, double c)
{
    require_subluminal(Vec3{w.radius * w.omega, 0.0, 0.0}, c, "Circular world line");
    if (!(w.radius > 0.0)) {
        throw DomainError("Circular world line: radius must be positive");
    }
    if (std::abs(norm(w.e1) - 1.0) > 1e-12 || std::abs(norm(w.e2) - 1.0) > 1e-12 ||
        std::abs(dot(w.e1, w.e2)) > 1e-12) {
        throw DomainError("Circular world line: plane axes must be orthonormal");
    }
    return WorldLine(w);
}

WorldLine WorldLine::sampled(SampledHistory h) { return WorldLine(std::move(h)); }

std::optional<double> WorldLine::latest_time() const
{
    if (const auto* h = std::get_if<SampledHistory>(&v_)) {
        if (h->future() == FuturePolicy::error && !h->empty()) {
            return h->nodes().back().t;
        }
        return std::nullopt;
    }
    if (const auto* tr = std::get_if<Transformed>(&v_)) {
        const auto last = tr->base->latest_time();
        if (!last) {
            return std::nullopt;
        }
        const KinState s = tr->base->state(*last);
        return tr->lambda.apply(FourVector::event(*last, s.pos, tr->c))[0] / tr->c;
    }
    return std::nullopt;
}

KinState WorldLine::state(double t) const
{
    return std::visit(
        [t](const auto& w) -> KinState {
            using T = std::decay_t<decltype(w)>;
            if constexpr (std::is_same_v<T, Inertial>) {
                return inertial_state(w, t);
            } else if constexpr (std::is_same_v<T, AnalyticCircular>) {
                return circular_state(w, t);
            } else if constexpr (std::is_same_v<T, SampledHistory>) {
                return w.state(t);
            } else {
                return transformed_state(w, t);
            }
        },
        v_);
}

KinState worldline_state(const WorldLine& w, double t) { return w.state(t); }

Vec3 transform_velocity(const LorentzTransform& L, const Vec3& v, double c)
{
    Vec3 num;
    for (std::size_t i = 0; i < 3; ++i) {
        num[i] = L(i + 1, 0) * c;
        for (std::size_t j = 0; j < 3; ++j) {
            num[i] += L(i + 1, j + 1) * v[j];
        }
    }
    const double den = L(0, 0) * c + L(0, 1) * v.x + L(0, 2) * v.y + L(0, 3) * v.z;
    return num * (c / den);
}

WorldLine transform_worldline(const LorentzTransform& L, const WorldLine& w, double c)
{
    if (L.is_identity()) {
        return w;
    }
    if (const auto* in = std::get_if<Inertial>(&w.v_)) {
        const FourVector ev = L.apply(FourVector::event(in->t0, in->pos, c));
        return WorldLine::inertial({ev[0] / c, ev.spatial(), transform_velocity(L, in->vel, c)}, c);
    }
    return WorldLine(Transformed{L, std::make_shared<const WorldLine>(w), c});
}

} // namespace relsim
