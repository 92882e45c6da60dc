#include "relsim/retard.hpp"

#include <cmath>
#include <sstream>

#include "relsim/detail/roots.hpp"
#include "relsim/errors.hpp"

namespace relsim {

double retarded_time(double c, double t_obs, const Vec3& x_obs, const WorldLine& w, const Tolerances& tol)
{
    if (!(c > 0.0)) {
        throw DomainError("retarded_time: c must be positive");
    }
    // Unknown is the lag tau = t_obs - t'. f(tau) = c tau - |x_obs - x_w(t_obs - tau)|
    // has f' = c - n.v > 0, so the root is unique.
    auto f = [&](double tau) -> std::pair<double, double> {
        const KinState s = w.state(t_obs - tau);
        const Vec3 rv = x_obs - s.pos;
        const double r = norm(rv);
        const double nv = r > 0.0 ? dot(rv, s.vel) / r : 0.0;
        return {c * tau - r, c - nv};
    };

    double tau0 = 0.0;
    if (auto last = w.latest_time(); last && *last < t_obs) {
        tau0 = t_obs - *last;
    }
    const auto [f0, df0] = f(tau0);
    if (f0 > 0.0) {
        std::ostringstream os;
        os << "retarded_time: retarded point for t_obs = " << t_obs << " lies beyond the recorded history";
        throw HistoryExhausted(os.str());
    }
    if (f0 == 0.0) {
        return t_obs - tau0;
    }

    const auto root = detail::solve_increasing(f, tau0, -f0 / c, tol.retard_max_iterations,
                                               tol.bracket_max_doublings);
    const double r = root.x * c;
    const double bound = tol.retard_relative * (c * std::abs(t_obs) + std::abs(r) + 1.0);
    if (!root.bracketed || !root.converged || std::abs(root.f) > bound) {
        std::ostringstream os;
        os.precision(17);
        os << "retarded_time: no convergence for t_obs = " << t_obs << ", x_obs = (" << x_obs.x << ", "
           << x_obs.y << ", " << x_obs.z << "); lag " << root.x << ", residual " << root.f << " > " << bound
           << ", bracket [" << root.lo << ", " << root.hi << "], iterations " << root.iterations;
        throw NonConvergence(os.str());
    }
    return t_obs - root.x;
}

RetardedEvent retarded_state(double c, double t_obs, const Vec3& x_obs, const WorldLine& w, const Tolerances& tol)
{
    RetardedEvent ev;
    ev.t_ret = retarded_time(c, t_obs, x_obs, w, tol);
    ev.source = w.state(ev.t_ret);
    ev.r_vec = x_obs - ev.source.pos;
    ev.r = norm(ev.r_vec);
    if (ev.r < tol.singular_radius()) {
        std::ostringstream os;
        os << "retarded_state: observer within " << tol.singular_radius() << " of the source (r = " << ev.r
           << ") at t = " << t_obs;
        throw SingularField(os.str());
    }
    ev.denom = c * ev.r - dot(ev.r_vec, ev.source.vel);
    return ev;
}

} // namespace relsim
