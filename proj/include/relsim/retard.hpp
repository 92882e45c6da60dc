#pragma once

#include "relsim/tolerances.hpp"
#include "relsim/vec.hpp"
#include "relsim/worldline.hpp"

namespace relsim {

/// Source state at the retarded time of an observer event, with the
/// Lienard-Wiechert denominator c r - r_vec . v.
struct RetardedEvent {
    double t_ret = 0.0;
    KinState source;
    Vec3 r_vec;        ///< observer position minus source position at t_ret
    double r = 0.0;    ///< |r_vec|
    double denom = 0.0;
};

/// The unique t' <= t_obs with c (t_obs - t') = |x_obs - x_w(t')|.
///
/// Throws HistoryExhausted if the root lies outside what `w` can answer for
/// and NonConvergence if the residual bound is not met.
double retarded_time(double c, double t_obs, const Vec3& x_obs, const WorldLine& w, const Tolerances& tol = {});

/// retarded_time plus the source kinematics there. Throws SingularField when
/// the observer is within tol.singular_radius() of the retarded position.
RetardedEvent retarded_state(double c, double t_obs, const Vec3& x_obs, const WorldLine& w,
                             const Tolerances& tol = {});

} // namespace relsim
