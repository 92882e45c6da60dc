#pragma once

namespace relsim {

/// Numerical thresholds shared by every module. One record so a run can be
/// archived with the exact limits it was checked against.
struct Tolerances {
    /// Per-component bound on |L^T eta L - eta| for a Lorentz transform.
    double lorentz_membership = 1e-12;
    /// Bound on |u.u - 1| for a reconstructed four-velocity.
    double normalization = 1e-14;
    /// Retarded-time residual bound, relative to c|t_obs| + r + 1.
    double retard_relative = 1e-13;
    int retard_max_iterations = 60;
    int bracket_max_doublings = 200;
    /// Singularity radius as a fraction of the configured length scale.
    double singular_radius_factor = 1e-9;
    double length_scale = 1.0;

    [[nodiscard]] double singular_radius() const { return singular_radius_factor * length_scale; }
};

} // namespace relsim
