#pragma once

#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "relsim/relkin.hpp"
#include "relsim/tolerances.hpp"
#include "relsim/vec.hpp"

namespace relsim {

/// Kinematic state of a world line at coordinate time t.
struct KinState {
    double t = 0.0;
    Vec3 pos;
    Vec3 vel;
    Vec3 acc;
};

/// Uniform motion through `pos` at time `t0`.
struct Inertial {
    double t0 = 0.0;
    Vec3 pos;
    Vec3 vel;
};

/// Uniform circular motion: center + R (cos th e1 + sin th e2), th = omega t + phase.
/// e1 and e2 must be orthonormal.
struct AnalyticCircular {
    Vec3 center;
    double radius = 1.0;
    double omega = 0.0;
    double phase = 0.0;
    Vec3 e1{1.0, 0.0, 0.0};
    Vec3 e2{0.0, 1.0, 0.0};
};

struct HistoryNode {
    double t = 0.0;
    Vec3 pos;
    Vec3 vel;
};

enum class PrehistoryPolicy {
    inertial, ///< extrapolate backwards with the first node's velocity
    none,     ///< queries before the first node are HistoryExhausted
};

enum class FuturePolicy {
    error,    ///< queries after the last node are HistoryExhausted
    inertial, ///< extrapolate forwards with the last node's velocity
};

/// Append-only sampled trajectory with cubic Hermite interpolation.
///
/// Single writer. Readers must not run concurrently with append(); a copy
/// taken between appends is an immutable snapshot.
class SampledHistory {
public:
    SampledHistory(double c, PrehistoryPolicy before = PrehistoryPolicy::inertial,
                   FuturePolicy after = FuturePolicy::error);

    /// Throws DomainError unless t is strictly after the last node and the
    /// velocity is subluminal.
    void append(const HistoryNode& node);
    void reserve(std::size_t n) { nodes_.reserve(n); }

    [[nodiscard]] std::span<const HistoryNode> nodes() const { return nodes_; }
    [[nodiscard]] bool empty() const { return nodes_.empty(); }
    [[nodiscard]] double c() const { return c_; }
    [[nodiscard]] PrehistoryPolicy prehistory() const { return before_; }
    [[nodiscard]] FuturePolicy future() const { return after_; }
    void set_future(FuturePolicy after) { after_ = after; }

    [[nodiscard]] KinState state(double t) const;

private:
    double c_;
    PrehistoryPolicy before_;
    FuturePolicy after_;
    std::vector<HistoryNode> nodes_;
};

class WorldLine;

/// A world line seen from another inertial frame, re-parameterized by that
/// frame's coordinate time.
struct Transformed {
    LorentzTransform lambda;
    std::shared_ptr<const WorldLine> base;
    double c = 1.0;
};

/// Particle trajectory x(t) with x^0 = c t, queryable at any admissible t.
class WorldLine {
public:
    using Variant = std::variant<Inertial, AnalyticCircular, SampledHistory, Transformed>;

    /// Each factory validates subluminality against c and throws DomainError.
    static WorldLine inertial(const Inertial& w, double c);
    static WorldLine circular(const AnalyticCircular& w, double c);
    static WorldLine sampled(SampledHistory h);
    static WorldLine at_rest(const Vec3& pos, double c) { return inertial({0.0, pos, {}}, c); }

    [[nodiscard]] const Variant& kind() const { return v_; }
    [[nodiscard]] SampledHistory* history() { return std::get_if<SampledHistory>(&v_); }
    [[nodiscard]] const SampledHistory* history() const { return std::get_if<SampledHistory>(&v_); }

    /// Latest coordinate time the line can answer for; nullopt if unbounded.
    [[nodiscard]] std::optional<double> latest_time() const;

    [[nodiscard]] KinState state(double t) const;

private:
    friend WorldLine transform_worldline(const LorentzTransform&, const WorldLine&, double);
    explicit WorldLine(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

/// Position, velocity and acceleration of `w` at coordinate time t.
KinState worldline_state(const WorldLine& w, double t);

/// The same world line described in the frame x' = L x, parameterized by the
/// new coordinate time. Inertial lines map to inertial lines in closed form;
/// other kinds are wrapped and resolved by root-solving on query.
WorldLine transform_worldline(const LorentzTransform& L, const WorldLine& w, double c);

/// Velocity seen in the frame x' = L x of a particle moving with `v`.
Vec3 transform_velocity(const LorentzTransform& L, const Vec3& v, double c);

} // namespace relsim
