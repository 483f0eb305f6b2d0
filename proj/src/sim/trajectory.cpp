#include "terradapt/sim/trajectory.hpp"

#include <algorithm>
#include <cmath>

namespace terradapt::sim {

namespace {

double blend(double tau, double ramp) {
    if (ramp <= 0.0 || tau >= ramp) return 1.0;
    return 0.5 * (1.0 - std::cos(std::numbers::pi * tau / ramp));
}

double blend_rate(double tau, double ramp) {
    if (ramp <= 0.0 || tau >= ramp) return 0.0;
    return 0.5 * std::numbers::pi / ramp * std::sin(std::numbers::pi * tau / ramp);
}

} // namespace

VelocitySample VelocityProfile::at(double t) const {
    auto it = std::upper_bound(knots_.begin(), knots_.end(), t, [](double v, const Knot& k) { return v < k.t; });
    const std::size_t k = it == knots_.begin() ? 0 : static_cast<std::size_t>(it - knots_.begin() - 1);
    const Knot& cur = knots_[k];
    const Knot& prev = k == 0 ? cur : knots_[k - 1];
    const double tau = std::max(0.0, t - cur.t);
    const double b = blend(tau, ramp_);
    const double db = blend_rate(tau, ramp_);
    return {prev.v + (cur.v - prev.v) * b, prev.omega + (cur.omega - prev.omega) * b, (cur.v - prev.v) * db,
            (cur.omega - prev.omega) * db};
}

const Pose& VelocityProfile::planned(std::size_t step) const {
    return planned_[std::min(step, planned_.size() - 1)];
}

VelocityProfile VelocityProfile::generate(const TrajectorySpec& spec, const Pose& start, double width,
                                          double height, double duration, double dt, std::mt19937_64& rng) {
    VelocityProfile prof;
    prof.ramp_ = spec.ramp;
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double band_x = spec.edge_band * width;
    const double band_y = spec.edge_band * height;
    const auto steps = static_cast<std::size_t>(std::ceil(duration / dt)) + 1;
    prof.planned_.reserve(steps + 1);
    prof.planned_.push_back(start);
    Pose p = start;
    double next_knot = 0.0;
    for (std::size_t i = 0; i <= steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        if (t >= next_knot - 1e-12) {
            Knot k;
            k.t = t;
            const bool near_edge = p.x < band_x || p.x > width - band_x || p.y < band_y || p.y > height - band_y;
            if (near_edge) {
                const double to_centre = std::atan2(0.5 * height - p.y, 0.5 * width - p.x);
                const double err = angle_diff(to_centre, p.psi);
                k.v = spec.v_min;
                k.omega = std::clamp(1.5 * err, -spec.omega_max, spec.omega_max);
            } else {
                k.v = spec.v_min + (spec.v_max - spec.v_min) * u01(rng);
                k.omega = spec.omega_max * (2.0 * u01(rng) - 1.0);
            }
            const double hold = spec.hold_min + (spec.hold_max - spec.hold_min) * u01(rng);
            // Edge turns are re-evaluated sooner.
            next_knot = t + (near_edge ? std::min(hold, spec.hold_min) : hold);
            prof.knots_.push_back(k);
        }
        if (i == steps) break;
        // Midpoint rule for the nominal unicycle.
        const VelocitySample a = prof.at(t);
        const VelocitySample b = prof.at(t + 0.5 * dt);
        const double psi_mid = p.psi + 0.5 * dt * a.omega;
        p.x += dt * b.v * std::cos(psi_mid);
        p.y += dt * b.v * std::sin(psi_mid);
        p.psi = wrap_angle(p.psi + dt * b.omega);
        prof.planned_.push_back(p);
    }
    return prof;
}

PoseTrajectory::PoseTrajectory(const TrajectorySpec& spec) : spec_(spec) {
    if (spec.kind == TrajectoryKind::Waypoints) {
        if (spec.waypoints.size() < 2) throw ConfigError("waypoint trajectory needs at least two waypoints");
        cumulative_.push_back(0.0);
        for (std::size_t i = 1; i < spec.waypoints.size(); ++i)
            cumulative_.push_back(cumulative_.back() + (spec.waypoints[i] - spec.waypoints[i - 1]).norm());
    } else if (spec.kind != TrajectoryKind::Figure8) {
        throw ConfigError("pose trajectory must be figure8 or waypoints");
    }
}

control::DesiredPose PoseTrajectory::at(double t) const {
    control::DesiredPose d;
    if (spec_.kind == TrajectoryKind::Figure8) {
        const double w = 2.0 * std::numbers::pi / spec_.period;
        const double s = std::sin(w * t);
        const double c = std::cos(w * t);
        d.p_d = spec_.center + Vec2(spec_.size_x * s, spec_.size_y * s * c);
        d.v_d = Vec2(spec_.size_x * w * c, spec_.size_y * w * std::cos(2.0 * w * t));
        d.psi_d = std::atan2(d.v_d.y(), d.v_d.x());
        return d;
    }
    const double dist = spec_.speed * t;
    const auto& wp = spec_.waypoints;
    std::size_t seg = 0;
    while (seg + 2 < cumulative_.size() && dist > cumulative_[seg + 1]) ++seg;
    const Vec2 a = wp[seg];
    const Vec2 b = wp[seg + 1];
    const double len = cumulative_[seg + 1] - cumulative_[seg];
    const Vec2 dir = len > 0.0 ? Vec2((b - a) / len) : Vec2::UnitX();
    d.psi_d = std::atan2(dir.y(), dir.x());
    if (dist >= cumulative_.back()) {
        d.p_d = wp.back();
        d.v_d = Vec2::Zero();
    } else {
        d.p_d = a + dir * (dist - cumulative_[seg]);
        d.v_d = dir * spec_.speed;
    }
    return d;
}

Pose PoseTrajectory::start() const {
    const control::DesiredPose d = at(0.0);
    return {d.p_d.x(), d.p_d.y(), d.psi_d};
}

control::PathFrame CirclePath::frame(const Vec2& p, double v_x) const {
    const Vec2 r = p - center;
    const double n = r.norm();
    if (!(n > 1e-9)) throw DomainError("path frame undefined at the circle centre");
    control::PathFrame f;
    f.origin = center + radius * r / n;
    f.tangent = Vec2(-r.y(), r.x()) / n;
    f.omega_d = v_x / radius;
    return f;
}

} // namespace terradapt::sim
