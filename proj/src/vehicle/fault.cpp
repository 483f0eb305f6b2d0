#include "terradapt/vehicle/fault.hpp"

#include <cmath>

namespace terradapt::vehicle {

void TrackFaultSchedule::validate() const {
    if (left_scale < 0.0 || left_scale > 1.0 || right_scale < 0.0 || right_scale > 1.0)
        throw ConfigError("track fault scales must lie in [0, 1]");
    if (period < 0.0) throw ConfigError("track fault period must be non-negative");
    if (duty < 0.0 || duty > 1.0) throw ConfigError("track fault duty must lie in [0, 1]");
    if (!(track_half_spacing > 0.0)) throw ConfigError("track half spacing must be positive");
}

bool TrackFaultSchedule::active_at(double t) const {
    if (period <= 0.0) return true;
    double phase = std::fmod(t, period);
    if (phase < 0.0) phase += period;
    return phase < duty * period;
}

TrackSpeeds to_track_speeds(const TrackedInput& u, double half_spacing) {
    return {u.u_v - half_spacing * u.u_omega, u.u_v + half_spacing * u.u_omega};
}

TrackedInput from_track_speeds(const TrackSpeeds& w, double half_spacing) {
    return {0.5 * (w.left + w.right), (w.right - w.left) / (2.0 * half_spacing)};
}

TrackedInput apply_track_fault(const TrackedInput& u, const TrackFaultSchedule& fault, double t) {
    if (fault.is_identity() || !fault.active_at(t)) return u;
    TrackSpeeds w = to_track_speeds(u, fault.track_half_spacing);
    w.left *= fault.left_scale;
    w.right *= fault.right_scale;
    return from_track_speeds(w, fault.track_half_spacing);
}

} // namespace terradapt::vehicle
