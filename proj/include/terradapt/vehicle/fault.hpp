#pragma once

#include "terradapt/vehicle/tracked.hpp"

namespace terradapt::vehicle {

// Per-track speed degradation applied downstream of the controller. With
// period > 0 the fault is a square wave: active on [0, duty * period) of each
// period, inactive for the rest. period == 0 keeps it permanently active.
struct TrackFaultSchedule {
    double left_scale = 1.0;
    double right_scale = 1.0;
    double period = 0.0;
    double duty = 0.5;
    double track_half_spacing = 0.3;  // m

    void validate() const;
    [[nodiscard]] bool active_at(double t) const;
    [[nodiscard]] bool is_identity() const { return left_scale == 1.0 && right_scale == 1.0; }
};

struct TrackSpeeds {
    double left = 0.0;
    double right = 0.0;
};

TrackSpeeds to_track_speeds(const TrackedInput& u, double half_spacing);
TrackedInput from_track_speeds(const TrackSpeeds& w, double half_spacing);

TrackedInput apply_track_fault(const TrackedInput& u, const TrackFaultSchedule& fault, double t);

} // namespace terradapt::vehicle
