#pragma once

#include <random>
#include <vector>

#include "terradapt/control/lateral.hpp"
#include "terradapt/control/reference.hpp"
#include "terradapt/sim/config.hpp"

namespace terradapt::sim {

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double psi = 0.0;
};

struct VelocitySample {
    double v = 0.0;
    double omega = 0.0;
    double v_dot = 0.0;
    double omega_dot = 0.0;
};

// Random (v, omega) reference: values held for random durations and blended
// into each other with a half-cosine ramp, so the profile is C^1 with an
// analytic derivative. Knots are chosen while integrating the nominal
// unicycle, which turns back toward the map centre near the edges. The
// planned pose is kept at every plant step.
class VelocityProfile {
public:
    struct Knot {
        double t = 0.0;
        double v = 0.0;
        double omega = 0.0;
    };

    static VelocityProfile generate(const TrajectorySpec& spec, const Pose& start, double width, double height,
                                    double duration, double dt, std::mt19937_64& rng);

    [[nodiscard]] VelocitySample at(double t) const;
    // Planned pose after `step` plant steps.
    [[nodiscard]] const Pose& planned(std::size_t step) const;
    [[nodiscard]] const std::vector<Knot>& knots() const { return knots_; }

private:
    std::vector<Knot> knots_;
    double ramp_ = 1.0;
    std::vector<Pose> planned_;
};

// Time-parameterized desired pose: figure-8 (lemniscate of Gerono) or
// constant-speed waypoint polyline.
class PoseTrajectory {
public:
    PoseTrajectory(const TrajectorySpec& spec);
    [[nodiscard]] control::DesiredPose at(double t) const;
    [[nodiscard]] Pose start() const;

private:
    TrajectorySpec spec_;
    std::vector<double> cumulative_;  // arc length at each waypoint
};

// Counter-clockwise circle for the lateral controller. The desired frame sits
// at the closest point of the circle.
struct CirclePath {
    Vec2 center = Vec2::Zero();
    double radius = 1.0;

    [[nodiscard]] control::PathFrame frame(const Vec2& p, double v_x) const;
};

} // namespace terradapt::sim
