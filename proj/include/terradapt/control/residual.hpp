#pragma once

#include <string>

#include "terradapt/control/filter.hpp"
#include "terradapt/vehicle/ackermann.hpp"
#include "terradapt/vehicle/tracked.hpp"

namespace terradapt::control {

// Where the low-pass filter sits.
//   Measurement: y = LPF(v_dot) - (A_n v + B_n u)
//   Residual:    y = LPF(v_dot - A_n v - B_n u)
// The second form keeps the nominal term in phase with the filtered
// measurement, so the filter lag does not leak into y as a spurious
// velocity-dependent term. Both agree in steady state.
enum class ResidualFilterMode { Measurement, Residual };
ResidualFilterMode parse_residual_filter_mode(const std::string& name);
std::string to_string(ResidualFilterMode mode);

class ResidualEstimator {
public:
    ResidualEstimator(double cutoff_hz, double dt, ResidualFilterMode mode = ResidualFilterMode::Residual)
        : filter_(cutoff_hz, dt), mode_(mode) {}

    Vec2 tracked(const Vec2& v_dot_measured, const Vec2& v, const Vec2& u, const vehicle::TrackedParams& p);
    // Lateral sub-state (v_y, omega) of the car with steering input u_delta.
    Vec2 lateral(const Vec2& x_dot_measured, const Vec2& x, double v_x, double u_delta,
                 const vehicle::AckermannParams& p);

    void reset() { filter_.reset(); }
    [[nodiscard]] const LowPassFilter& filter() const { return filter_; }
    [[nodiscard]] ResidualFilterMode mode() const { return mode_; }

private:
    Vec2 combine(const Vec2& measured, const Vec2& nominal);

    LowPassFilter filter_;
    ResidualFilterMode mode_;
};

} // namespace terradapt::control
