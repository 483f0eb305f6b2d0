#include "terradapt/control/filter.hpp"

namespace terradapt::control {

LowPassFilter::LowPassFilter(double cutoff_hz, double dt) {
    if (!(cutoff_hz > 0.0)) throw ConfigError("filter cutoff must be positive");
    if (!(dt > 0.0)) throw ConfigError("filter dt must be positive");
    alpha_ = dt / (dt + 1.0 / (2.0 * std::numbers::pi * cutoff_hz));
}

VecX LowPassFilter::update(const VecX& z) {
    if (!initialized_ || state_.size() != z.size()) {
        state_ = z;
        initialized_ = true;
    } else {
        state_ += alpha_ * (z - state_);
    }
    if (!state_.allFinite()) throw NumericalError("low-pass filter state is not finite");
    return state_;
}

FilteredDerivative::FilteredDerivative(double cutoff_hz, double dt, bool angular)
    : filter_(cutoff_hz, dt), dt_(dt), angular_(angular) {}

double FilteredDerivative::update(double value) {
    double raw = 0.0;
    if (has_prev_) raw = (angular_ ? angle_diff(value, prev_) : value - prev_) / dt_;
    prev_ = value;
    const bool first = !has_prev_;
    has_prev_ = true;
    if (first) {
        filter_.reset(VecX::Zero(1));
        return 0.0;
    }
    return filter_.update(VecX::Constant(1, raw))(0);
}

} // namespace terradapt::control
