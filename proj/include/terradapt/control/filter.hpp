#pragma once

#include "terradapt/common/math.hpp"

namespace terradapt::control {

// Discrete first-order low-pass, x <- x + alpha (z - x) with
// alpha = dt / (dt + 1 / (2 pi f_c)). The first sample initializes the state.
class LowPassFilter {
public:
    LowPassFilter() = default;
    LowPassFilter(double cutoff_hz, double dt);

    VecX update(const VecX& z);
    void reset() { initialized_ = false; }
    void reset(const VecX& x) { state_ = x; initialized_ = true; }

    [[nodiscard]] double alpha() const { return alpha_; }
    [[nodiscard]] bool initialized() const { return initialized_; }
    [[nodiscard]] const VecX& state() const { return state_; }

    // Output variance of white input noise with variance sigma2.
    [[nodiscard]] double white_noise_gain() const { return alpha_ / (2.0 - alpha_); }

private:
    double alpha_ = 1.0;
    VecX state_;
    bool initialized_ = false;
};

// Filtered finite difference of a scalar signal, optionally on the circle.
class FilteredDerivative {
public:
    FilteredDerivative() = default;
    FilteredDerivative(double cutoff_hz, double dt, bool angular);

    double update(double value);
    void reset() { has_prev_ = false; filter_.reset(); }

private:
    LowPassFilter filter_;
    double dt_ = 1.0;
    bool angular_ = false;
    bool has_prev_ = false;
    double prev_ = 0.0;
};

} // namespace terradapt::control
