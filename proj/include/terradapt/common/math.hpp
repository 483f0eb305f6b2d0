#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <string_view>

#include "terradapt/common/error.hpp"

namespace terradapt {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(a + std::numbers::pi, two_pi);
    if (r < 0.0) r += two_pi;
    r -= std::numbers::pi;
    if (r <= -std::numbers::pi) r += two_pi;
    return r;
}

inline double angle_diff(double a, double b) { return wrap_angle(a - b); }

template <class Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
    return m.allFinite();
}

inline void require_finite(double v, std::string_view what) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

template <class Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, std::string_view what) {
    if (!m.allFinite()) throw NumericalError(std::string(what) + " contains non-finite values");
}

} // namespace terradapt
