#include "terradapt/vehicle/tracked.hpp"

#include <cmath>
#include <string>

namespace terradapt::vehicle {

Eigen::Matrix<double, 5, 1> TrackedState::to_vector() const {
    Eigen::Matrix<double, 5, 1> x;
    x << p_x, p_y, psi, v_x, omega;
    return x;
}

TrackedState TrackedState::from_vector(const Eigen::Matrix<double, 5, 1>& x) {
    return {x(0), x(1), x(2), x(3), x(4)};
}

void TrackedParams::validate() const {
    if (!(tau_v > 0.0) || !(tau_omega > 0.0))
        throw ConfigError("tracked params: time constants must be positive");
    if (!std::isfinite(k1) || !std::isfinite(k2) || !std::isfinite(x_icr))
        throw ConfigError("tracked params: gains must be finite");
}

Mat2 TrackedParams::a_nominal() const {
    return Vec2(-1.0 / tau_v, -1.0 / tau_omega).asDiagonal();
}

Mat2 TrackedParams::b_nominal() const {
    return Vec2(k1 / tau_v, k2 / tau_omega).asDiagonal();
}

Eigen::Matrix<double, 3, 2> projection_operator(double psi, double x_icr) {
    const double c = std::cos(psi);
    const double s = std::sin(psi);
    Eigen::Matrix<double, 3, 2> S;
    S << c, x_icr * s,
         s, -x_icr * c,
         0.0, 1.0;
    return S;
}

Eigen::RowVector3d constraint_row(double psi, double x_icr) {
    return {-std::sin(psi), std::cos(psi), x_icr};
}

TrackedState tracked_derivative(const TrackedState& state, const TrackedInput& u,
                                const TrackedParams& params, const Vec2& eta_diag) {
    require_finite(state.to_vector(), "tracked state");
    require_finite(u.vector(), "tracked input");
    require_finite(eta_diag, "eta");
    if ((eta_diag.array() <= 0.0).any() || (eta_diag.array() > 2.0).any())
        throw DomainError("eta diagonal entries must lie in (0, 2]");

    const Vec2 v = state.velocity();
    const Eigen::Vector3d q_dot = projection_operator(state.psi, params.x_icr) * v;
    const Vec2 v_dot = params.a_nominal() * v
                     + eta_diag.asDiagonal() * (params.b_nominal() * u.vector());
    return {q_dot(0), q_dot(1), q_dot(2), v_dot(0), v_dot(1)};
}

double longitudinal_slip(double v_x, double u_v, double v_min) {
    if (!(std::abs(v_x) > v_min))
        throw DomainError("longitudinal slip undefined for |v_x| <= " + std::to_string(v_min));
    return -(v_x - u_v) / v_x;
}

} // namespace terradapt::vehicle
