#include "terradapt/vehicle/ackermann.hpp"

#include <cmath>
#include <string>

namespace terradapt::vehicle {

Eigen::Matrix<double, 6, 1> AckermannState::to_vector() const {
    Eigen::Matrix<double, 6, 1> x;
    x << p_x, p_y, psi, v_x, v_y, omega;
    return x;
}

AckermannState AckermannState::from_vector(const Eigen::Matrix<double, 6, 1>& x) {
    return {x(0), x(1), x(2), x(3), x(4), x(5)};
}

void AckermannParams::validate() const {
    if (!(m > 0.0) || !(I_z > 0.0) || !(L > 0.0) || !(C_y > 0.0) || !(tau_v > 0.0))
        throw ConfigError("ackermann params: m, I_z, L, C_y, tau_v must be strictly positive");
    if (!(v_min > 0.0)) throw ConfigError("ackermann params: v_min must be positive");
}

Mat2 AckermannParams::a_nominal(double v_x) const {
    if (!(v_x > v_min)) throw DomainError("linearized lateral model undefined for v_x <= v_min");
    Mat2 a;
    a << -2.0 * C_y / (m * v_x), -v_x,
         0.0, -L * L * C_y / (2.0 * v_x * I_z);
    return a;
}

Vec2 AckermannParams::b_nominal() const {
    return {C_y / m, L * C_y / (2.0 * I_z)};
}

SlipAngles slip_angles(const AckermannState& state, double u_delta, const AckermannParams& params) {
    if (!(state.v_x > params.v_min))
        throw DomainError("slip angles undefined: v_x = " + std::to_string(state.v_x)
                          + " <= v_min = " + std::to_string(params.v_min));
    const double half = 0.5 * params.L;
    return {u_delta - std::atan2(state.v_y + half * state.omega, state.v_x),
            -std::atan2(state.v_y - half * state.omega, state.v_x)};
}

AckermannState ackermann_derivative(const AckermannState& state, const AckermannInput& u,
                                    const AckermannParams& params, double eta) {
    require_finite(state.to_vector(), "ackermann state");
    require_finite(u.u_v, "u_v");
    require_finite(u.u_delta, "u_delta");
    if (!(eta > 0.0) || eta > 2.0) throw DomainError("lateral eta must lie in (0, 2]");

    const SlipAngles alpha = slip_angles(state, u.u_delta, params);
    const double f_yf = eta * params.C_y * alpha.front;
    const double f_yr = eta * params.C_y * alpha.rear;
    // Rear-wheel drive; the drive force realizes a first-order lag toward u_v.
    const double f_xr = params.m * (u.u_v - state.v_x) / params.tau_v;
    const double f_xf = 0.0;
    const double sd = std::sin(u.u_delta);
    const double cd = std::cos(u.u_delta);
    const double half = 0.5 * params.L;

    const double c = std::cos(state.psi);
    const double s = std::sin(state.psi);

    AckermannState d;
    d.p_x = c * state.v_x - s * state.v_y;
    d.p_y = s * state.v_x + c * state.v_y;
    d.psi = state.omega;
    d.v_x = state.omega * state.v_y + (f_xr + f_xf * cd - f_yf * sd) / params.m;
    d.v_y = -state.omega * state.v_x + (f_yr + f_xf * sd + f_yf * cd) / params.m;
    d.omega = (half * f_xf * sd + half * f_yf * cd - half * f_yr) / params.I_z;
    return d;
}

} // namespace terradapt::vehicle
