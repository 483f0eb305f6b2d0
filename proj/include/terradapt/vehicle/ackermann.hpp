#pragma once

#include "terradapt/common/math.hpp"

namespace terradapt::vehicle {

struct AckermannState {
    double p_x = 0.0;
    double p_y = 0.0;
    double psi = 0.0;
    double v_x = 0.0;
    double v_y = 0.0;
    double omega = 0.0;

    [[nodiscard]] Vec2 position() const { return {p_x, p_y}; }
    // Lateral/yaw sub-state (v_y, omega) used by the lateral controller.
    [[nodiscard]] Vec2 lateral() const { return {v_y, omega}; }

    [[nodiscard]] Eigen::Matrix<double, 6, 1> to_vector() const;
    static AckermannState from_vector(const Eigen::Matrix<double, 6, 1>& x);
};

// Bicycle-model parameters. The defaults are assumed values for a 1:5 scale
// car-like robot; they were not identified on hardware.
struct AckermannParams {
    double m = 10.0;      // kg
    double I_z = 0.6;     // kg m^2
    double L = 0.5;       // m, wheelbase; CG at the midpoint
    double C_y = 60.0;    // N/rad per axle
    double tau_v = 0.4;   // s
    double v_min = 0.1;   // m/s, below which slip angles are undefined

    void validate() const;

    // Linearization about zero steering for x = (v_y, omega):
    //   x_dot = A_n(v_x) x + B_n u_delta.
    [[nodiscard]] Mat2 a_nominal(double v_x) const;
    [[nodiscard]] Vec2 b_nominal() const;
};

struct AckermannInput {
    double u_v = 0.0;      // m/s, forward speed setpoint
    double u_delta = 0.0;  // rad, steering angle
};

struct SlipAngles {
    double front = 0.0;
    double rear = 0.0;
};

SlipAngles slip_angles(const AckermannState& state, double u_delta, const AckermannParams& params);

// Nonlinear bicycle dynamics with linear tires F_y = eta * C_y * alpha and a
// rear-drive first-order lag on the forward channel. eta scales lateral force
// production. Throws DomainError when v_x <= v_min.
AckermannState ackermann_derivative(const AckermannState& state, const AckermannInput& u,
                                    const AckermannParams& params, double eta);

} // namespace terradapt::vehicle
