#pragma once

#include "terradapt/common/math.hpp"

namespace terradapt::vehicle {

// Skid-steer vehicle: pose q = (p_x, p_y, psi) and body velocities v = (v_x, omega).
struct TrackedState {
    double p_x = 0.0;
    double p_y = 0.0;
    double psi = 0.0;
    double v_x = 0.0;
    double omega = 0.0;

    [[nodiscard]] Vec2 position() const { return {p_x, p_y}; }
    [[nodiscard]] Vec2 velocity() const { return {v_x, omega}; }

    [[nodiscard]] Eigen::Matrix<double, 5, 1> to_vector() const;
    static TrackedState from_vector(const Eigen::Matrix<double, 5, 1>& x);
};

// First-order velocity model parameters. A_n = diag(-1/tau_v, -1/tau_omega),
// B_n = diag(k1/tau_v, k2/tau_omega).
struct TrackedParams {
    double k1 = 1.0;
    double k2 = 1.0;
    double tau_v = 0.5;
    double tau_omega = 0.4;
    double x_icr = 0.0;

    void validate() const;
    [[nodiscard]] Mat2 a_nominal() const;
    [[nodiscard]] Mat2 b_nominal() const;
};

struct TrackedInput {
    double u_v = 0.0;
    double u_omega = 0.0;

    [[nodiscard]] Vec2 vector() const { return {u_v, u_omega}; }
    static TrackedInput from_vector(const Vec2& u) { return {u.x(), u.y()}; }
};

// Columns of S(q) span the admissible velocities of the constraint
// p_dot_y^B + x_icr * omega = 0; maps v = (v_x, omega) to q_dot.
Eigen::Matrix<double, 3, 2> projection_operator(double psi, double x_icr);

// Constraint row A(q), with A(q) * S(q) = 0.
Eigen::RowVector3d constraint_row(double psi, double x_icr);

// State derivative of the velocity-input plant
//   q_dot = S(q) v,   v_dot = A_n v + diag(eta) B_n u.
// eta_diag scales the nominal control matrix and must lie in (0, 2].
TrackedState tracked_derivative(const TrackedState& state, const TrackedInput& u,
                                const TrackedParams& params, const Vec2& eta_diag);

// Longitudinal slip kappa = -(v_x - u_v) / v_x. Diagnostic only.
double longitudinal_slip(double v_x, double u_v, double v_min = 0.1);

} // namespace terradapt::vehicle
