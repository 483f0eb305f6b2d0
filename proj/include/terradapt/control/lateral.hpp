#pragma once

#include "terradapt/basis/basis_output.hpp"
#include "terradapt/vehicle/ackermann.hpp"

namespace terradapt::control {

// Desired frame D: origin on the path, x axis along the path tangent.
struct PathFrame {
    Vec2 origin = Vec2::Zero();
    Vec2 tangent = Vec2::UnitX();
    double omega_d = 0.0;  // desired yaw rate
};

struct LateralErrorState {
    double e_parallel = 0.0;
    double e_perp = 0.0;
    double psi_e = 0.0;
    double e_perp_dot = 0.0;
    double s_perp = 0.0;
};

// e = R_I^D (p - O_D), psi_e = psi - psi_d,
// e_perp_dot = v_y + v_x psi_e, s_perp = e_perp_dot + k_p e_perp.
LateralErrorState lateral_errors(const vehicle::AckermannState& state, const PathFrame& frame, double k_p,
                                 double v_min = 0.1);

struct LateralGains {
    double k_p = 1.0;
    double k_v = 1.0;
    double b_min = 0.5;       // lower bound on |b_hat|
    double delta_max = 0.5;   // rad
};

struct SteeringCommand {
    double u_delta = 0.0;
    double b_hat = 0.0;
    bool fallback = false;
    bool clamped = false;
};

// u_delta = -b_hat^-1 (k_v s_perp - 2 C_y/(m v_x) v_y + v_x_dot psi_e - v_x omega_d + k_p e_perp_dot)
// with b_hat = C_y/m + phi_1 theta_hat; phi_1 is the lateral row of Phi.
SteeringCommand control_ackermann(const LateralErrorState& err, const vehicle::AckermannState& state,
                                  double v_x_dot, double omega_d, const basis::BasisOutput& phi,
                                  const VecX& theta_hat, const vehicle::AckermannParams& params,
                                  const LateralGains& gains);

} // namespace terradapt::control
