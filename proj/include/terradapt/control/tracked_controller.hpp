#pragma once

#include "terradapt/basis/basis_output.hpp"
#include "terradapt/control/reference.hpp"
#include "terradapt/vehicle/tracked.hpp"

namespace terradapt::control {

struct TrackedGains {
    double k_dx = 0.05;
    double k_domega = 0.1;

    [[nodiscard]] Mat2 K() const { return Vec2(k_dx, k_domega).asDiagonal(); }
};

struct ActuatorLimits {
    double u_v_max = 2.0;      // m/s
    double u_omega_max = 2.0;  // rad/s
};

struct TrackedCommand {
    vehicle::TrackedInput u;
    Mat2 B_hat = Mat2::Identity();
    bool fallback = false;  // B_hat was near-singular and B_n was used instead
    bool clamped = false;
};

// u = -B_hat^-1 (K s + A_n v_ref - v_ref_dot), B_hat = B_n + sum theta_i Phi_i.
TrackedCommand control_tracked(const Vec2& s, const ReferenceState& ref, const basis::BasisOutput& phi,
                               const VecX& theta_hat, const vehicle::TrackedParams& params,
                               const TrackedGains& gains, const ActuatorLimits& limits,
                               double max_condition = 1e6);

} // namespace terradapt::control
