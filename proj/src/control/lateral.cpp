#include "terradapt/control/lateral.hpp"

#include <algorithm>

#include "terradapt/common/log.hpp"

namespace terradapt::control {

LateralErrorState lateral_errors(const vehicle::AckermannState& state, const PathFrame& frame, double k_p,
                                 double v_min) {
    if (!(state.v_x > v_min)) throw DomainError("lateral errors undefined: v_x <= v_min");
    const double tn = frame.tangent.norm();
    if (!(tn > 1e-9) || !frame.tangent.allFinite()) throw DomainError("degenerate path tangent");
    const Vec2 t = frame.tangent / tn;
    const double psi_d = std::atan2(t.y(), t.x());
    const Vec2 d = state.position() - frame.origin;
    LateralErrorState e;
    e.e_parallel = t.x() * d.x() + t.y() * d.y();
    e.e_perp = -t.y() * d.x() + t.x() * d.y();
    e.psi_e = angle_diff(state.psi, psi_d);
    e.e_perp_dot = state.v_y + state.v_x * e.psi_e;
    e.s_perp = e.e_perp_dot + k_p * e.e_perp;
    return e;
}

SteeringCommand control_ackermann(const LateralErrorState& err, const vehicle::AckermannState& state,
                                  double v_x_dot, double omega_d, const basis::BasisOutput& phi,
                                  const VecX& theta_hat, const vehicle::AckermannParams& params,
                                  const LateralGains& gains) {
    if (phi.shape().m != 1) throw DimensionError("lateral controller needs a single-input basis");
    if (!(state.v_x > params.v_min)) throw DomainError("lateral controller engaged with v_x <= v_min");
    SteeringCommand cmd;
    const double b_n = params.C_y / params.m;
    cmd.b_hat = b_n + contract(phi, theta_hat)(0, 0);
    if (!(std::abs(cmd.b_hat) > gains.b_min) || !std::isfinite(cmd.b_hat)) {
        log().warn("b_hat = {:.3g} too small; dropping the adaptive term", cmd.b_hat);
        cmd.b_hat = b_n;
        cmd.fallback = true;
    }
    const double nu = gains.k_v * err.s_perp - 2.0 * params.C_y / (params.m * state.v_x) * state.v_y
                      + v_x_dot * err.psi_e - state.v_x * omega_d + gains.k_p * err.e_perp_dot;
    double u = -nu / cmd.b_hat;
    require_finite(u, "steering command");
    const double c = std::clamp(u, -gains.delta_max, gains.delta_max);
    cmd.clamped = c != u;
    cmd.u_delta = c;
    return cmd;
}

} // namespace terradapt::control
