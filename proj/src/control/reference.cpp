#include "terradapt/control/reference.hpp"

namespace terradapt::control {

ReferenceState reference_velocities(const Vec2& p, double psi, const DesiredPose& d, const PoseGains& g,
                                    double psi_ref_dot) {
    ReferenceState r;
    const Vec2 p_err = p - d.p_d;
    r.v_ref_inertial = d.v_d - Vec2(g.k_px * p_err.x(), g.k_py * p_err.y());
    r.v_ref_x = std::cos(psi) * r.v_ref_inertial.x() + std::sin(psi) * r.v_ref_inertial.y();
    r.turn_in_place = !(r.v_ref_inertial.squaredNorm() > g.v_eps);
    r.psi_ref = r.turn_in_place ? wrap_angle(d.psi_d) : std::atan2(r.v_ref_inertial.y(), r.v_ref_inertial.x());
    r.omega_ref = psi_ref_dot - g.k_psi * angle_diff(psi, r.psi_ref);
    return r;
}

ReferenceGenerator::ReferenceGenerator(PoseGains gains, double dt, double cutoff_hz)
    : gains_(gains), psi_ref_rate_(cutoff_hz, dt, true), v_rate_(cutoff_hz, dt, false),
      omega_rate_(cutoff_hz, dt, false) {
    if (!(gains.k_px > 0.0 && gains.k_py > 0.0 && gains.k_psi > 0.0)) throw ConfigError("pose gains must be positive");
    if (gains.v_eps < 0.0) throw ConfigError("v_eps must be non-negative");
}

ReferenceState ReferenceGenerator::update(const Vec2& p, double psi, const DesiredPose& d) {
    ReferenceState r = reference_velocities(p, psi, d, gains_, 0.0);
    const double psi_ref_dot = psi_ref_rate_.update(r.psi_ref);
    r.omega_ref += psi_ref_dot;
    r.v_ref_x_dot = v_rate_.update(r.v_ref_x);
    r.omega_ref_dot = omega_rate_.update(r.omega_ref);
    return r;
}

void ReferenceGenerator::reset() {
    psi_ref_rate_.reset();
    v_rate_.reset();
    omega_rate_.reset();
}

} // namespace terradapt::control
