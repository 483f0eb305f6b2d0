#pragma once

#include "terradapt/control/filter.hpp"

namespace terradapt::control {

struct PoseGains {
    double k_px = 0.8;
    double k_py = 0.8;
    double k_psi = 2.3;
    double v_eps = 1e-3;  // (m/s)^2, threshold on ||v_ref^I||^2
};

struct DesiredPose {
    Vec2 p_d = Vec2::Zero();
    Vec2 v_d = Vec2::Zero();
    double psi_d = 0.0;
};

struct ReferenceState {
    double v_ref_x = 0.0;
    double omega_ref = 0.0;
    double v_ref_x_dot = 0.0;
    double omega_ref_dot = 0.0;
    double psi_ref = 0.0;
    Vec2 v_ref_inertial = Vec2::Zero();
    bool turn_in_place = false;

    [[nodiscard]] Vec2 velocity() const { return {v_ref_x, omega_ref}; }
    [[nodiscard]] Vec2 acceleration() const { return {v_ref_x_dot, omega_ref_dot}; }
};

// Pose-feedback reference velocities for a tracked vehicle at pose (p, psi).
// psi_ref_dot is supplied by the caller (see ReferenceGenerator). Derivative
// fields are left at zero.
ReferenceState reference_velocities(const Vec2& p, double psi, const DesiredPose& d, const PoseGains& g,
                                    double psi_ref_dot);

// Adds the filtered finite differences: psi_ref_dot for omega_ref, and the
// derivatives of v_ref used as feedforward.
class ReferenceGenerator {
public:
    ReferenceGenerator(PoseGains gains, double dt, double cutoff_hz);

    ReferenceState update(const Vec2& p, double psi, const DesiredPose& d);
    void reset();
    [[nodiscard]] const PoseGains& gains() const { return gains_; }

private:
    PoseGains gains_;
    FilteredDerivative psi_ref_rate_;
    FilteredDerivative v_rate_;
    FilteredDerivative omega_rate_;
};

// s = v - v_ref
inline Vec2 tracking_error(const Vec2& v, const ReferenceState& ref) { return v - ref.velocity(); }

} // namespace terradapt::control
