#include "terradapt/control/tracked_controller.hpp"

#include <algorithm>

#include "terradapt/common/log.hpp"

namespace terradapt::control {

TrackedCommand control_tracked(const Vec2& s, const ReferenceState& ref, const basis::BasisOutput& phi,
                               const VecX& theta_hat, const vehicle::TrackedParams& params,
                               const TrackedGains& gains, const ActuatorLimits& limits, double max_condition) {
    if (phi.shape().n != 2 || phi.shape().m != 2) throw DimensionError("tracked controller needs a 2x2 basis");
    TrackedCommand cmd;
    const Mat2 Bn = params.b_nominal();
    cmd.B_hat = Bn + Mat2(contract(phi, theta_hat));
    const Eigen::JacobiSVD<Mat2> svd(cmd.B_hat);
    const double smin = svd.singularValues()(1);
    if (!cmd.B_hat.allFinite() || !(smin > 0.0) || svd.singularValues()(0) / smin > max_condition) {
        log().warn("B_hat near-singular (sigma_min {:.3g}); using nominal B_n", smin);
        cmd.B_hat = Bn;
        cmd.fallback = true;
    }
    const Vec2 rhs = gains.K() * s + params.a_nominal() * ref.velocity() - ref.acceleration();
    Vec2 u = -cmd.B_hat.partialPivLu().solve(rhs);
    require_finite(u, "tracked control input");
    const Vec2 clamped(std::clamp(u.x(), -limits.u_v_max, limits.u_v_max),
                       std::clamp(u.y(), -limits.u_omega_max, limits.u_omega_max));
    if (clamped != u) {
        cmd.clamped = true;
        log().debug("control clamped from ({:.3f}, {:.3f})", u.x(), u.y());
    }
    cmd.u = vehicle::TrackedInput::from_vector(clamped);
    return cmd;
}

} // namespace terradapt::control
