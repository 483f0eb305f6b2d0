#include "terradapt/vehicle/integrator.hpp"

namespace terradapt::vehicle {

namespace {

void check_step(double dt) {
    if (!(dt > 0.0) || dt > kMaxStep) throw ConfigError("integration step must lie in (0, 0.1]");
}

} // namespace

TrackedState integrate_step(const TrackedState& state, const TrackedInput& u,
                            const TrackedParams& params, const Vec2& eta_diag, double dt) {
    check_step(dt);
    using V = Eigen::Matrix<double, 5, 1>;
    const V next = rk4(state.to_vector(), dt, [&](const V& x) {
        return tracked_derivative(TrackedState::from_vector(x), u, params, eta_diag).to_vector();
    });
    TrackedState out = TrackedState::from_vector(next);
    out.psi = wrap_angle(out.psi);
    return out;
}

AckermannState integrate_step(const AckermannState& state, const AckermannInput& u,
                              const AckermannParams& params, double eta, double dt) {
    check_step(dt);
    using V = Eigen::Matrix<double, 6, 1>;
    const V next = rk4(state.to_vector(), dt, [&](const V& x) {
        return ackermann_derivative(AckermannState::from_vector(x), u, params, eta).to_vector();
    });
    AckermannState out = AckermannState::from_vector(next);
    out.psi = wrap_angle(out.psi);
    return out;
}

} // namespace terradapt::vehicle
