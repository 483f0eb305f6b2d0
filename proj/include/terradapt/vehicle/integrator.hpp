#pragma once

#include "terradapt/vehicle/ackermann.hpp"
#include "terradapt/vehicle/tracked.hpp"

namespace terradapt::vehicle {

inline constexpr double kMaxStep = 0.1;

// Classic fixed-step fourth-order Runge-Kutta for an autonomous vector field.
template <class Vector, class Field>
Vector rk4(const Vector& x, double dt, Field&& f) {
    const Vector k1 = f(x);
    const Vector k2 = f(Vector(x + 0.5 * dt * k1));
    const Vector k3 = f(Vector(x + 0.5 * dt * k2));
    const Vector k4 = f(Vector(x + dt * k3));
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One RK4 step of the tracked plant with the input held constant; psi is
// re-wrapped afterwards. dt must lie in (0, 0.1].
TrackedState integrate_step(const TrackedState& state, const TrackedInput& u,
                            const TrackedParams& params, const Vec2& eta_diag, double dt);

AckermannState integrate_step(const AckermannState& state, const AckermannInput& u,
                              const AckermannParams& params, double eta, double dt);

} // namespace terradapt::vehicle
