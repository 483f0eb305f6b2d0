#include "terradapt/control/residual.hpp"

#include "terradapt/common/error.hpp"

namespace terradapt::control {

ResidualFilterMode parse_residual_filter_mode(const std::string& name) {
    if (name == "measurement") return ResidualFilterMode::Measurement;
    if (name == "residual") return ResidualFilterMode::Residual;
    throw ConfigError("residual filter mode must be measurement or residual, got '" + name + "'");
}

std::string to_string(ResidualFilterMode mode) {
    return mode == ResidualFilterMode::Measurement ? "measurement" : "residual";
}

Vec2 ResidualEstimator::combine(const Vec2& measured, const Vec2& nominal) {
    if (mode_ == ResidualFilterMode::Measurement) return filter_.update(measured) - nominal;
    return filter_.update(measured - nominal);
}

Vec2 ResidualEstimator::tracked(const Vec2& v_dot_measured, const Vec2& v, const Vec2& u,
                                const vehicle::TrackedParams& p) {
    return combine(v_dot_measured, p.a_nominal() * v + p.b_nominal() * u);
}

Vec2 ResidualEstimator::lateral(const Vec2& x_dot_measured, const Vec2& x, double v_x, double u_delta,
                                const vehicle::AckermannParams& p) {
    return combine(x_dot_measured, p.a_nominal(v_x) * x + p.b_nominal() * u_delta);
}

} // namespace terradapt::control
