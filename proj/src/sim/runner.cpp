#include "terradapt/sim/runner.hpp"

#include <cmath>
#include <random>

#include "terradapt/common/log.hpp"
#include "terradapt/control/residual.hpp"
#include "terradapt/sim/trajectory.hpp"
#include "terradapt/vehicle/integrator.hpp"

namespace terradapt::sim {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::vector<std::string> numbered(const std::string& prefix, int n) {
    std::vector<std::string> out;
    for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
    return out;
}

void append(std::vector<std::string>& a, const std::vector<std::string>& b) { a.insert(a.end(), b.begin(), b.end()); }

void push(std::vector<double>& row, const VecX& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) row.push_back(v(i));
}

} // namespace

std::uint64_t run_seed(std::uint64_t seed, int run_index) {
    return splitmix(splitmix(seed) ^ static_cast<std::uint64_t>(run_index));
}

std::shared_ptr<const terrain::TerrainWorld> make_world(const ScenarioConfig& cfg) {
    if (!cfg.world_grid.empty()) return std::make_shared<const terrain::TerrainWorld>(terrain::read_world_grid(cfg.world_grid));
    return std::make_shared<const terrain::TerrainWorld>(terrain::build_world(cfg.world));
}

ScenarioRunner::ScenarioRunner(ScenarioConfig cfg, std::shared_ptr<const terrain::TerrainWorld> world,
                               std::shared_ptr<const basis::BasisNet> net, VecX theta0)
    : cfg_(std::move(cfg)), world_(std::move(world)), net_(std::move(net)), theta0_(std::move(theta0)) {
    cfg_.validate();
    if (!world_) throw ConfigError("scenario runner needs a world");
    if (world_->feature_dim() <= 0) throw ConfigError("world has no features");
    if (net_) {
        const int state_dim = cfg_.vehicle == VehicleType::Tracked ? 2 : 3;
        if (net_->input_dim() != state_dim + world_->feature_dim())
            throw DimensionError("checkpoint input size does not match state + feature dimension");
        const int m = cfg_.vehicle == VehicleType::Tracked ? 2 : 1;
        if (net_->shape().n != 2 || net_->shape().m != m) throw DimensionError("checkpoint basis shape does not match vehicle");
        if (theta0_.size() != net_->shape().n_theta) throw DimensionError("checkpoint theta0 does not match basis");
    }
}

std::unique_ptr<basis::BasisFunction> ScenarioRunner::make_basis(const Variant& v) const {
    if (v.use_dnn) {
        if (!net_) throw ConfigError("variant '" + v.name + "' needs a trained checkpoint");
        return std::make_unique<basis::NetBasis>(net_);
    }
    return std::make_unique<basis::ConstantBasis>(2, cfg_.vehicle == VehicleType::Tracked ? 2 : 1);
}

VecX ScenarioRunner::initial_theta(const Variant& v, int n_theta) const {
    if (v.zero_theta) return VecX::Zero(n_theta);
    if (v.reference_theta) {
        if (static_cast<int>(cfg_.theta_r.size()) != n_theta) throw DimensionError("theta_r length does not match basis");
        return Eigen::Map<const VecX>(cfg_.theta_r.data(), n_theta);
    }
    if (v.use_dnn) return theta0_;
    return VecX::Zero(n_theta);
}

RunResult ScenarioRunner::run(int run_index, const Variant& variant, bool keep_telemetry) const {
    return cfg_.vehicle == VehicleType::Tracked ? run_tracked(run_index, variant, keep_telemetry)
                                                 : run_ackermann(run_index, variant, keep_telemetry);
}

RunResult ScenarioRunner::run_tracked(int run_index, const Variant& variant, bool keep) const {
    const ScenarioConfig& c = cfg_;
    const std::uint64_t seed = run_seed(c.seed, run_index);
    std::mt19937_64 rng(seed);
    std::mt19937_64 noise_rng(seed ^ 0xA5A5A5A5ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    terrain::FeatureProviderConfig fcfg = c.features;
    fcfg.seed = seed ^ 0x5A5A5A5AULL;
    terrain::FeatureProvider provider(world_, fcfg);

    const auto basis = make_basis(variant);
    const int p = basis->shape().n_theta;
    const control::AdaptConfig acfg = c.adapt.build(2, p);
    control::AdaptState st = control::AdaptState::initial(acfg, initial_theta(variant, p));
    control::ResidualEstimator residual(c.sim.residual_cutoff_hz, c.sim.control_dt(), c.sim.residual_filter);
    control::ReferenceGenerator refgen(c.pose_gains, c.sim.control_dt(), c.sim.residual_cutoff_hz);

    const bool velocity_mode = c.trajectory.kind == TrajectoryKind::RandomVelocity;
    const double W = world_->width();
    const double Hh = world_->height();
    std::optional<VelocityProfile> profile;
    std::optional<PoseTrajectory> traj;
    vehicle::TrackedState x;
    if (velocity_mode) {
        std::uniform_real_distribution<double> ux(0.1 * W, 0.9 * W), uy(0.1 * Hh, 0.9 * Hh);
        std::uniform_real_distribution<double> upsi(-std::numbers::pi, std::numbers::pi);
        const Pose start{ux(rng), uy(rng), upsi(rng)};
        profile = VelocityProfile::generate(c.trajectory, start, W, Hh, c.sim.duration, c.sim.dt, rng);
        const VelocitySample v0 = profile->at(0.0);
        x = {start.x, start.y, wrap_angle(start.psi), v0.v, v0.omega};
    } else {
        traj.emplace(c.trajectory);
        const Pose s = traj->start();
        std::normal_distribution<double> n01(0.0, 1.0);
        const double dx = c.trajectory.start_pos_noise * n01(rng);
        const double dy = c.trajectory.start_pos_noise * n01(rng);
        const double dpsi = c.trajectory.start_heading_noise * n01(rng);
        x = {s.x + dx, s.y + dy, wrap_angle(s.psi + dpsi), 0.0, 0.0};
    }

    const vehicle::TrackedParams& P = c.tracked;
    const Mat2 planted_offset = c.planted_theta
                                    ? Mat2(basis::contract(basis::ConstantBasis(2, 2).evaluate(VecX(), VecX()), *c.planted_theta))
                                    : Mat2::Zero();
    auto eta_at = [&](const vehicle::TrackedState& s) {
        return c.planted_theta ? Vec2(1.0, 1.0) : provider.eta_tracked(s.p_x, s.p_y);
    };
    auto deriv = [&](const vehicle::TrackedState& s, const vehicle::TrackedInput& u, const Vec2& eta) {
        vehicle::TrackedState d = vehicle::tracked_derivative(s, u, P, eta);
        if (c.planted_theta) {
            const Vec2 extra = planted_offset * u.vector();
            d.v_x += extra.x();
            d.omega += extra.y();
        }
        return d;
    };

    std::vector<std::string> cols = {"t", "p_x", "p_y", "psi", "v_x", "omega", "p_d_x", "p_d_y", "v_ref_x",
                                     "omega_ref", "psi_ref", "s_0", "s_1", "u_v", "u_omega", "u_applied_v",
                                     "u_applied_omega", "y_0", "y_1"};
    append(cols, numbered("theta_", p));
    append(cols, numbered("gamma_", p));
    append(cols, {"b_hat_00", "b_hat_01", "b_hat_10", "b_hat_11", "eta_0", "eta_1"});
    append(cols, {"terrain", "fault_active", "fallback", "clamped"});
    if (c.planted_theta) append(cols, {"lyapunov", "theta_err"});

    RunResult res;
    res.run = run_index;
    res.variant = variant.name;
    res.telemetry = Telemetry(cols);

    const double dtc = c.sim.control_dt();
    const int n_ticks = static_cast<int>(std::lround(c.sim.duration / dtc));
    vehicle::TrackedInput u_cmd_prev, u_applied;
    double sum_pos2 = 0.0, sum_s0 = 0.0, sum_s1 = 0.0;
    try {
        for (int k = 0; k <= n_ticks; ++k) {
            const double t = k * dtc;
            const Vec2 eta = eta_at(x);
            const vehicle::TrackedState xd = deriv(x, u_applied, eta);
            Vec2 vdot(xd.v_x, xd.omega);
            if (c.sim.vdot_noise_std > 0.0) vdot += c.sim.vdot_noise_std * Vec2(noise(noise_rng), noise(noise_rng));
            const Vec2 v = x.velocity();
            const Vec2 y = residual.tracked(vdot, v, u_cmd_prev.vector(), P);
            const VecX e = provider.features_under_robot(x.p_x, x.p_y, x.psi);
            const basis::BasisOutput phi = basis->evaluate(v, e);

            control::ReferenceState ref;
            Vec2 p_d;
            if (velocity_mode) {
                const VelocitySample vs = profile->at(t);
                ref.v_ref_x = vs.v;
                ref.omega_ref = vs.omega;
                ref.v_ref_x_dot = vs.v_dot;
                ref.omega_ref_dot = vs.omega_dot;
                const Pose& pp = profile->planned(static_cast<std::size_t>(k) * c.sim.control_every);
                ref.psi_ref = pp.psi;
                p_d = Vec2(pp.x, pp.y);
            } else {
                const control::DesiredPose d = traj->at(t);
                ref = refgen.update(x.position(), x.psi, d);
                p_d = d.p_d;
            }
            const Vec2 s = control::tracking_error(v, ref);
            if (variant.adapt && k > 0) {
                const MatX H = phi.design(u_cmd_prev.vector());
                (void)control::adapt_step(st, acfg, s, y, H, dtc);
            }
            const control::TrackedCommand cmd =
                control::control_tracked(s, ref, phi, st.theta_hat, P, c.tracked_gains, c.limits, c.max_condition);
            const bool fault_on = !c.fault.is_identity() && c.fault.active_at(t);

            if (k < n_ticks) {
                const double pe = (x.position() - p_d).norm();
                sum_pos2 += pe * pe;
                sum_s0 += s(0) * s(0);
                sum_s1 += s(1) * s(1);
                res.cumulative_error += (c.error_metric == ErrorMetric::Velocity ? s.norm() : pe) * dtc;
                res.fallback_steps += cmd.fallback;
                res.clamped_steps += cmd.clamped;
            }
            if (keep) {
                const terrain::CellIndex ci = world_->locate(x.p_x, x.p_y);
                std::vector<double> row = {t,       x.p_x,       x.p_y,         x.psi,     x.v_x,      x.omega,
                                           p_d.x(), p_d.y(),     ref.v_ref_x,   ref.omega_ref, ref.psi_ref,
                                           s(0),    s(1),        cmd.u.u_v,     cmd.u.u_omega};
                const vehicle::TrackedInput ua = vehicle::apply_track_fault(cmd.u, c.fault, t);
                push(row, Vec2(ua.u_v, ua.u_omega));
                push(row, y);
                push(row, st.theta_hat);
                push(row, st.gain_matrix(acfg.law).diagonal());
                push(row, Eigen::Vector4d(cmd.B_hat(0, 0), cmd.B_hat(0, 1), cmd.B_hat(1, 0), cmd.B_hat(1, 1)));
                push(row, eta);
                row.push_back(world_->class_at(ci.row, ci.col));
                row.push_back(fault_on ? 1.0 : 0.0);
                row.push_back(cmd.fallback ? 1.0 : 0.0);
                row.push_back(cmd.clamped ? 1.0 : 0.0);
                if (c.planted_theta) {
                    row.push_back(control::lyapunov_value(s, st, acfg.law, *c.planted_theta));
                    row.push_back((st.theta_hat - *c.planted_theta).norm());
                }
                res.telemetry.append(std::move(row));
            }
            if (k == n_ticks) break;

            for (int j = 0; j < c.sim.control_every; ++j) {
                const double tp = t + j * c.sim.dt;
                u_applied = vehicle::apply_track_fault(cmd.u, c.fault, tp);
                const Vec2 eta_j = eta_at(x);
                const auto next = vehicle::rk4(x.to_vector(), c.sim.dt, [&](const Eigen::Matrix<double, 5, 1>& z) {
                    return deriv(vehicle::TrackedState::from_vector(z), u_applied, eta_j).to_vector();
                });
                x = vehicle::TrackedState::from_vector(next);
                x.psi = wrap_angle(x.psi);
                require_finite(next, "tracked state");
            }
            u_cmd_prev = cmd.u;
        }
    } catch (const Error& err) {
        res.ok = false;
        res.failure = std::string(err.kind()) + ": " + err.what();
        log().warn("run {} ({}) aborted: {}", run_index, variant.name, res.failure);
    }
    res.ticks = n_ticks;
    res.position_rmse = std::sqrt(sum_pos2 / n_ticks);
    res.velocity_rmse_v = std::sqrt(sum_s0 / n_ticks);
    res.velocity_rmse_omega = std::sqrt(sum_s1 / n_ticks);
    res.rejected_adapt_steps = st.rejected_steps;
    res.gain_clamped_steps = st.clamped_steps;
    res.feature_clamps = provider.clamp_count();
    res.final_theta = st.theta_hat;
    return res;
}

RunResult ScenarioRunner::run_ackermann(int run_index, const Variant& variant, bool keep) const {
    const ScenarioConfig& c = cfg_;
    const std::uint64_t seed = run_seed(c.seed, run_index);
    std::mt19937_64 rng(seed);
    std::mt19937_64 noise_rng(seed ^ 0xA5A5A5A5ULL);
    std::normal_distribution<double> noise(0.0, 1.0);
    terrain::FeatureProviderConfig fcfg = c.features;
    fcfg.seed = seed ^ 0x5A5A5A5AULL;
    terrain::FeatureProvider provider(world_, fcfg);

    const auto basis = make_basis(variant);
    const int p = basis->shape().n_theta;
    const control::AdaptConfig acfg = c.adapt.build(2, p);
    control::AdaptState st = control::AdaptState::initial(acfg, initial_theta(variant, p));
    control::ResidualEstimator residual(c.sim.residual_cutoff_hz, c.sim.control_dt(), c.sim.residual_filter);
    const vehicle::AckermannParams& P = c.ackermann;

    const CirclePath path{c.trajectory.center, c.trajectory.radius};
    std::uniform_real_distribution<double> uang(-std::numbers::pi, std::numbers::pi);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double a0 = uang(rng);
    const double r0 = c.trajectory.radius + c.trajectory.start_pos_noise * n01(rng);
    vehicle::AckermannState x;
    x.p_x = path.center.x() + r0 * std::cos(a0);
    x.p_y = path.center.y() + r0 * std::sin(a0);
    x.psi = wrap_angle(a0 + 0.5 * std::numbers::pi + c.trajectory.start_heading_noise * n01(rng));
    x.v_x = c.speed_setpoint;
    x.omega = c.speed_setpoint / c.trajectory.radius;

    std::vector<std::string> cols = {"t",      "p_x", "p_y", "psi",    "v_x",     "v_y",     "omega",
                                     "p_d_x",  "p_d_y", "e_parallel", "e_perp", "psi_e", "s_perp", "u_v",
                                     "u_delta", "y_0", "y_1"};
    append(cols, numbered("theta_", p));
    append(cols, numbered("gamma_", p));
    append(cols, {"terrain", "fallback", "clamped"});

    RunResult res;
    res.run = run_index;
    res.variant = variant.name;
    res.telemetry = Telemetry(cols);

    const double dtc = c.sim.control_dt();
    const int n_ticks = static_cast<int>(std::lround(c.sim.duration / dtc));
    vehicle::AckermannInput u{c.speed_setpoint, 0.0};
    double sum_pos2 = 0.0, sum_s0 = 0.0;
    try {
        for (int k = 0; k <= n_ticks; ++k) {
            const double t = k * dtc;
            const double eta = provider.eta_lateral(x.p_x, x.p_y);
            const vehicle::AckermannState xd = vehicle::ackermann_derivative(x, u, P, eta);
            Vec2 meas(xd.v_y, xd.omega);
            if (c.sim.vdot_noise_std > 0.0) meas += c.sim.vdot_noise_std * Vec2(noise(noise_rng), noise(noise_rng));
            const Vec2 y = residual.lateral(meas, x.lateral(), x.v_x, u.u_delta, P);
            const VecX e = provider.features_under_robot(x.p_x, x.p_y, x.psi);
            const basis::BasisOutput phi = basis->evaluate(Eigen::Vector3d(x.v_x, x.v_y, x.omega), e);

            const control::PathFrame frame = path.frame(x.position(), x.v_x);
            const control::LateralErrorState err = control::lateral_errors(x, frame, c.lateral_gains.k_p, P.v_min);
            if (variant.adapt && k > 0) {
                const MatX H = phi.design(VecX::Constant(1, u.u_delta));
                (void)control::adapt_step(st, acfg, Vec2(err.s_perp, 0.0), y, H, dtc);
            }
            const double v_x_dot = (c.speed_setpoint - x.v_x) / P.tau_v;
            const control::SteeringCommand cmd =
                control::control_ackermann(err, x, v_x_dot, frame.omega_d, phi, st.theta_hat, P, c.lateral_gains);
            u = {c.speed_setpoint, cmd.u_delta};

            if (k < n_ticks) {
                const double pe = (x.position() - frame.origin).norm();
                sum_pos2 += pe * pe;
                sum_s0 += err.s_perp * err.s_perp;
                res.cumulative_error += (c.error_metric == ErrorMetric::Velocity ? std::abs(err.s_perp) : pe) * dtc;
                res.fallback_steps += cmd.fallback;
                res.clamped_steps += cmd.clamped;
            }
            if (keep) {
                const terrain::CellIndex ci = world_->locate(x.p_x, x.p_y);
                std::vector<double> row = {t,          x.p_x,  x.p_y,     x.psi,      x.v_x,
                                           x.v_y,      x.omega, frame.origin.x(), frame.origin.y(), err.e_parallel,
                                           err.e_perp, err.psi_e, err.s_perp, u.u_v,  u.u_delta};
                push(row, y);
                push(row, st.theta_hat);
                push(row, st.gain_matrix(acfg.law).diagonal());
                row.push_back(world_->class_at(ci.row, ci.col));
                row.push_back(cmd.fallback ? 1.0 : 0.0);
                row.push_back(cmd.clamped ? 1.0 : 0.0);
                res.telemetry.append(std::move(row));
            }
            if (k == n_ticks) break;
            for (int j = 0; j < c.sim.control_every; ++j) {
                x = vehicle::integrate_step(x, u, P, provider.eta_lateral(x.p_x, x.p_y), c.sim.dt);
                require_finite(x.to_vector(), "ackermann state");
            }
        }
    } catch (const Error& err) {
        res.ok = false;
        res.failure = std::string(err.kind()) + ": " + err.what();
        log().warn("run {} ({}) aborted: {}", run_index, variant.name, res.failure);
    }
    res.ticks = n_ticks;
    res.position_rmse = std::sqrt(sum_pos2 / n_ticks);
    res.velocity_rmse_v = std::sqrt(sum_s0 / n_ticks);
    res.rejected_adapt_steps = st.rejected_steps;
    res.gain_clamped_steps = st.clamped_steps;
    res.feature_clamps = provider.clamp_count();
    res.final_theta = st.theta_hat;
    return res;
}

} // namespace terradapt::sim
