#include "terradapt/sim/datagen.hpp"

#include <cmath>
#include <random>

#include "terradapt/common/error.hpp"
#include "terradapt/control/residual.hpp"
#include "terradapt/terrain/feature_provider.hpp"
#include "terradapt/vehicle/fault.hpp"
#include "terradapt/vehicle/integrator.hpp"

namespace terradapt::sim {

namespace {

// Heading error toward the map centre when inside the edge band, else nullopt.
std::optional<double> edge_turn(double x, double y, double psi, double W, double H, double band) {
    const bool near = x < band * W || x > (1.0 - band) * W || y < band * H || y > (1.0 - band) * H;
    if (!near) return std::nullopt;
    const double to_centre = std::atan2(0.5 * H - y, 0.5 * W - x);
    return angle_diff(to_centre, psi);
}

struct Segment {
    int ticks_left = 0;
    double a = 0.0;
    double b = 0.0;
    double left = 1.0;
    double right = 1.0;
};

void fill_meta(trainer::TrajectoryDataset& ds, const ScenarioConfig& sc, const DatagenConfig& gen,
               const terrain::TerrainWorld& world) {
    const json meta = {{"vehicle", sc.vehicle == VehicleType::Tracked ? "tracked" : "ackermann"},
                       {"seed", gen.seed},
                       {"steps", gen.steps},
                       {"classes", world.num_classes()},
                       {"vdot_noise_std", sc.sim.vdot_noise_std},
                       {"residual_cutoff_hz", sc.sim.residual_cutoff_hz},
                       {"residual_filter", control::to_string(sc.sim.residual_filter)},
                       {"track_scale_spread", gen.track_scale_spread}};
    ds.metadata = meta.dump();
}

trainer::TrajectoryDataset tracked_data(const ScenarioConfig& sc, const DatagenConfig& gen,
                                        std::shared_ptr<const terrain::TerrainWorld> world) {
    const int ne = world->feature_dim();
    trainer::TrajectoryDataset ds;
    ds.dt = sc.sim.control_dt();
    ds.state_dim = 2;
    ds.input_dim = 2;
    ds.feature_dim = ne;
    ds.residual_dim = 2;
    fill_meta(ds, sc, gen, *world);

    const double W = world->width();
    const double H = world->height();
    const vehicle::TrackedParams& P = sc.tracked;
    std::mt19937_64 rng(gen.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);

    for (int n = 0; n < gen.trajectories; ++n) {
        terrain::FeatureProviderConfig fcfg = sc.features;
        fcfg.seed = gen.seed * 1000003ULL + static_cast<std::uint64_t>(n);
        terrain::FeatureProvider provider(world, fcfg);
        control::ResidualEstimator residual(sc.sim.residual_cutoff_hz, ds.dt, sc.sim.residual_filter);

        vehicle::TrackedState x{0.1 * W + 0.8 * W * unit(rng), 0.1 * H + 0.8 * H * unit(rng),
                                wrap_angle(2.0 * std::numbers::pi * unit(rng)), 0.0, 0.0};
        trainer::Trajectory tr;
        tr.x.resize(2, gen.steps);
        tr.u.resize(2, gen.steps);
        tr.e.resize(ne, gen.steps);
        tr.y.resize(2, gen.steps);

        Segment seg;
        vehicle::TrackedInput u_applied;  // commanded input held over the previous tick
        vehicle::TrackFaultSchedule scale;
        for (int k = 0; k < gen.steps; ++k) {
            const Vec2 eta = provider.eta_tracked(x.p_x, x.p_y);
            const vehicle::TrackedInput u_plant = vehicle::apply_track_fault(u_applied, scale, 0.0);
            const vehicle::TrackedState d = vehicle::tracked_derivative(x, u_plant, P, eta);
            Vec2 vdot(d.v_x, d.omega);
            if (sc.sim.vdot_noise_std > 0.0) vdot += sc.sim.vdot_noise_std * Vec2(n01(rng), n01(rng));
            const Vec2 y = residual.tracked(vdot, x.velocity(), u_applied.vector(), P);
            tr.x.col(k) = x.velocity();
            tr.u.col(k) = u_applied.vector();
            tr.e.col(k) = provider.features_under_robot(x.p_x, x.p_y, x.psi);
            tr.y.col(k) = y;

            if (seg.ticks_left <= 0) {
                const double hold = gen.hold_min + (gen.hold_max - gen.hold_min) * unit(rng);
                seg.ticks_left = std::max(1, static_cast<int>(std::lround(hold / ds.dt)));
                seg.a = gen.u_v_min + (gen.u_v_max - gen.u_v_min) * unit(rng);
                seg.b = gen.u_omega_max * (2.0 * unit(rng) - 1.0);
                seg.left = 1.0 - gen.track_scale_spread * unit(rng);
                seg.right = 1.0 - gen.track_scale_spread * unit(rng);
            }
            --seg.ticks_left;
            vehicle::TrackedInput u{seg.a, seg.b};
            if (const auto turn = edge_turn(x.p_x, x.p_y, x.psi, W, H, gen.edge_band)) {
                u.u_v = std::max(0.3, std::abs(seg.a));
                u.u_omega = std::clamp(2.0 * *turn, -gen.u_omega_max, gen.u_omega_max);
            }
            scale.left_scale = seg.left;
            scale.right_scale = seg.right;
            scale.track_half_spacing = sc.fault.track_half_spacing;
            for (int j = 0; j < sc.sim.control_every; ++j) {
                const vehicle::TrackedInput up = vehicle::apply_track_fault(u, scale, 0.0);
                x = vehicle::integrate_step(x, up, P, provider.eta_tracked(x.p_x, x.p_y), sc.sim.dt);
            }
            require_finite(x.to_vector(), "datagen tracked state");
            u_applied = u;
        }
        ds.trajectories.push_back(std::move(tr));
    }
    return ds;
}

trainer::TrajectoryDataset ackermann_data(const ScenarioConfig& sc, const DatagenConfig& gen,
                                          std::shared_ptr<const terrain::TerrainWorld> world) {
    const int ne = world->feature_dim();
    trainer::TrajectoryDataset ds;
    ds.dt = sc.sim.control_dt();
    ds.state_dim = 3;
    ds.input_dim = 1;
    ds.feature_dim = ne;
    ds.residual_dim = 2;
    fill_meta(ds, sc, gen, *world);

    const double W = world->width();
    const double H = world->height();
    const vehicle::AckermannParams& P = sc.ackermann;
    std::mt19937_64 rng(gen.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const double speed = sc.speed_setpoint;

    for (int n = 0; n < gen.trajectories; ++n) {
        terrain::FeatureProviderConfig fcfg = sc.features;
        fcfg.seed = gen.seed * 1000003ULL + static_cast<std::uint64_t>(n);
        terrain::FeatureProvider provider(world, fcfg);
        control::ResidualEstimator residual(sc.sim.residual_cutoff_hz, ds.dt, sc.sim.residual_filter);

        vehicle::AckermannState x;
        x.p_x = 0.1 * W + 0.8 * W * unit(rng);
        x.p_y = 0.1 * H + 0.8 * H * unit(rng);
        x.psi = wrap_angle(2.0 * std::numbers::pi * unit(rng));
        x.v_x = speed;
        trainer::Trajectory tr;
        tr.x.resize(3, gen.steps);
        tr.u.resize(1, gen.steps);
        tr.e.resize(ne, gen.steps);
        tr.y.resize(2, gen.steps);

        Segment seg;
        vehicle::AckermannInput u{speed, 0.0};
        for (int k = 0; k < gen.steps; ++k) {
            const double eta = provider.eta_lateral(x.p_x, x.p_y);
            const vehicle::AckermannState d = vehicle::ackermann_derivative(x, u, P, eta);
            Vec2 meas(d.v_y, d.omega);
            if (sc.sim.vdot_noise_std > 0.0) meas += sc.sim.vdot_noise_std * Vec2(n01(rng), n01(rng));
            const Vec2 y = residual.lateral(meas, x.lateral(), x.v_x, u.u_delta, P);
            tr.x.col(k) = Eigen::Vector3d(x.v_x, x.v_y, x.omega);
            tr.u(0, k) = u.u_delta;
            tr.e.col(k) = provider.features_under_robot(x.p_x, x.p_y, x.psi);
            tr.y.col(k) = y;

            if (seg.ticks_left <= 0) {
                const double hold = gen.hold_min + (gen.hold_max - gen.hold_min) * unit(rng);
                seg.ticks_left = std::max(1, static_cast<int>(std::lround(hold / ds.dt)));
                seg.b = gen.u_delta_max * (2.0 * unit(rng) - 1.0);
            }
            --seg.ticks_left;
            u.u_delta = seg.b;
            if (const auto turn = edge_turn(x.p_x, x.p_y, x.psi, W, H, gen.edge_band))
                u.u_delta = std::clamp(*turn, -gen.u_delta_max, gen.u_delta_max);
            for (int j = 0; j < sc.sim.control_every; ++j)
                x = vehicle::integrate_step(x, u, P, provider.eta_lateral(x.p_x, x.p_y), sc.sim.dt);
            require_finite(x.to_vector(), "datagen ackermann state");
        }
        ds.trajectories.push_back(std::move(tr));
    }
    return ds;
}

} // namespace

trainer::TrajectoryDataset generate_dataset(const ScenarioConfig& scenario, const DatagenConfig& gen,
                                            std::shared_ptr<const terrain::TerrainWorld> world) {
    gen.validate();
    if (!world) throw ConfigError("datagen needs a world");
    trainer::TrajectoryDataset ds = scenario.vehicle == VehicleType::Tracked ? tracked_data(scenario, gen, world)
                                                                             : ackermann_data(scenario, gen, world);
    ds.validate();
    return ds;
}

} // namespace terradapt::sim
