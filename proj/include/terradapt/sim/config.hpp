#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "terradapt/control/adaptation.hpp"
#include "terradapt/control/lateral.hpp"
#include "terradapt/control/residual.hpp"
#include "terradapt/control/tracked_controller.hpp"
#include "terradapt/terrain/feature_provider.hpp"
#include "terradapt/trainer/train.hpp"
#include "terradapt/vehicle/fault.hpp"

namespace terradapt::sim {

using json = nlohmann::json;

enum class VehicleType { Tracked, Ackermann };

struct SimSettings {
    double dt = 0.01;             // plant step (s)
    int control_every = 5;        // plant steps per controller tick
    double vdot_noise_std = 0.05; // additive noise on measured accelerations
    double residual_cutoff_hz = 2.0;
    control::ResidualFilterMode residual_filter = control::ResidualFilterMode::Residual;
    double duration = 40.0;       // s per run

    [[nodiscard]] double control_dt() const { return dt * control_every; }
    void validate() const;
};

// Gains for one adaptation law instance; Q and R are built per basis size.
struct AdaptGains {
    control::AdaptLaw law = control::AdaptLaw::Scalar;
    double lambda = 0.01;
    std::vector<double> r_diag = {0.1, 0.1};
    double q = 1.0;
    double gamma0 = 0.01;
    double gamma_min = 1e-4;
    double gamma_max = 1e3;

    [[nodiscard]] control::AdaptConfig build(int n, int n_theta) const;
};

enum class TrajectoryKind { RandomVelocity, Figure8, Waypoints, Circle };

struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::RandomVelocity;
    // random velocity profile
    double v_min = 0.2;
    double v_max = 0.8;
    double omega_max = 0.6;
    double hold_min = 2.0;
    double hold_max = 5.0;
    double ramp = 1.0;
    double edge_band = 0.15;  // fraction of map size that triggers a turn toward the centre
    // figure-8 (lemniscate of Gerono): centre, half-width a, half-height b, period
    Vec2 center = Vec2(15.0, 15.0);
    double size_x = 3.0;
    double size_y = 3.0;
    double period = 40.0;
    // waypoints
    std::vector<Vec2> waypoints;
    double speed = 0.5;
    // circle (Ackermann)
    double radius = 4.0;
    // start pose perturbation for pose-tracking trajectories
    double start_pos_noise = 0.2;
    double start_heading_noise = 0.2;
};

enum class ErrorMetric { Velocity, Position };

// One controller configuration compared in an evaluation.
struct Variant {
    std::string name;
    bool use_dnn = false;
    bool adapt = true;
    bool zero_theta = false;       // start from theta = 0
    bool reference_theta = false;  // start from theta_r instead of the checkpoint theta0
};

Variant variant_by_name(const std::string& name);

struct ScenarioConfig {
    std::string name = "scenario";
    VehicleType vehicle = VehicleType::Tracked;
    terrain::WorldSpec world;
    std::string world_grid;  // optional recorded world (feature mode recorded-lookup)
    terrain::FeatureProviderConfig features;
    vehicle::TrackedParams tracked;
    vehicle::AckermannParams ackermann;
    SimSettings sim;
    control::TrackedGains tracked_gains;
    control::PoseGains pose_gains;
    control::LateralGains lateral_gains;
    control::ActuatorLimits limits;
    double max_condition = 1e6;
    double speed_setpoint = 1.5;  // Ackermann forward speed (m/s)
    AdaptGains adapt;
    TrajectorySpec trajectory;
    vehicle::TrackFaultSchedule fault;
    std::optional<VecX> planted_theta;  // plant uses B_n + Phi_const theta instead of eta
    ErrorMetric error_metric = ErrorMetric::Velocity;
    int runs = 40;
    std::uint64_t seed = 1;
    std::vector<std::string> variants = {"constant", "dnn"};
    std::string checkpoint;  // resolved path
    std::vector<double> theta_r = {1.0, 1.0, 1.0, 1.0};

    void validate() const;
};

struct DatagenConfig {
    int steps = 20000;
    int trajectories = 1;
    double hold_min = 1.0;
    double hold_max = 4.0;
    double u_v_min = -0.2;
    double u_v_max = 1.2;
    double u_omega_max = 1.0;
    double u_delta_max = 0.3;
    double edge_band = 0.15;
    // Per-segment random per-track speed scaling; 0 disables.
    double track_scale_spread = 0.0;
    std::uint64_t seed = 11;

    void validate() const;
};

struct Config {
    json raw;                         // merged document
    std::filesystem::path source;     // file it came from
    std::filesystem::path output_dir;
    std::filesystem::path dataset;
    std::filesystem::path checkpoint;
    ScenarioConfig scenario;
    DatagenConfig datagen;
    trainer::TrainerConfig trainer;
};

// Loads a JSON config. "extends": "base.json" is merged first (RFC 7386 merge
// patch). Relative paths in the file resolve against its directory; dataset
// and checkpoint default to files inside output_dir. TERRADAPT_OUTPUT_DIR
// overrides output_dir.
Config load_config(const std::filesystem::path& path);
Config parse_config(const json& doc, const std::filesystem::path& base_dir);

// Helpers shared with the Python bindings.
terrain::WorldSpec parse_world(const json& j);

} // namespace terradapt::sim
