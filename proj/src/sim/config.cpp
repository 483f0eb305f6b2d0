#include "terradapt/sim/config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>

#include "terradapt/vehicle/integrator.hpp"

namespace terradapt::sim {

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& section) {
    if (!j.is_object()) throw ConfigError("'" + section + "' must be an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!ok.count(it.key())) throw ConfigError("unknown key '" + it.key() + "' in " + section);
}

template <class T>
void read(const json& j, const char* key, T& out, const std::string& section) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(section + "." + key + " has the wrong type");
    }
}

std::vector<double> read_diag(const json& v, int n, const std::string& what) {
    if (v.is_number()) return std::vector<double>(static_cast<std::size_t>(n), v.get<double>());
    if (v.is_array()) return v.get<std::vector<double>>();
    throw ConfigError(what + " must be a number or an array");
}

Vec2 read_vec2(const json& v, const std::string& what) {
    if (!v.is_array() || v.size() != 2) throw ConfigError(what + " must be a 2-element array");
    return {v[0].get<double>(), v[1].get<double>()};
}

json load_json_file(const std::filesystem::path& path, int depth) {
    if (depth > 8) throw ConfigError("config 'extends' chain too deep");
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(path.string() + ": top level must be an object");
    // Relative paths are relative to the file that sets them, so anchor them
    // before merging with files in other directories.
    auto anchor = [&](json& obj, const char* key) {
        if (!obj.is_object() || !obj.contains(key) || !obj[key].is_string()) return;
        const std::filesystem::path p = obj[key].get<std::string>();
        if (p.is_relative()) obj[key] = (std::filesystem::absolute(path).parent_path() / p).lexically_normal().string();
    };
    for (const char* key : {"output_dir", "dataset", "checkpoint"}) anchor(doc, key);
    if (doc.contains("world")) anchor(doc["world"], "grid_file");
    if (doc.contains("extends")) {
        std::filesystem::path base = doc["extends"].get<std::string>();
        if (base.is_relative()) base = path.parent_path() / base;
        json merged = load_json_file(base, depth + 1);
        doc.erase("extends");
        merged.merge_patch(doc);
        return merged;
    }
    return doc;
}

} // namespace

void SimSettings::validate() const {
    if (!(dt > 0.0) || dt > vehicle::kMaxStep) throw ConfigError("sim.dt must lie in (0, 0.1]");
    if (control_every < 1) throw ConfigError("sim.control_every must be at least 1");
    if (vdot_noise_std < 0.0) throw ConfigError("sim.vdot_noise_std must be non-negative");
    if (!(residual_cutoff_hz > 0.0)) throw ConfigError("sim.residual_cutoff_hz must be positive");
    if (!(duration > 0.0)) throw ConfigError("sim.duration must be positive");
}

control::AdaptConfig AdaptGains::build(int n, int n_theta) const {
    control::AdaptConfig c;
    c.law = law;
    c.lambda = lambda;
    if (r_diag.size() != static_cast<std::size_t>(n))
        throw ConfigError("controller.adapt.R needs " + std::to_string(n) + " entries");
    c.R = MatX::Zero(n, n);
    for (int i = 0; i < n; ++i) c.R(i, i) = r_diag[static_cast<std::size_t>(i)];
    c.Q = MatX::Identity(n_theta, n_theta) * q;
    c.gamma0 = gamma0;
    c.gamma_min = gamma_min;
    c.gamma_max = gamma_max;
    c.validate(n, n_theta);
    return c;
}

Variant variant_by_name(const std::string& name) {
    if (name == "pd") return {"pd", false, false, true};
    if (name == "constant") return {"constant", false, true, true};
    if (name == "constant-frozen") return {"constant-frozen", false, false, true};
    if (name == "dnn") return {"dnn", true, true, false};
    if (name == "dnn-frozen") return {"dnn-frozen", true, false, false};
    // Adaptation off with theta held at the regularization target.
    if (name == "dnn-off") return {"dnn-off", true, false, false, true};
    throw ConfigError("unknown controller variant '" + name +
                      "' (expected pd, constant, constant-frozen, dnn, dnn-frozen, dnn-off)");
}

void ScenarioConfig::validate() const {
    sim.validate();
    features.validate();
    if (world_grid.empty()) world.validate();
    if (vehicle == VehicleType::Tracked) tracked.validate();
    else ackermann.validate();
    fault.validate();
    if (runs < 1) throw ConfigError("runs must be at least 1");
    if (variants.empty()) throw ConfigError("at least one controller variant is required");
    for (const auto& v : variants) (void)variant_by_name(v);
    if (!(tracked_gains.k_dx > 0.0 && tracked_gains.k_domega > 0.0)) throw ConfigError("k_dx, k_domega must be positive");
    if (!(lateral_gains.k_p > 0.0 && lateral_gains.k_v > 0.0)) throw ConfigError("k_p, k_v must be positive");
    if (!(limits.u_v_max > 0.0 && limits.u_omega_max > 0.0)) throw ConfigError("actuator limits must be positive");
    if (trajectory.v_max < trajectory.v_min || trajectory.hold_max < trajectory.hold_min || !(trajectory.hold_min > 0.0))
        throw ConfigError("trajectory ranges are inconsistent");
    if (trajectory.kind == TrajectoryKind::Waypoints && trajectory.waypoints.size() < 2)
        throw ConfigError("waypoint trajectory needs at least two waypoints");
    if (trajectory.kind == TrajectoryKind::Circle && vehicle != VehicleType::Ackermann)
        throw ConfigError("circle trajectory is only defined for the ackermann vehicle");
    if (vehicle == VehicleType::Ackermann && trajectory.kind != TrajectoryKind::Circle)
        throw ConfigError("the ackermann vehicle supports the circle trajectory only");
    if (!(trajectory.period > 0.0) || !(trajectory.radius > 0.0) || !(trajectory.speed > 0.0))
        throw ConfigError("trajectory period, radius and speed must be positive");
    if (planted_theta && planted_theta->size() != 4) throw ConfigError("planted_theta needs 4 entries");
    if (planted_theta && vehicle != VehicleType::Tracked) throw ConfigError("planted_theta is tracked-only");
    // Both plants expose a 2-component residual.
    (void)adapt.build(2, static_cast<int>(theta_r.size()));
}

void DatagenConfig::validate() const {
    if (steps < 1 || trajectories < 1) throw ConfigError("datagen steps and trajectories must be positive");
    if (!(hold_min > 0.0) || hold_max < hold_min) throw ConfigError("datagen hold range is invalid");
    if (u_v_max < u_v_min) throw ConfigError("datagen u_v range is invalid");
    if (track_scale_spread < 0.0 || track_scale_spread >= 1.0) throw ConfigError("track_scale_spread must lie in [0, 1)");
}

terrain::WorldSpec parse_world(const json& j) {
    check_keys(j, {"rows", "cols", "tile_rows", "tile_cols", "cell_size", "feature_dim", "class_separation",
                   "intra_class_std", "sites_per_tile", "layout", "feature_seed", "layout_seed", "noise_seed",
                   "classes", "tile_layout", "grid_file"},
               "world");
    terrain::WorldSpec w;
    const std::string s = "world";
    read(j, "rows", w.rows, s);
    read(j, "cols", w.cols, s);
    read(j, "tile_rows", w.tile_rows, s);
    read(j, "tile_cols", w.tile_cols, s);
    read(j, "cell_size", w.cell_size, s);
    read(j, "feature_dim", w.feature_dim, s);
    read(j, "class_separation", w.class_separation, s);
    read(j, "intra_class_std", w.intra_class_std, s);
    read(j, "sites_per_tile", w.sites_per_tile, s);
    read(j, "layout", w.layout, s);
    read(j, "feature_seed", w.feature_seed, s);
    read(j, "layout_seed", w.layout_seed, s);
    read(j, "noise_seed", w.noise_seed, s);
    read(j, "tile_layout", w.tile_layout, s);
    if (j.contains("classes")) {
        for (const auto& c : j["classes"]) {
            check_keys(c, {"name", "eta", "eta_lateral", "twin_of", "appearance_shift"}, "world.classes");
            terrain::TerrainClass tc;
            read(c, "name", tc.name, "world.classes");
            if (c.contains("eta")) tc.eta_tracked = read_vec2(c["eta"], "world.classes.eta");
            if (c.contains("eta_lateral")) tc.eta_lateral = c["eta_lateral"].get<double>();
            read(c, "twin_of", tc.twin_of, "world.classes");
            read(c, "appearance_shift", tc.appearance_shift, "world.classes");
            w.classes.push_back(tc);
        }
    }
    return w;
}

Config parse_config(const json& doc, const std::filesystem::path& base_dir) {
    check_keys(doc, {"name", "seed", "output_dir", "dataset", "checkpoint", "vehicle", "world", "features", "plant",
                     "sim", "controller", "trajectory", "fault", "error_metric", "runs", "variants", "theta_r",
                     "datagen", "trainer"},
               "config");
    Config cfg;
    cfg.raw = doc;
    ScenarioConfig& sc = cfg.scenario;
    read(doc, "name", sc.name, "config");
    read(doc, "seed", sc.seed, "config");
    read(doc, "runs", sc.runs, "config");
    read(doc, "variants", sc.variants, "config");
    read(doc, "theta_r", sc.theta_r, "config");

    auto resolve = [&](const std::filesystem::path& p) { return p.is_relative() ? base_dir / p : p; };
    std::string out = "out/" + sc.name;
    read(doc, "output_dir", out, "config");
    cfg.output_dir = resolve(out);
    if (const char* env = std::getenv("TERRADAPT_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
    auto resolve_out = [&](const char* key, const char* fallback) {
        std::filesystem::path p = fallback;
        if (doc.contains(key)) {
            p = doc[key].get<std::string>();
            return p.is_relative() ? resolve(p) : p;
        }
        return cfg.output_dir / p;
    };
    cfg.dataset = resolve_out("dataset", "dataset.csv");
    cfg.checkpoint = resolve_out("checkpoint", "basis.ckpt");
    sc.checkpoint = cfg.checkpoint.string();

    const std::string vehicle = doc.value("vehicle", std::string("tracked"));
    if (vehicle == "tracked") sc.vehicle = VehicleType::Tracked;
    else if (vehicle == "ackermann") sc.vehicle = VehicleType::Ackermann;
    else throw ConfigError("vehicle must be tracked or ackermann");

    if (doc.contains("world")) {
        sc.world = parse_world(doc["world"]);
        if (doc["world"].contains("grid_file")) sc.world_grid = resolve(doc["world"]["grid_file"].get<std::string>()).string();
    }

    if (doc.contains("features")) {
        const json& f = doc["features"];
        check_keys(f, {"mode", "noise_std", "brightness", "patch_offset"}, "features");
        read(f, "noise_std", sc.features.noise_std, "features");
        read(f, "brightness", sc.features.brightness, "features");
        read(f, "patch_offset", sc.features.patch_offset, "features");
        const std::string mode = f.value("mode", std::string("synthetic-tiles"));
        if (mode == "synthetic-tiles") sc.features.mode = terrain::FeatureMode::SyntheticTiles;
        else if (mode == "recorded-lookup") sc.features.mode = terrain::FeatureMode::RecordedLookup;
        else throw ConfigError("features.mode must be synthetic-tiles or recorded-lookup");
    }
    if (sc.features.mode == terrain::FeatureMode::RecordedLookup && sc.world_grid.empty())
        throw ConfigError("recorded-lookup features need world.grid_file");

    if (doc.contains("plant")) {
        const json& p = doc["plant"];
        check_keys(p, {"tracked", "ackermann", "planted_theta"}, "plant");
        if (p.contains("tracked")) {
            const json& t = p["tracked"];
            check_keys(t, {"k1", "k2", "tau_v", "tau_omega", "x_icr"}, "plant.tracked");
            read(t, "k1", sc.tracked.k1, "plant.tracked");
            read(t, "k2", sc.tracked.k2, "plant.tracked");
            read(t, "tau_v", sc.tracked.tau_v, "plant.tracked");
            read(t, "tau_omega", sc.tracked.tau_omega, "plant.tracked");
            read(t, "x_icr", sc.tracked.x_icr, "plant.tracked");
        }
        if (p.contains("ackermann")) {
            const json& a = p["ackermann"];
            check_keys(a, {"m", "I_z", "L", "C_y", "tau_v", "v_min"}, "plant.ackermann");
            read(a, "m", sc.ackermann.m, "plant.ackermann");
            read(a, "I_z", sc.ackermann.I_z, "plant.ackermann");
            read(a, "L", sc.ackermann.L, "plant.ackermann");
            read(a, "C_y", sc.ackermann.C_y, "plant.ackermann");
            read(a, "tau_v", sc.ackermann.tau_v, "plant.ackermann");
            read(a, "v_min", sc.ackermann.v_min, "plant.ackermann");
        }
        if (p.contains("planted_theta")) {
            const auto v = p["planted_theta"].get<std::vector<double>>();
            sc.planted_theta = Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
        }
    }

    if (doc.contains("sim")) {
        const json& s = doc["sim"];
        check_keys(s, {"dt", "control_every", "vdot_noise_std", "residual_cutoff_hz", "residual_filter", "duration"}, "sim");
        read(s, "dt", sc.sim.dt, "sim");
        read(s, "control_every", sc.sim.control_every, "sim");
        read(s, "vdot_noise_std", sc.sim.vdot_noise_std, "sim");
        read(s, "residual_cutoff_hz", sc.sim.residual_cutoff_hz, "sim");
        if (s.contains("residual_filter"))
            sc.sim.residual_filter = control::parse_residual_filter_mode(s["residual_filter"].get<std::string>());
        read(s, "duration", sc.sim.duration, "sim");
    }

    if (doc.contains("controller")) {
        const json& c = doc["controller"];
        const std::string s = "controller";
        check_keys(c, {"k_dx", "k_domega", "k_px", "k_py", "k_psi", "v_eps", "k_p", "k_v", "b_min", "delta_max",
                       "u_v_max", "u_omega_max", "max_condition", "speed", "adapt"},
                   s);
        read(c, "k_dx", sc.tracked_gains.k_dx, s);
        read(c, "k_domega", sc.tracked_gains.k_domega, s);
        read(c, "k_px", sc.pose_gains.k_px, s);
        read(c, "k_py", sc.pose_gains.k_py, s);
        read(c, "k_psi", sc.pose_gains.k_psi, s);
        read(c, "v_eps", sc.pose_gains.v_eps, s);
        read(c, "k_p", sc.lateral_gains.k_p, s);
        read(c, "k_v", sc.lateral_gains.k_v, s);
        read(c, "b_min", sc.lateral_gains.b_min, s);
        read(c, "delta_max", sc.lateral_gains.delta_max, s);
        read(c, "u_v_max", sc.limits.u_v_max, s);
        read(c, "u_omega_max", sc.limits.u_omega_max, s);
        read(c, "max_condition", sc.max_condition, s);
        read(c, "speed", sc.speed_setpoint, s);
        if (c.contains("adapt")) {
            const json& a = c["adapt"];
            const std::string sa = "controller.adapt";
            check_keys(a, {"law", "lambda", "R", "Q", "gamma0", "gamma_min", "gamma_max"}, sa);
            if (a.contains("law")) sc.adapt.law = control::parse_adapt_law(a["law"].get<std::string>());
            read(a, "lambda", sc.adapt.lambda, sa);
            if (a.contains("R")) sc.adapt.r_diag = read_diag(a["R"], 2, "controller.adapt.R");
            read(a, "Q", sc.adapt.q, sa);
            read(a, "gamma0", sc.adapt.gamma0, sa);
            read(a, "gamma_min", sc.adapt.gamma_min, sa);
            read(a, "gamma_max", sc.adapt.gamma_max, sa);
        }
    }

    if (doc.contains("trajectory")) {
        const json& t = doc["trajectory"];
        const std::string s = "trajectory";
        check_keys(t, {"kind", "v_min", "v_max", "omega_max", "hold_min", "hold_max", "ramp", "edge_band", "center",
                       "size_x", "size_y", "period", "waypoints", "speed", "radius", "start_pos_noise",
                       "start_heading_noise"},
                   s);
        TrajectorySpec& ts = sc.trajectory;
        const std::string kind = t.value("kind", std::string("random-velocity"));
        if (kind == "random-velocity") ts.kind = TrajectoryKind::RandomVelocity;
        else if (kind == "figure8") ts.kind = TrajectoryKind::Figure8;
        else if (kind == "waypoints") ts.kind = TrajectoryKind::Waypoints;
        else if (kind == "circle") ts.kind = TrajectoryKind::Circle;
        else throw ConfigError("trajectory.kind must be random-velocity, figure8, waypoints or circle");
        read(t, "v_min", ts.v_min, s);
        read(t, "v_max", ts.v_max, s);
        read(t, "omega_max", ts.omega_max, s);
        read(t, "hold_min", ts.hold_min, s);
        read(t, "hold_max", ts.hold_max, s);
        read(t, "ramp", ts.ramp, s);
        read(t, "edge_band", ts.edge_band, s);
        if (t.contains("center")) ts.center = read_vec2(t["center"], "trajectory.center");
        read(t, "size_x", ts.size_x, s);
        read(t, "size_y", ts.size_y, s);
        read(t, "period", ts.period, s);
        read(t, "speed", ts.speed, s);
        read(t, "radius", ts.radius, s);
        read(t, "start_pos_noise", ts.start_pos_noise, s);
        read(t, "start_heading_noise", ts.start_heading_noise, s);
        if (t.contains("waypoints"))
            for (const auto& w : t["waypoints"]) ts.waypoints.push_back(read_vec2(w, "trajectory.waypoints"));
    }
    sc.error_metric = sc.trajectory.kind == TrajectoryKind::RandomVelocity ? ErrorMetric::Velocity : ErrorMetric::Position;
    if (doc.contains("error_metric")) {
        const std::string m = doc["error_metric"].get<std::string>();
        if (m == "velocity") sc.error_metric = ErrorMetric::Velocity;
        else if (m == "position") sc.error_metric = ErrorMetric::Position;
        else throw ConfigError("error_metric must be velocity or position");
    }

    if (doc.contains("fault")) {
        const json& f = doc["fault"];
        check_keys(f, {"left_scale", "right_scale", "period", "duty", "track_half_spacing"}, "fault");
        read(f, "left_scale", sc.fault.left_scale, "fault");
        read(f, "right_scale", sc.fault.right_scale, "fault");
        read(f, "period", sc.fault.period, "fault");
        read(f, "duty", sc.fault.duty, "fault");
        read(f, "track_half_spacing", sc.fault.track_half_spacing, "fault");
    }

    if (doc.contains("datagen")) {
        const json& d = doc["datagen"];
        const std::string s = "datagen";
        check_keys(d, {"steps", "trajectories", "hold_min", "hold_max", "u_v_min", "u_v_max", "u_omega_max",
                       "u_delta_max", "edge_band", "track_scale_spread", "seed"},
                   s);
        DatagenConfig& g = cfg.datagen;
        read(d, "steps", g.steps, s);
        read(d, "trajectories", g.trajectories, s);
        read(d, "hold_min", g.hold_min, s);
        read(d, "hold_max", g.hold_max, s);
        read(d, "u_v_min", g.u_v_min, s);
        read(d, "u_v_max", g.u_v_max, s);
        read(d, "u_omega_max", g.u_omega_max, s);
        read(d, "u_delta_max", g.u_delta_max, s);
        read(d, "edge_band", g.edge_band, s);
        read(d, "track_scale_spread", g.track_scale_spread, s);
        read(d, "seed", g.seed, s);
    }

    trainer::TrainerConfig& tc = cfg.trainer;
    tc.theta_r = Eigen::Map<const VecX>(sc.theta_r.data(), static_cast<Eigen::Index>(sc.theta_r.size()));
    if (doc.contains("trainer")) {
        const json& t = doc["trainer"];
        const std::string s = "trainer";
        check_keys(t, {"learning_rate", "lambda_r", "batch_size", "window_min_s", "window_max_s", "max_iters",
                       "convergence_tol", "convergence_span", "optimizer", "power_iterations", "hidden",
                       "activation", "seed"},
                   s);
        read(t, "learning_rate", tc.learning_rate, s);
        read(t, "lambda_r", tc.lambda_r, s);
        read(t, "batch_size", tc.batch_size, s);
        read(t, "window_min_s", tc.window_min_s, s);
        read(t, "window_max_s", tc.window_max_s, s);
        read(t, "max_iters", tc.max_iters, s);
        read(t, "convergence_tol", tc.convergence_tol, s);
        read(t, "convergence_span", tc.convergence_span, s);
        read(t, "power_iterations", tc.power_iterations, s);
        read(t, "hidden", tc.hidden, s);
        read(t, "activation", tc.activation, s);
        read(t, "seed", tc.seed, s);
        const std::string opt = t.value("optimizer", std::string("adam"));
        if (opt == "adam") tc.optimizer = trainer::Optimizer::Adam;
        else if (opt == "sgd") tc.optimizer = trainer::Optimizer::Sgd;
        else throw ConfigError("trainer.optimizer must be adam or sgd");
    }

    sc.validate();
    cfg.datagen.validate();
    tc.validate();
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    const json doc = load_json_file(path, 0);
    Config cfg = parse_config(doc, path.parent_path());
    cfg.source = path;
    return cfg;
}

} // namespace terradapt::sim
