#include "terradapt/sim/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <memory>

#include "terradapt/basis/checkpoint.hpp"
#include "terradapt/common/log.hpp"
#include "terradapt/sim/datagen.hpp"
#include "terradapt/sim/metrics.hpp"
#include "terradapt/sim/runner.hpp"
#include "terradapt/trainer/dataset.hpp"
#include "terradapt/trainer/train.hpp"

#ifndef TERRADAPT_VERSION
#define TERRADAPT_VERSION "0.0.0"
#endif

namespace terradapt::sim {

namespace fs = std::filesystem;

namespace {

void write_json(const json& j, const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << j.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<double> vec(const VecX& v) { return {v.data(), v.data() + v.size()}; }

// Largest singular value over all weight matrices, by full SVD.
double max_spectral_norm(const basis::BasisNet& net) {
    double worst = 0.0;
    for (const auto& layer : net.layers()) {
        if (layer.W.size() == 0) continue;
        Eigen::JacobiSVD<MatX> svd(layer.W);
        worst = std::max(worst, svd.singularValues()(0));
    }
    return worst;
}

struct Loaded {
    std::shared_ptr<const basis::BasisNet> net;
    VecX theta0;
};

Loaded load_if_needed(const Config& cfg, const std::vector<std::string>& variants) {
    Loaded out;
    bool need = false;
    for (const auto& v : variants) need = need || variant_by_name(v).use_dnn;
    if (!need) return out;
    if (!fs::exists(cfg.checkpoint))
        throw ConfigError("checkpoint '" + cfg.checkpoint.string() + "' not found; run `train` first");
    basis::Checkpoint ck = basis::load_checkpoint(cfg.checkpoint);
    out.net = std::make_shared<const basis::BasisNet>(std::move(ck.net));
    out.theta0 = ck.theta0;
    return out;
}

std::vector<std::string> pick(const Config& cfg, const std::vector<std::string>& variants) {
    return variants.empty() ? cfg.scenario.variants : variants;
}

std::string run_name(int run) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", run);
    return buf;
}

struct Batch {
    std::vector<std::string> variants;
    std::vector<std::vector<RunResult>> results;  // [variant][run]
};

Batch run_batch(const Config& cfg, const std::vector<std::string>& variants, const fs::path& telemetry_dir) {
    const Loaded ld = load_if_needed(cfg, variants);
    const auto world = make_world(cfg.scenario);
    const ScenarioRunner runner(cfg.scenario, world, ld.net, ld.theta0);
    Batch b;
    b.variants = variants;
    const bool keep = !telemetry_dir.empty();
    for (const auto& name : variants) {
        const Variant v = variant_by_name(name);
        std::vector<RunResult> rs;
        for (int r = 0; r < cfg.scenario.runs; ++r) {
            RunResult res = runner.run(r, v, keep);
            if (keep) {
                const fs::path dir = telemetry_dir / name;
                fs::create_directories(dir);
                res.telemetry.write_csv(dir / (run_name(r) + ".csv"));
                json meta = {{"code_version", code_version()},
                             {"config_source", cfg.source.string()},
                             {"scenario", cfg.scenario.name},
                             {"variant", name},
                             {"run", r},
                             {"seed", cfg.scenario.seed},
                             {"run_seed", run_seed(cfg.scenario.seed, r)},
                             {"columns", res.telemetry.columns()},
                             {"config", cfg.raw}};
                write_json(meta, dir / (run_name(r) + ".metadata.json"));
                res.telemetry = Telemetry();
            }
            rs.push_back(std::move(res));
        }
        const VariantSummary s = summarize(name, rs);
        log().info("{}: median cumulative error {:.4f}, median position RMSE {:.4f} ({} failed)", name,
                   s.cumulative_error.median, s.position_rmse.median, s.failed);
        b.results.push_back(std::move(rs));
    }
    return b;
}

json batch_json(const Config& cfg, const Batch& b, bool with_improvement) {
    json j;
    j["scenario"] = cfg.scenario.name;
    j["seed"] = cfg.scenario.seed;
    j["runs"] = cfg.scenario.runs;
    j["variants"] = json::array();
    std::vector<VariantSummary> sums;
    for (std::size_t i = 0; i < b.variants.size(); ++i) {
        sums.push_back(summarize(b.variants[i], b.results[i]));
        json vj = summary_json(sums.back());
        vj["runs"] = json::array();
        for (const auto& r : b.results[i]) vj["runs"].push_back(run_json(r));
        j["variants"].push_back(std::move(vj));
    }
    if (with_improvement && sums.size() >= 2) {
        json imp = json::array();
        const VariantSummary& base = sums.front();
        for (std::size_t i = 1; i < sums.size(); ++i) {
            int wins = 0, paired = 0;
            for (std::size_t r = 0; r < b.results[i].size(); ++r) {
                const RunResult &x = b.results[0][r], &y = b.results[i][r];
                if (!x.ok || !y.ok) continue;
                ++paired;
                wins += y.cumulative_error < x.cumulative_error;
            }
            imp.push_back({{"baseline", base.variant},
                           {"variant", sums[i].variant},
                           {"median_cumulative_error_pct",
                            improvement_percent(base.cumulative_error.median, sums[i].cumulative_error.median)},
                           {"mean_position_rmse_pct",
                            improvement_percent(base.position_rmse.mean, sums[i].position_rmse.mean)},
                           {"median_position_rmse_pct",
                            improvement_percent(base.position_rmse.median, sums[i].position_rmse.median)},
                           {"paired_wins", wins},
                           {"paired_runs", paired}});
        }
        j["improvement"] = std::move(imp);
    }
    return j;
}

} // namespace

std::string code_version() { return TERRADAPT_VERSION; }

json cmd_gen_data(const Config& cfg) {
    const auto world = make_world(cfg.scenario);
    fs::create_directories(cfg.output_dir);
    terrain::write_world_grid(*world, cfg.output_dir / "world.txt", true);
    const trainer::TrajectoryDataset ds = generate_dataset(cfg.scenario, cfg.datagen, world);
    fs::create_directories(cfg.dataset.parent_path());
    trainer::write_dataset(ds, cfg.dataset);
    // Per-class residual magnitude, a quick check that terrain shows up in y.
    json j = {{"command", "gen-data"},
              {"dataset", cfg.dataset.string()},
              {"world", (cfg.output_dir / "world.txt").string()},
              {"trajectories", ds.trajectories.size()},
              {"samples", ds.total_samples()},
              {"state_dim", ds.state_dim},
              {"feature_dim", ds.feature_dim}};
    double y2 = 0.0;
    for (const auto& t : ds.trajectories) y2 += t.y.squaredNorm();
    j["residual_rms"] = std::sqrt(y2 / static_cast<double>(ds.total_samples() * ds.residual_dim));
    write_json(j, cfg.output_dir / "gen_data_metrics.json");
    return j;
}

json cmd_train(const Config& cfg) {
    const trainer::TrajectoryDataset ds = trainer::read_dataset(cfg.dataset);
    trainer::TrainerConfig tc = cfg.trainer;
    log().info("trainer: lr {} lambda_r {} K {} window [{}, {}] s, max_iters {}, hidden {}x{}", tc.learning_rate,
               tc.lambda_r, tc.batch_size, tc.window_min_s, tc.window_max_s, tc.max_iters, tc.hidden.size(),
               tc.hidden.empty() ? 0 : tc.hidden.front());
    double worst_norm = 0.0;
    const trainer::TrainResult res =
        trainer::train(ds, tc, nullptr, [&](int, const basis::BasisNet& net) {
            worst_norm = std::max(worst_norm, max_spectral_norm(net));
        });
    basis::save_checkpoint({res.net, res.theta0}, cfg.checkpoint);

    fs::create_directories(cfg.output_dir);
    {
        std::ofstream out(cfg.output_dir / "loss_history.csv");
        if (!out) throw IoError("cannot write loss history");
        out << "iteration,minibatch_loss,mean_loss,wall_seconds\n";
        char buf[160];
        for (const auto& r : res.history) {
            std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.6f\n", r.iter, r.loss, r.mean_loss, r.wall_seconds);
            out << buf;
        }
    }
    // Deterministic summary: no timing here.
    const trainer::RidgeSolution all = trainer::fit_theta_all(res.net, ds, tc.lambda_r, tc.theta_r);
    json j = {{"command", "train"},
              {"checkpoint", cfg.checkpoint.string()},
              {"iterations", res.history.size()},
              {"converged", res.converged},
              {"final_mean_loss", res.history.empty() ? 0.0 : res.history.back().mean_loss},
              {"max_spectral_norm", worst_norm},
              {"theta0", vec(res.theta0)},
              {"full_data_cost_per_sample", all.cost / static_cast<double>(ds.total_samples() * ds.residual_dim)},
              {"parameters", res.net.num_parameters()}};
    write_json(j, cfg.output_dir / "train_metrics.json");
    return j;
}

json cmd_simulate(const Config& cfg, const std::vector<std::string>& variants) {
    const fs::path dir = cfg.output_dir / "simulate";
    const Batch b = run_batch(cfg, pick(cfg, variants), dir);
    json j = batch_json(cfg, b, false);
    write_json(j, dir / "metrics.json");
    json out = {{"command", "simulate"}, {"metrics", (dir / "metrics.json").string()}, {"variants", json::array()}};
    for (const auto& v : j["variants"])
        out["variants"].push_back({{"variant", v["variant"]},
                                   {"median_cumulative_error", v["cumulative_error"]["median"]},
                                   {"mean_position_rmse", v["position_rmse"]["mean"]},
                                   {"failed_runs", v["failed_runs"]}});
    return out;
}

json cmd_evaluate(const Config& cfg, const std::vector<std::string>& variants, bool telemetry) {
    const std::vector<std::string> vs = pick(cfg, variants);
    if (vs.size() < 2) throw ConfigError("evaluate needs at least two variants");
    const fs::path dir = cfg.output_dir / "evaluate";
    const Batch b = run_batch(cfg, vs, telemetry ? dir / "telemetry" : fs::path());
    json j = batch_json(cfg, b, true);
    write_json(j, dir / "metrics.json");
    {
        std::ofstream out(dir / "runs.csv");
        if (!out) throw IoError("cannot write runs.csv");
        out << "variant,run,ok,cumulative_error,position_rmse,velocity_rmse_v,velocity_rmse_omega\n";
        char buf[256];
        for (std::size_t i = 0; i < b.variants.size(); ++i)
            for (const auto& r : b.results[i]) {
                std::snprintf(buf, sizeof buf, "%s,%d,%d,%.17g,%.17g,%.17g,%.17g\n", b.variants[i].c_str(), r.run,
                              r.ok ? 1 : 0, r.cumulative_error, r.position_rmse, r.velocity_rmse_v,
                              r.velocity_rmse_omega);
                out << buf;
            }
    }
    json out = {{"command", "evaluate"}, {"metrics", (dir / "metrics.json").string()}, {"improvement", j["improvement"]}};
    out["variants"] = json::array();
    for (const auto& v : j["variants"])
        out["variants"].push_back({{"variant", v["variant"]},
                                   {"median_cumulative_error", v["cumulative_error"]["median"]},
                                   {"mean_position_rmse", v["position_rmse"]["mean"]},
                                   {"failed_runs", v["failed_runs"]}});
    return out;
}

} // namespace terradapt::sim
