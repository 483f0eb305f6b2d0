#pragma once

#include <string>
#include <vector>

#include "terradapt/sim/config.hpp"

namespace terradapt::sim {

// Each command writes its artifacts under cfg.output_dir and returns a short
// JSON summary (printed by the CLI). Outputs are deterministic for a fixed
// config; only loss_history.csv carries wall-clock time.

// world.txt (class/eta grid with features) and the dataset CSV.
json cmd_gen_data(const Config& cfg);

// Checkpoint, loss_history.csv and train_metrics.json.
json cmd_train(const Config& cfg);

// Runs every configured variant over all runs, one telemetry CSV per run plus
// a metadata.json sidecar, and simulate/metrics.json.
json cmd_simulate(const Config& cfg, const std::vector<std::string>& variants = {});

// Paired comparison of >= 2 variants: evaluate/metrics.json with per-variant
// statistics and improvements against the first variant, evaluate/runs.csv.
json cmd_evaluate(const Config& cfg, const std::vector<std::string>& variants = {}, bool telemetry = false);

// Version string written into metadata sidecars.
std::string code_version();

} // namespace terradapt::sim
