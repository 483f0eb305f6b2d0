#pragma once

#include <cstdint>
#include <memory>

#include "terradapt/basis/basis_function.hpp"
#include "terradapt/sim/config.hpp"
#include "terradapt/sim/telemetry.hpp"
#include "terradapt/terrain/world.hpp"

namespace terradapt::sim {

struct RunResult {
    int run = 0;
    std::string variant;
    bool ok = true;
    std::string failure;
    double position_rmse = 0.0;        // sqrt(mean ||p - p_d||^2) over controller ticks
    double velocity_rmse_v = 0.0;      // sqrt(mean s_0^2)
    double velocity_rmse_omega = 0.0;  // sqrt(mean s_1^2)
    double cumulative_error = 0.0;     // sum of ||s|| dt or ||p - p_d|| dt over ticks
    int ticks = 0;
    int fallback_steps = 0;
    int clamped_steps = 0;
    int rejected_adapt_steps = 0;
    int gain_clamped_steps = 0;
    std::size_t feature_clamps = 0;
    VecX final_theta;
    Telemetry telemetry;
};

// Per-run seed shared by every variant, so paired runs see the same start
// pose, reference, feature noise and measurement noise.
std::uint64_t run_seed(std::uint64_t seed, int run_index);

std::shared_ptr<const terrain::TerrainWorld> make_world(const ScenarioConfig& cfg);

class ScenarioRunner {
public:
    // net/theta0 are required only for DNN variants.
    ScenarioRunner(ScenarioConfig cfg, std::shared_ptr<const terrain::TerrainWorld> world,
                   std::shared_ptr<const basis::BasisNet> net = nullptr, VecX theta0 = VecX());

    [[nodiscard]] RunResult run(int run_index, const Variant& variant, bool keep_telemetry = true) const;
    [[nodiscard]] const ScenarioConfig& config() const { return cfg_; }
    [[nodiscard]] const terrain::TerrainWorld& world() const { return *world_; }

private:
    [[nodiscard]] RunResult run_tracked(int run_index, const Variant& variant, bool keep) const;
    [[nodiscard]] RunResult run_ackermann(int run_index, const Variant& variant, bool keep) const;
    [[nodiscard]] std::unique_ptr<basis::BasisFunction> make_basis(const Variant& v) const;
    [[nodiscard]] VecX initial_theta(const Variant& v, int n_theta) const;

    ScenarioConfig cfg_;
    std::shared_ptr<const terrain::TerrainWorld> world_;
    std::shared_ptr<const basis::BasisNet> net_;
    VecX theta0_;
};

} // namespace terradapt::sim
