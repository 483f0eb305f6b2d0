#pragma once

#include <cstdint>
#include <memory>
#include <random>

#include "terradapt/terrain/world.hpp"

namespace terradapt::terrain {

enum class FeatureMode { SyntheticTiles, RecordedLookup };

struct FeatureProviderConfig {
    FeatureMode mode = FeatureMode::SyntheticTiles;
    double noise_std = 0.0;     // additive, per component
    double brightness = 1.0;    // multiplicative attenuation (night < 1)
    double patch_offset = 0.3;  // m, lateral offset of the left/right track patches
    std::uint64_t seed = 0;

    void validate() const;
};

// Mean of the cell features under the left and right patches, located at
// +/- patch_offset along the body y axis. No noise.
VecX patch_mean_features(const TerrainWorld& world, double p_x, double p_y, double psi,
                         double patch_offset, bool* clamped = nullptr);

// Stand-in for the vision pipeline: samples terrain features under the robot
// and applies brightness and noise. Deterministic for a given seed and query
// sequence. One instance per simulated vehicle.
class FeatureProvider {
public:
    FeatureProvider(std::shared_ptr<const TerrainWorld> world, FeatureProviderConfig config);

    VecX features_under_robot(double p_x, double p_y, double psi);

    [[nodiscard]] Vec2 eta_tracked(double p_x, double p_y) const;
    [[nodiscard]] double eta_lateral(double p_x, double p_y) const;

    [[nodiscard]] const TerrainWorld& world() const { return *world_; }
    [[nodiscard]] const FeatureProviderConfig& config() const { return config_; }
    // Number of queries whose patches fell outside the map and were clamped.
    [[nodiscard]] std::size_t clamp_count() const { return clamp_count_; }

private:
    std::shared_ptr<const TerrainWorld> world_;
    FeatureProviderConfig config_;
    std::mt19937_64 rng_;
    std::normal_distribution<double> noise_{0.0, 1.0};
    std::size_t clamp_count_ = 0;
};

} // namespace terradapt::terrain
