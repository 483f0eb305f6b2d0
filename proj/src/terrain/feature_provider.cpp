#include "terradapt/terrain/feature_provider.hpp"

#include <cmath>

#include "terradapt/common/log.hpp"

namespace terradapt::terrain {

void FeatureProviderConfig::validate() const {
    if (noise_std < 0.0) throw ConfigError("feature noise_std must be non-negative");
    if (!std::isfinite(brightness)) throw ConfigError("feature brightness must be finite");
    if (patch_offset < 0.0) throw ConfigError("patch_offset must be non-negative");
}

VecX patch_mean_features(const TerrainWorld& world, double p_x, double p_y, double psi,
                         double patch_offset, bool* clamped) {
    // Body +y axis in the world frame.
    const double lx = -std::sin(psi) * patch_offset;
    const double ly = std::cos(psi) * patch_offset;
    const CellIndex left = world.locate(p_x + lx, p_y + ly);
    const CellIndex right = world.locate(p_x - lx, p_y - ly);
    if (clamped) *clamped = left.clamped || right.clamped;
    return 0.5 * (world.feature_at(left.row, left.col) + world.feature_at(right.row, right.col));
}

FeatureProvider::FeatureProvider(std::shared_ptr<const TerrainWorld> world, FeatureProviderConfig config)
    : world_(std::move(world)), config_(config), rng_(config.seed) {
    if (!world_) throw ConfigError("feature provider needs a world");
    config_.validate();
}

VecX FeatureProvider::features_under_robot(double p_x, double p_y, double psi) {
    bool clamped = false;
    VecX e = patch_mean_features(*world_, p_x, p_y, psi, config_.patch_offset, &clamped);
    if (clamped) {
        if (clamp_count_ == 0)
            log().debug("feature query at ({:.2f}, {:.2f}) outside the map; clamping to border", p_x, p_y);
        ++clamp_count_;
    }
    e *= config_.brightness;
    if (config_.noise_std > 0.0)
        for (Eigen::Index i = 0; i < e.size(); ++i) e(i) += config_.noise_std * noise_(rng_);
    return e;
}

Vec2 FeatureProvider::eta_tracked(double p_x, double p_y) const { return world_->eta_tracked_at(p_x, p_y); }

double FeatureProvider::eta_lateral(double p_x, double p_y) const { return world_->eta_lateral_at(p_x, p_y); }

} // namespace terradapt::terrain
