#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "terradapt/common/math.hpp"

namespace terradapt::terrain {

// One terrain type. eta_tracked scales the tracked vehicle's nominal control
// matrix (diagonal), eta_lateral scales the car's tire force production.
struct TerrainClass {
    std::string name;
    std::optional<Vec2> eta_tracked;
    std::optional<double> eta_lateral;
    // Reuse the base feature vector of another class (visually identical twin).
    std::string twin_of;
    // Norm of a deterministic offset added to the base feature vector.
    double appearance_shift = 0.0;
};

// Synthetic world description. A tile of tile_rows x tile_cols cells carries a
// class layout and a per-cell feature image; the tile is repeated over the map.
struct WorldSpec {
    int rows = 60;
    int cols = 120;
    int tile_rows = 30;
    int tile_cols = 40;
    double cell_size = 0.5;  // m
    int feature_dim = 8;
    double class_separation = 1.0;
    double intra_class_std = 0.05;
    int sites_per_tile = 12;
    // "voronoi": random sites assigned round-robin to classes; "stripes":
    // equal-width vertical bands across the tile, one per class.
    std::string layout = "voronoi";
    std::uint64_t feature_seed = 1;
    std::uint64_t layout_seed = 2;
    std::uint64_t noise_seed = 3;
    std::vector<TerrainClass> classes;
    // Optional explicit layout (tile_rows * tile_cols class ids, row-major).
    std::vector<int> tile_layout;

    void validate() const;
};

struct CellIndex {
    int row = 0;
    int col = 0;
    bool clamped = false;
};

// Immutable grid of (class id, feature vector) cells. Cell (r, c) covers
// x in [c, c+1) * cell_size and y in [r, r+1) * cell_size.
class TerrainWorld {
public:
    TerrainWorld(int rows, int cols, double cell_size, std::vector<TerrainClass> classes,
                 std::vector<int> cell_class, std::vector<int> cell_feature, MatX feature_table,
                 MatX class_base);

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] double cell_size() const { return cell_size_; }
    [[nodiscard]] double width() const { return cols_ * cell_size_; }
    [[nodiscard]] double height() const { return rows_ * cell_size_; }
    [[nodiscard]] int feature_dim() const { return static_cast<int>(features_.rows()); }
    [[nodiscard]] int num_classes() const { return static_cast<int>(classes_.size()); }

    [[nodiscard]] const TerrainClass& terrain_class(int id) const;
    [[nodiscard]] const std::vector<TerrainClass>& classes() const { return classes_; }
    [[nodiscard]] int class_at(int row, int col) const;
    [[nodiscard]] Eigen::Ref<const VecX> feature_at(int row, int col) const;
    // Base (noise-free) feature vector of a class.
    [[nodiscard]] VecX class_base(int id) const { return class_base_.col(id); }

    // Cell under a world position; positions outside the map clamp to the border.
    [[nodiscard]] CellIndex locate(double p_x, double p_y) const;

    [[nodiscard]] Vec2 eta_tracked_at(double p_x, double p_y) const;
    [[nodiscard]] double eta_lateral_at(double p_x, double p_y) const;

    [[nodiscard]] const MatX& feature_table() const { return features_; }
    [[nodiscard]] const std::vector<int>& cell_classes() const { return cell_class_; }
    [[nodiscard]] const std::vector<int>& cell_features() const { return cell_feature_; }

private:
    [[nodiscard]] std::size_t index(int row, int col) const;

    int rows_;
    int cols_;
    double cell_size_;
    std::vector<TerrainClass> classes_;
    std::vector<int> cell_class_;
    std::vector<int> cell_feature_;
    MatX features_;    // feature_dim x unique cells
    MatX class_base_;  // feature_dim x classes
};

TerrainWorld build_world(const WorldSpec& spec);

// Text grid: header, class/eta table, class-id rows, and (optionally) one
// feature row per cell. The format is documented in docs/formats.md.
void write_world_grid(const TerrainWorld& world, const std::filesystem::path& path,
                      bool include_features);
TerrainWorld read_world_grid(const std::filesystem::path& path);

} // namespace terradapt::terrain
