#include "terradapt/terrain/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "terradapt/common/log.hpp"

namespace terradapt::terrain {

void WorldSpec::validate() const {
    if (rows <= 0 || cols <= 0) throw ConfigError("world dims must be positive");
    if (tile_rows <= 0 || tile_cols <= 0) throw ConfigError("tile dims must be positive");
    if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive");
    if (feature_dim <= 0) throw ConfigError("feature_dim must be positive");
    if (classes.empty()) throw ConfigError("world needs at least one terrain class");
    if (intra_class_std < 0.0) throw ConfigError("intra_class_std must be non-negative");
    if (classes.size() > 1 && class_separation < 5.0 * intra_class_std)
        throw ConfigError("class_separation must be at least 5x intra_class_std");
    if (sites_per_tile < 1) throw ConfigError("sites_per_tile must be at least 1");
    if (layout != "voronoi" && layout != "stripes") throw ConfigError("world layout must be voronoi or stripes");
    for (std::size_t k = 0; k < classes.size(); ++k) {
        const TerrainClass& c = classes[k];
        if (!c.eta_tracked && !c.eta_lateral)
            throw ConfigError("terrain class '" + c.name + "' has no eta entry");
        if (c.eta_tracked && ((c.eta_tracked->array() <= 0.0).any() || (c.eta_tracked->array() > 2.0).any()))
            throw ConfigError("terrain class '" + c.name + "': eta_tracked entries must lie in (0, 2]");
        if (c.eta_lateral && (!(*c.eta_lateral > 0.0) || *c.eta_lateral > 2.0))
            throw ConfigError("terrain class '" + c.name + "': eta_lateral must lie in (0, 2]");
        if (!c.twin_of.empty()) {
            auto it = std::find_if(classes.begin(), classes.begin() + static_cast<long>(k),
                                   [&](const TerrainClass& o) { return o.name == c.twin_of; });
            if (it == classes.begin() + static_cast<long>(k))
                throw ConfigError("terrain class '" + c.name + "': twin_of must name an earlier class");
        }
    }
    if (!tile_layout.empty()) {
        if (tile_layout.size() != static_cast<std::size_t>(tile_rows) * tile_cols)
            throw ConfigError("tile_layout must have tile_rows * tile_cols entries");
        for (int id : tile_layout)
            if (id < 0 || id >= static_cast<int>(classes.size()))
                throw ConfigError("tile_layout references class id " + std::to_string(id)
                                  + " which has no eta entry");
    }
}

TerrainWorld::TerrainWorld(int rows, int cols, double cell_size, std::vector<TerrainClass> classes,
                           std::vector<int> cell_class, std::vector<int> cell_feature,
                           MatX feature_table, MatX class_base)
    : rows_(rows), cols_(cols), cell_size_(cell_size), classes_(std::move(classes)),
      cell_class_(std::move(cell_class)), cell_feature_(std::move(cell_feature)),
      features_(std::move(feature_table)), class_base_(std::move(class_base)) {
    const auto n = static_cast<std::size_t>(rows_) * cols_;
    if (cell_class_.size() != n || cell_feature_.size() != n)
        throw DimensionError("world grid size mismatch");
    for (int id : cell_class_)
        if (id < 0 || id >= static_cast<int>(classes_.size()))
            throw ConfigError("world cell references unknown class id " + std::to_string(id));
    for (int f : cell_feature_)
        if (f < 0 || f >= features_.cols()) throw DimensionError("world cell feature index out of range");
    if (class_base_.rows() != features_.rows() || class_base_.cols() != static_cast<long>(classes_.size()))
        throw DimensionError("class base feature table has the wrong shape");
}

std::size_t TerrainWorld::index(int row, int col) const {
    return static_cast<std::size_t>(row) * cols_ + col;
}

const TerrainClass& TerrainWorld::terrain_class(int id) const {
    if (id < 0 || id >= num_classes()) throw DimensionError("terrain class id out of range");
    return classes_[static_cast<std::size_t>(id)];
}

int TerrainWorld::class_at(int row, int col) const {
    return cell_class_[index(std::clamp(row, 0, rows_ - 1), std::clamp(col, 0, cols_ - 1))];
}

Eigen::Ref<const VecX> TerrainWorld::feature_at(int row, int col) const {
    const int f = cell_feature_[index(std::clamp(row, 0, rows_ - 1), std::clamp(col, 0, cols_ - 1))];
    return features_.col(f);
}

CellIndex TerrainWorld::locate(double p_x, double p_y) const {
    const double fc = std::floor(p_x / cell_size_);
    const double fr = std::floor(p_y / cell_size_);
    CellIndex idx;
    idx.clamped = !(fc >= 0.0 && fc < cols_ && fr >= 0.0 && fr < rows_);
    idx.col = static_cast<int>(std::clamp(fc, 0.0, static_cast<double>(cols_ - 1)));
    idx.row = static_cast<int>(std::clamp(fr, 0.0, static_cast<double>(rows_ - 1)));
    return idx;
}

Vec2 TerrainWorld::eta_tracked_at(double p_x, double p_y) const {
    const CellIndex c = locate(p_x, p_y);
    const TerrainClass& tc = terrain_class(class_at(c.row, c.col));
    if (!tc.eta_tracked) throw ConfigError("terrain class '" + tc.name + "' has no tracked eta");
    return *tc.eta_tracked;
}

double TerrainWorld::eta_lateral_at(double p_x, double p_y) const {
    const CellIndex c = locate(p_x, p_y);
    const TerrainClass& tc = terrain_class(class_at(c.row, c.col));
    if (!tc.eta_lateral) throw ConfigError("terrain class '" + tc.name + "' has no lateral eta");
    return *tc.eta_lateral;
}

namespace {

MatX draw_class_bases(const WorldSpec& spec) {
    const int k = static_cast<int>(spec.classes.size());
    const int dim = spec.feature_dim;
    MatX bases = MatX::Zero(dim, k);
    std::mt19937_64 rng(spec.feature_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Spread so typical pairwise distances sit around 1.5x the separation.
    const double spread = 1.5 * std::max(spec.class_separation, 1e-12) / std::sqrt(2.0 * dim);

    std::vector<int> drawn;
    for (int c = 0; c < k; ++c) {
        const TerrainClass& tc = spec.classes[static_cast<std::size_t>(c)];
        if (!tc.twin_of.empty()) continue;
        bool accepted = false;
        for (int attempt = 0; attempt < 100000 && !accepted; ++attempt) {
            VecX v(dim);
            for (int i = 0; i < dim; ++i) v(i) = spread * normal(rng);
            accepted = std::all_of(drawn.begin(), drawn.end(), [&](int o) {
                return (bases.col(o) - v).norm() >= spec.class_separation;
            });
            if (accepted) bases.col(c) = v;
        }
        if (!accepted) throw ConfigError("could not place class features with the requested separation");
        drawn.push_back(c);
    }
    for (int c = 0; c < k; ++c) {
        const TerrainClass& tc = spec.classes[static_cast<std::size_t>(c)];
        if (!tc.twin_of.empty()) {
            for (int o = 0; o < c; ++o)
                if (spec.classes[static_cast<std::size_t>(o)].name == tc.twin_of) bases.col(c) = bases.col(o);
        }
        if (tc.appearance_shift != 0.0) {
            std::mt19937_64 shift_rng(spec.feature_seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(c + 1)));
            VecX dir(dim);
            for (int i = 0; i < dim; ++i) dir(i) = normal(shift_rng);
            bases.col(c) += tc.appearance_shift * dir.normalized();
        }
    }
    return bases;
}

std::vector<int> voronoi_layout(const WorldSpec& spec) {
    const int k = static_cast<int>(spec.classes.size());
    std::mt19937_64 rng(spec.layout_seed);
    std::uniform_real_distribution<double> ur(0.0, spec.tile_rows);
    std::uniform_real_distribution<double> uc(0.0, spec.tile_cols);
    struct Site { double r, c; int cls; };
    std::vector<Site> sites;
    for (int j = 0; j < spec.sites_per_tile; ++j) sites.push_back({ur(rng), uc(rng), j % k});

    std::vector<int> layout(static_cast<std::size_t>(spec.tile_rows) * spec.tile_cols);
    for (int r = 0; r < spec.tile_rows; ++r) {
        for (int c = 0; c < spec.tile_cols; ++c) {
            double best = std::numeric_limits<double>::infinity();
            int cls = 0;
            for (const Site& s : sites) {
                const double d = std::hypot(r + 0.5 - s.r, c + 0.5 - s.c);
                if (d < best) { best = d; cls = s.cls; }
            }
            layout[static_cast<std::size_t>(r) * spec.tile_cols + c] = cls;
        }
    }
    return layout;
}

std::vector<int> stripe_layout(const WorldSpec& spec) {
    const int k = static_cast<int>(spec.classes.size());
    std::vector<int> layout(static_cast<std::size_t>(spec.tile_rows) * spec.tile_cols);
    for (int r = 0; r < spec.tile_rows; ++r)
        for (int c = 0; c < spec.tile_cols; ++c)
            layout[static_cast<std::size_t>(r) * spec.tile_cols + c] = std::min(k - 1, c * k / spec.tile_cols);
    return layout;
}

} // namespace

TerrainWorld build_world(const WorldSpec& spec) {
    spec.validate();
    const MatX bases = draw_class_bases(spec);
    const std::vector<int> tile = !spec.tile_layout.empty() ? spec.tile_layout
                                  : spec.layout == "stripes" ? stripe_layout(spec)
                                                             : voronoi_layout(spec);

    // Feature image for one tile: class base plus fixed per-cell noise.
    const int tile_cells = spec.tile_rows * spec.tile_cols;
    MatX table(spec.feature_dim, tile_cells);
    std::mt19937_64 rng(spec.noise_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int j = 0; j < tile_cells; ++j) {
        table.col(j) = bases.col(tile[static_cast<std::size_t>(j)]);
        if (spec.intra_class_std > 0.0)
            for (int i = 0; i < spec.feature_dim; ++i) table(i, j) += spec.intra_class_std * normal(rng);
    }

    const auto n = static_cast<std::size_t>(spec.rows) * spec.cols;
    std::vector<int> cell_class(n);
    std::vector<int> cell_feature(n);
    for (int r = 0; r < spec.rows; ++r) {
        for (int c = 0; c < spec.cols; ++c) {
            const int t = (r % spec.tile_rows) * spec.tile_cols + (c % spec.tile_cols);
            const std::size_t i = static_cast<std::size_t>(r) * spec.cols + c;
            cell_class[i] = tile[static_cast<std::size_t>(t)];
            cell_feature[i] = t;
        }
    }
    return TerrainWorld(spec.rows, spec.cols, spec.cell_size, spec.classes, std::move(cell_class),
                        std::move(cell_feature), std::move(table), bases);
}

void write_world_grid(const TerrainWorld& world, const std::filesystem::path& path,
                      bool include_features) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << std::setprecision(17);
    out << "terradapt-world 1\n";
    out << "dims " << world.rows() << ' ' << world.cols() << ' ' << world.cell_size() << ' '
        << world.feature_dim() << '\n';
    out << "classes " << world.num_classes() << '\n';
    for (int k = 0; k < world.num_classes(); ++k) {
        const TerrainClass& c = world.terrain_class(k);
        out << k << ' ' << c.name << ' ';
        if (c.eta_tracked) out << c.eta_tracked->x() << ' ' << c.eta_tracked->y() << ' ';
        else out << "- - ";
        if (c.eta_lateral) out << *c.eta_lateral;
        else out << '-';
        for (int i = 0; i < world.feature_dim(); ++i) out << ' ' << world.class_base(k)(i);
        out << '\n';
    }
    out << "grid\n";
    for (int r = 0; r < world.rows(); ++r) {
        for (int c = 0; c < world.cols(); ++c) out << (c ? " " : "") << world.class_at(r, c);
        out << '\n';
    }
    if (include_features) {
        out << "features\n";
        for (int r = 0; r < world.rows(); ++r) {
            for (int c = 0; c < world.cols(); ++c) {
                const auto f = world.feature_at(r, c);
                for (int i = 0; i < world.feature_dim(); ++i) out << (i ? " " : "") << f(i);
                out << '\n';
            }
        }
    }
    if (!out) throw IoError("failed writing " + path.string());
}

TerrainWorld read_world_grid(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::string tag;
    int version = 0;
    if (!(in >> tag >> version) || tag != "terradapt-world" || version != 1)
        throw IoError(path.string() + ": not a terradapt-world v1 file");
    int rows = 0, cols = 0, dim = 0, nclasses = 0;
    double cell = 0.0;
    if (!(in >> tag >> rows >> cols >> cell >> dim) || tag != "dims" || rows <= 0 || cols <= 0 || dim <= 0)
        throw IoError(path.string() + ": bad dims line");
    if (!(in >> tag >> nclasses) || tag != "classes" || nclasses <= 0)
        throw IoError(path.string() + ": bad classes line");

    auto read_opt = [&](std::optional<double>& v) {
        std::string s;
        in >> s;
        if (s != "-") v = std::stod(s);
    };
    std::vector<TerrainClass> classes(static_cast<std::size_t>(nclasses));
    MatX bases(dim, nclasses);
    for (int k = 0; k < nclasses; ++k) {
        int id = -1;
        TerrainClass& c = classes[static_cast<std::size_t>(k)];
        in >> id >> c.name;
        std::optional<double> ex, ew, el;
        read_opt(ex);
        read_opt(ew);
        read_opt(el);
        if (ex && ew) c.eta_tracked = Vec2(*ex, *ew);
        c.eta_lateral = el;
        for (int i = 0; i < dim; ++i) in >> bases(i, k);
        if (!in || id != k) throw IoError(path.string() + ": bad class row " + std::to_string(k));
        if (!c.eta_tracked && !c.eta_lateral)
            throw ConfigError("terrain class '" + c.name + "' has no eta entry");
    }
    if (!(in >> tag) || tag != "grid") throw IoError(path.string() + ": missing grid section");
    const auto n = static_cast<std::size_t>(rows) * cols;
    std::vector<int> cell_class(n);
    for (auto& id : cell_class)
        if (!(in >> id)) throw IoError(path.string() + ": truncated grid");

    std::vector<int> cell_feature(n);
    MatX table;
    if (in >> tag && tag == "features") {
        table.resize(dim, static_cast<long>(n));
        for (std::size_t j = 0; j < n; ++j) {
            for (int i = 0; i < dim; ++i)
                if (!(in >> table(i, static_cast<long>(j)))) throw IoError(path.string() + ": truncated features");
            cell_feature[j] = static_cast<int>(j);
        }
    } else {
        // Layout-only file: cells carry their class base features.
        table = bases;
        for (std::size_t j = 0; j < n; ++j) cell_feature[j] = cell_class[j];
    }
    return TerrainWorld(rows, cols, cell, std::move(classes), std::move(cell_class),
                        std::move(cell_feature), std::move(table), bases);
}

} // namespace terradapt::terrain
