#include <doctest.h>

#include <numbers>

#include "helpers.hpp"
#include "terradapt/terrain/feature_provider.hpp"

using namespace terradapt;
using namespace terradapt::terrain;

namespace {

WorldSpec three_class_spec() {
    WorldSpec s;
    s.classes = {{"grass", Vec2(1.0, 1.0), 1.0, "", 0.0},
                 {"sand", Vec2(0.7, 0.8), 0.7, "", 0.0},
                 {"ice", Vec2(0.5, 0.5), 0.4, "", 0.0}};
    return s;
}

// 1 x 2 world with unit cells: class 0 on x in [0, 1), class 1 on [1, 2).
TerrainWorld two_cell_world() {
    MatX base(2, 2);
    base << 1.0, -1.0,
            2.0, 4.0;
    std::vector<TerrainClass> classes = {{"a", Vec2(1.0, 1.0), 1.0, "", 0.0}, {"b", Vec2(0.5, 0.6), 0.5, "", 0.0}};
    return TerrainWorld(1, 2, 1.0, classes, {0, 1}, {0, 1}, base, base);
}

} // namespace

TEST_CASE("tile repeats 4 x 6 times over a 120 x 240 map") {
    WorldSpec s = three_class_spec();
    s.rows = 120;
    s.cols = 240;
    const TerrainWorld w = build_world(s);
    for (int r = 0; r < w.rows(); r += 7)
        for (int c = 0; c < w.cols(); c += 5) {
            REQUIRE(w.class_at(r, c) == w.class_at(r % 30, c % 40));
            REQUIRE(w.feature_at(r, c) == w.feature_at(r % 30, c % 40));
        }
    std::vector<int> seen(3, 0);
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 40; ++c) seen[static_cast<std::size_t>(w.class_at(r, c))]++;
    for (int n : seen) CHECK(n > 0);
}

TEST_CASE("one class without noise gives identical features everywhere") {
    WorldSpec s;
    s.classes = {{"only", Vec2(1.0, 1.0), 1.0, "", 0.0}};
    s.intra_class_std = 0.0;
    const TerrainWorld w = build_world(s);
    const VecX f0 = w.feature_at(0, 0);
    for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) REQUIRE(w.feature_at(r, c) == f0);
}

TEST_CASE("rebuilding with the same seeds is bit-identical") {
    const TerrainWorld a = build_world(three_class_spec());
    const TerrainWorld b = build_world(three_class_spec());
    CHECK(a.cell_classes() == b.cell_classes());
    CHECK(a.cell_features() == b.cell_features());
    CHECK(a.feature_table() == b.feature_table());
    WorldSpec other = three_class_spec();
    other.feature_seed = 99;
    CHECK_FALSE(build_world(other).feature_table() == a.feature_table());
}

TEST_CASE("class means are linearly separable with margin of at least 2 intra-class std") {
    const WorldSpec s = three_class_spec();
    const TerrainWorld w = build_world(s);
    const int k = w.num_classes();
    std::vector<VecX> mean(static_cast<std::size_t>(k), VecX::Zero(w.feature_dim()));
    std::vector<int> count(static_cast<std::size_t>(k), 0);
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 40; ++c) {
            const auto id = static_cast<std::size_t>(w.class_at(r, c));
            mean[id] += w.feature_at(r, c);
            count[id]++;
        }
    for (int i = 0; i < k; ++i) mean[static_cast<std::size_t>(i)] /= count[static_cast<std::size_t>(i)];
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) {
            const VecX& mi = mean[static_cast<std::size_t>(i)];
            const VecX& mj = mean[static_cast<std::size_t>(j)];
            const VecX n = (mi - mj).normalized();
            const double mid = n.dot(0.5 * (mi + mj));
            double margin = 1e300;
            for (int r = 0; r < 30; ++r)
                for (int c = 0; c < 40; ++c) {
                    const int id = w.class_at(r, c);
                    if (id != i && id != j) continue;
                    const double side = (n.dot(w.feature_at(r, c)) - mid) * (id == i ? 1.0 : -1.0);
                    margin = std::min(margin, side);
                }
            INFO("classes " << i << "," << j << " margin " << margin);
            CHECK(margin >= 2.0 * s.intra_class_std);
        }
}

TEST_CASE("patch features: uniform cell, class boundary, brightness") {
    const auto world = std::make_shared<const TerrainWorld>(two_cell_world());
    // Heading +y puts the track patches at x -/+ 0.3.
    bool clamped = true;
    const VecX inside = patch_mean_features(*world, 0.5, 0.5, std::numbers::pi / 2, 0.3, &clamped);
    CHECK(inside == world->class_base(0));
    CHECK_FALSE(clamped);
    const VecX straddle = patch_mean_features(*world, 1.0, 0.5, std::numbers::pi / 2, 0.3);
    CHECK((straddle - 0.5 * (world->class_base(0) + world->class_base(1))).norm() <= 1e-15);

    FeatureProviderConfig cfg;
    cfg.brightness = 0.6;
    FeatureProvider dim(world, cfg);
    CHECK((dim.features_under_robot(0.5, 0.5, std::numbers::pi / 2) - 0.6 * world->class_base(0)).norm() <= 1e-15);
}

TEST_CASE("eta lookup returns configured values verbatim") {
    const TerrainWorld w = two_cell_world();
    CHECK(w.eta_tracked_at(0.5, 0.5) == Vec2(1.0, 1.0));
    CHECK(w.eta_tracked_at(1.5, 0.5) == Vec2(0.5, 0.6));
    CHECK(w.eta_lateral_at(1.5, 0.5) == 0.5);

    WorldSpec s = three_class_spec();
    const TerrainWorld b = build_world(s);
    bool found = false;
    for (int r = 0; r < 30 && !found; ++r)
        for (int c = 0; c < 40 && !found; ++c)
            if (b.class_at(r, c) == 2) {
                const double x = (c + 0.5) * b.cell_size(), y = (r + 0.5) * b.cell_size();
                CHECK(b.eta_tracked_at(x, y) == Vec2(0.5, 0.5));
                found = true;
            }
    CHECK(found);
}

TEST_CASE("twin classes share features but keep their own eta") {
    WorldSpec s = three_class_spec();
    s.classes[2] = {"mud", Vec2(0.4, 0.5), 0.4, "grass", 0.0};
    s.layout = "stripes";
    const TerrainWorld w = build_world(s);
    CHECK(w.class_base(2) == w.class_base(0));
    CHECK_FALSE(w.terrain_class(2).eta_tracked == w.terrain_class(0).eta_tracked);
}

TEST_CASE("stripes layout assigns equal vertical bands") {
    WorldSpec s = three_class_spec();
    s.layout = "stripes";
    s.tile_cols = 30;
    const TerrainWorld w = build_world(s);
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 30; ++c) REQUIRE(w.class_at(r, c) == c / 10);
}

TEST_CASE("positions outside the map clamp and are counted") {
    auto world = std::make_shared<const TerrainWorld>(build_world(three_class_spec()));
    const CellIndex c = world->locate(-3.0, 1e6);
    CHECK(c.clamped);
    CHECK(c.col == 0);
    CHECK(c.row == world->rows() - 1);
    FeatureProvider fp(world, {});
    (void)fp.features_under_robot(10.0, 10.0, 0.0);
    CHECK(fp.clamp_count() == 0);
    (void)fp.features_under_robot(-1.0, 10.0, 0.0);
    (void)fp.features_under_robot(10.0, world->height() + 2.0, 0.0);
    CHECK(fp.clamp_count() == 2);
}

TEST_CASE("provider is deterministic for a seed and query sequence") {
    auto world = std::make_shared<const TerrainWorld>(build_world(three_class_spec()));
    FeatureProviderConfig cfg;
    cfg.noise_std = 0.1;
    cfg.seed = 42;
    FeatureProvider a(world, cfg), b(world, cfg);
    cfg.seed = 43;
    FeatureProvider c(world, cfg);
    bool differs = false;
    for (int i = 0; i < 50; ++i) {
        const double x = 1.0 + 0.4 * i, y = 3.0 + 0.1 * i, psi = 0.05 * i;
        const VecX fa = a.features_under_robot(x, y, psi);
        CHECK(fa == b.features_under_robot(x, y, psi));
        differs |= !(fa == c.features_under_robot(x, y, psi));
    }
    CHECK(differs);
}

TEST_CASE("one-cell moves change features by at most the class spread") {
    const WorldSpec s = three_class_spec();
    const TerrainWorld w = build_world(s);
    double inter = 0.0;
    for (int i = 0; i < w.num_classes(); ++i)
        for (int j = 0; j < w.num_classes(); ++j) inter = std::max(inter, (w.class_base(i) - w.class_base(j)).norm());
    // Cell features deviate from their class base by intra-class noise only.
    double dev = 0.0;
    for (int r = 0; r < 30; ++r)
        for (int c = 0; c < 40; ++c) dev = std::max(dev, (w.feature_at(r, c) - w.class_base(w.class_at(r, c))).norm());
    const double h = w.cell_size();
    for (double x = 1.0; x < w.width() - 1.0; x += 0.37)
        for (double y = 1.0; y < w.height() - 1.0; y += 1.13) {
            const VecX a = patch_mean_features(w, x, y, 0.3, 0.3);
            const VecX b = patch_mean_features(w, x + h, y, 0.3, 0.3);
            REQUIRE((a - b).norm() <= inter + 2.0 * dev);
        }
}

TEST_CASE("world grid round-trips through the text format") {
    test::TempDir tmp("grid");
    const TerrainWorld w = build_world(three_class_spec());
    write_world_grid(w, tmp / "world.txt", true);
    const TerrainWorld r = read_world_grid(tmp / "world.txt");
    CHECK(r.rows() == w.rows());
    CHECK(r.cols() == w.cols());
    CHECK(r.cell_size() == w.cell_size());
    for (int i = 0; i < w.num_classes(); ++i) {
        CHECK(r.terrain_class(i).name == w.terrain_class(i).name);
        CHECK(r.terrain_class(i).eta_tracked == w.terrain_class(i).eta_tracked);
    }
    for (int row = 0; row < w.rows(); row += 3)
        for (int c = 0; c < w.cols(); c += 3) {
            REQUIRE(r.class_at(row, c) == w.class_at(row, c));
            REQUIRE(r.feature_at(row, c) == w.feature_at(row, c));
        }

    write_world_grid(w, tmp / "layout.txt", false);
    const TerrainWorld l = read_world_grid(tmp / "layout.txt");
    CHECK(l.cell_classes() == w.cell_classes());
    CHECK_THROWS_AS((void)read_world_grid(tmp / "missing.txt"), IoError);
}

TEST_CASE("world spec validation") {
    WorldSpec s = three_class_spec();
    s.classes[1].eta_tracked = Vec2(0.0, 1.0);
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = three_class_spec();
    s.layout = "checker";
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = three_class_spec();
    s.classes[0].twin_of = "ice";
    CHECK_THROWS_AS(s.validate(), ConfigError);
}
