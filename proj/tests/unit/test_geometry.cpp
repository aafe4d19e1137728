#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "helpers.hpp"
#include "mks/geometry.hpp"

using namespace mks;
using namespace mks::geometry;

TEST_SUITE_BEGIN("geometry");

TEST_CASE("gaussian field is deterministic per seed and differs across seeds") {
    const RealField a = sample_gaussian_field(7, 48, 48, 8.0);
    const RealField b = sample_gaussian_field(7, 48, 48, 8.0);
    CHECK(a.cells() == b.cells());

    const RealField c = sample_gaussian_field(8, 48, 48, 8.0);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.cells()[i] != c.cells()[i]) { any_diff = true; break; }
    CHECK(any_diff);
}

TEST_CASE("gaussian field moments stay in the Monte Carlo band over 100 seeds") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const RealField f = sample_gaussian_field(seed, 64, 64, 10.0);
        double mean = 0.0;
        for (double v : f.cells()) mean += v;
        mean /= static_cast<double>(f.size());
        double var = 0.0;
        for (double v : f.cells()) var += (v - mean) * (v - mean);
        var /= static_cast<double>(f.size());
        CHECK(std::abs(mean) <= 0.15);
        CHECK(std::sqrt(var) >= 0.7);
        CHECK(std::sqrt(var) <= 1.3);
    }
}

TEST_CASE("gaussian field rejects bad arguments") {
    CHECK_THROWS_AS(sample_gaussian_field(1, 1, 48, 8.0), ArgumentError);
    CHECK_THROWS_AS(sample_gaussian_field(1, 48, 1, 8.0), ArgumentError);
    CHECK_THROWS_AS(sample_gaussian_field(1, 48, 48, 0.0), ArgumentError);
}

TEST_CASE("binarize follows the >= tie rule") {
    RealField f(2, 2);
    f.at(0, 0) = -1.0;
    f.at(1, 0) = 0.0;
    f.at(0, 1) = 1.0;
    f.at(1, 1) = 2.0;
    const UnitCell cell = binarize(f, 0.5);
    CHECK(cell.at(0, 0) == 0);
    CHECK(cell.at(1, 0) == 0);
    CHECK(cell.at(0, 1) == 1);
    CHECK(cell.at(1, 1) == 1);

    CHECK(volume_fraction(binarize(f, -2.0)) == 1.0); // below min -> all solid
    CHECK(volume_fraction(binarize(f, 3.0)) == 0.0);  // above max -> all void
    // Tie pixels go solid.
    CHECK(binarize(f, 0.0).at(1, 0) == 1);
}

TEST_CASE("boundary connectivity rule") {
    CHECK(boundary_connectivity_ok(test::constant_cell(4, 4, 1), 0.1, true));
    CHECK_FALSE(boundary_connectivity_ok(test::constant_cell(4, 4, 0), 0.1, false));

    // Solid only in the interior 2x2 block: all four boundaries are empty.
    const UnitCell interior = test::cell_from({"0000", "0110", "0110", "0000"});
    CHECK_FALSE(boundary_connectivity_ok(interior, 0.1, false));

    CHECK_THROWS_AS(boundary_connectivity_ok(interior, -0.1, false), ArgumentError);
    CHECK_THROWS_AS(boundary_connectivity_ok(interior, 1.5, false), ArgumentError);

    // Two disconnected solid columns fail only the connectivity flag.
    const UnitCell two_cols = test::cell_from({"1010", "1010", "1010", "1010"});
    CHECK(boundary_connectivity_ok(two_cols, 0.1, false));
    CHECK_FALSE(boundary_connectivity_ok(two_cols, 0.1, true));

    // Periodic wrap joins components across the edge.
    const UnitCell wrap = test::cell_from({"1001", "1001", "1001", "1001"});
    CHECK(boundary_connectivity_ok(wrap, 0.1, true));
}

TEST_CASE("mirror_periodic reproduces the hand-enumerated examples") {
    const UnitCell one = mirror_periodic(test::cell_from({"1"}));
    CHECK(one.width() == 2);
    CHECK(one.height() == 2);
    for (auto v : one.cells()) CHECK(v == 1);

    const UnitCell tile = test::cell_from({"10", "00"});
    const UnitCell out = mirror_periodic(tile);
    const UnitCell expected =
        test::cell_from({"1001", "0000", "0000", "1001"});
    CHECK(out == expected);
}

TEST_CASE("mirror_periodic preserves volume fraction and quadrant structure") {
    const UnitCell tile = test::random_cell(6, 4, 0.4, 99);
    const UnitCell out = mirror_periodic(tile);
    CHECK(volume_fraction(out) == volume_fraction(tile));
    const int w = tile.width(), h = tile.height();
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            CHECK(out.at(x, y) == tile.at(x, y));
            CHECK(out.at(2 * w - 1 - x, y) == tile.at(x, y));
            CHECK(out.at(x, 2 * h - 1 - y) == tile.at(x, y));
            CHECK(out.at(2 * w - 1 - x, 2 * h - 1 - y) == tile.at(x, y));
        }
    }
}

TEST_CASE("generate_dataset is deterministic and respects its contracts") {
    GenConfig cfg;
    cfg.tile_width = 24;
    cfg.tile_height = 24;
    cfg.correlation_length = 5.0;
    const auto a = generate_dataset(5, 1, cfg);
    const auto b = generate_dataset(5, 1, cfg);
    REQUIRE(a.size() == 5);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);

    for (const auto& cell : a) {
        CHECK(cell.width() == 48);
        CHECK(cell.height() == 48);
        CHECK(boundary_connectivity_ok(cell, cfg.min_boundary_fraction, true));
        const double vf = volume_fraction(cell);
        CHECK(vf >= cfg.density_min);
        CHECK(vf <= cfg.density_max);
    }
}

TEST_CASE("generate_dataset stalls loudly on an impossible config") {
    GenConfig cfg;
    cfg.tile_width = 16;
    cfg.tile_height = 16;
    cfg.density_min = 0.30;
    cfg.density_max = 0.31;
    cfg.min_boundary_fraction = 1.0; // fully solid boundaries at 30% density
    cfg.trial_budget = 50;
    CHECK_THROWS_AS(generate_dataset(1, 3, cfg), GenerationStallError);
}

TEST_CASE("extract_interface matches the 5-point enumeration") {
    CHECK(volume_fraction(extract_interface(test::constant_cell(5, 5, 1))) == 0.0);
    CHECK(volume_fraction(extract_interface(test::constant_cell(5, 5, 0))) == 0.0);

    UnitCell cell = test::constant_cell(5, 5, 0);
    cell.at(2, 2) = 1;
    const PhaseMask mask = extract_interface(cell);
    CHECK(mask.phase_id == 2);
    const std::set<std::pair<int, int>> expected{{1, 2}, {3, 2}, {2, 1}, {2, 3}};
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 5; ++x)
            CHECK(mask.grid.at(x, y) == (expected.count({x, y}) ? 1 : 0));
}

TEST_CASE("interface mask is disjoint from the solid phase") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const UnitCell cell = test::random_cell(12, 10, 0.5, seed);
        const PhaseMask mask = extract_interface(cell);
        for (std::size_t i = 0; i < cell.size(); ++i)
            CHECK(static_cast<int>(mask.grid.cells()[i]) * cell.cells()[i] == 0);
    }
}

TEST_CASE("interface wraps periodically") {
    // Solid column at x = 0; pixels at x = W-1 touch it through the wrap.
    const UnitCell cell = test::cell_from({"1000", "1000", "1000", "1000"});
    const PhaseMask mask = extract_interface(cell);
    for (int y = 0; y < 4; ++y) {
        CHECK(mask.grid.at(1, y) == 1);
        CHECK(mask.grid.at(3, y) == 1);
        CHECK(mask.grid.at(2, y) == 0);
    }
}

TEST_CASE("volume_fraction basics") {
    CHECK(volume_fraction(test::constant_cell(3, 3, 1)) == 1.0);
    CHECK(volume_fraction(test::constant_cell(3, 3, 0)) == 0.0);
    CHECK(volume_fraction(test::cell_from({"10", "01"})) == 0.5);
}

TEST_CASE("diversity_stats on degenerate and complementary datasets") {
    std::vector<UnitCell> identical(4, test::random_cell(96, 96, 0.5, 5));
    const auto rep = diversity_stats(identical, 2, 11);
    CHECK(rep.mean_pairwise_distance == 0.0);
    CHECK(rep.normalized_score == 0.0);

    UnitCell a = test::random_cell(96, 96, 0.5, 6);
    UnitCell b = a;
    for (auto& v : b.cells()) v = 1 - v;
    const auto rep2 = diversity_stats({a, b}, 2, 11);
    CHECK(rep2.mean_pairwise_distance == doctest::Approx(96.0));
    CHECK(rep2.normalized_score == doctest::Approx(1.0));

    CHECK_THROWS_AS(diversity_stats({a, b}, 3, 11), ArgumentError);
    CHECK_THROWS_AS(diversity_stats({a}, 1, 11), ArgumentError);
}

TEST_CASE("diversity_stats kmeans cluster sizes on separated blobs") {
    // Two tight groups of identical cells: k = 2 must split them evenly.
    std::vector<UnitCell> cells;
    const UnitCell solid = test::constant_cell(16, 16, 1);
    const UnitCell hollow = test::constant_cell(16, 16, 0);
    for (int i = 0; i < 6; ++i) cells.push_back(solid);
    for (int i = 0; i < 6; ++i) cells.push_back(hollow);
    const auto rep = diversity_stats(cells, 2, 3);
    CHECK(rep.k == 2);
    CHECK(rep.kmeans_cluster_size_cv == doctest::Approx(0.0));
}

TEST_SUITE_END();
