#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "helpers.hpp"
#include "mks/geometry.hpp"
#include "mks/homogenize.hpp"
#include "mks/minres.hpp"

using namespace mks;
using namespace mks::homogenize;

TEST_SUITE_BEGIN("homogenize");

namespace {

// lambda + 2 mu for E = 1, nu = 0.3 under plane strain.
constexpr double kSolidC11 = 0.7 / 0.52;
// Parallel laminate at 50% fill: vf * E / (1 - nu^2).
constexpr double kLaminateC11 = 0.5 / 0.91;

UnitCell shifted(const UnitCell& cell, int dx, int dy) {
    UnitCell out(cell.width(), cell.height());
    for (int y = 0; y < cell.height(); ++y)
        for (int x = 0; x < cell.width(); ++x)
            out.at(x, y) = cell.wrap(x - dx, y - dy);
    return out;
}

UnitCell smooth_test_cell(int size, std::uint64_t seed) {
    geometry::GenConfig cfg;
    cfg.tile_width = size / 2;
    cfg.tile_height = size / 2;
    cfg.correlation_length = size / 6.0;
    return geometry::generate_dataset(1, seed, cfg)[0];
}

} // namespace

TEST_CASE("minres matches a dense direct solve on SPD problems") {
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        const int n = 30;
        Eigen::MatrixXd b_mat(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b_mat(i, j) = rng.normal();
        const Eigen::MatrixXd a = b_mat * b_mat.transpose() +
                                  Eigen::MatrixXd::Identity(n, n);
        Eigen::VectorXd rhs(n);
        for (int i = 0; i < n; ++i) rhs[i] = rng.normal();

        Eigen::VectorXd x;
        const auto result = minres(
            [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = a * in; },
            rhs, x, 1e-12, 1000);
        CHECK(result.converged);
        const Eigen::VectorXd exact = a.ldlt().solve(rhs);
        CHECK((x - exact).norm() / exact.norm() < 1e-8);
    }
}

TEST_CASE("minres solves singular but consistent systems") {
    Rng rng(7);
    const int n = 24, rank = 15;
    Eigen::MatrixXd b_mat(n, rank);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < rank; ++j) b_mat(i, j) = rng.normal();
    const Eigen::MatrixXd a = b_mat * b_mat.transpose(); // PSD, rank-deficient
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd rhs = a * z; // consistent by construction

    Eigen::VectorXd x;
    const auto result = minres(
        [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = a * in; },
        rhs, x, 1e-10, 2000);
    CHECK(result.converged);
    CHECK((a * x - rhs).norm() / rhs.norm() < 1e-8);
}

TEST_CASE("minres on b = 0 returns x = 0 without iterating") {
    Eigen::VectorXd x;
    const auto result = minres(
        [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) { out = in; },
        Eigen::VectorXd::Zero(5), x, 1e-10, 100);
    CHECK(result.converged);
    CHECK(result.iterations == 0);
    CHECK(x.norm() == 0.0);
}

TEST_CASE("plane strain stiffness closed forms") {
    const Eigen::Matrix3d zero = plane_strain_stiffness(Material(0.0, 0.3));
    CHECK(zero.norm() == 0.0);

    const Eigen::Matrix3d nu0 = plane_strain_stiffness(Material(1.0, 0.0));
    CHECK(nu0(0, 0) == doctest::Approx(1.0));
    CHECK(nu0(0, 1) == doctest::Approx(0.0));
    CHECK(nu0(2, 2) == doctest::Approx(0.5));

    const Eigen::Matrix3d def = plane_strain_stiffness(Material(1.0, 0.3));
    CHECK(def(0, 0) == doctest::Approx(kSolidC11).epsilon(1e-12));
    CHECK(def(0, 1) == doctest::Approx(0.3 / (1.3 * 0.4)).epsilon(1e-12));
    CHECK(def(1, 1) == def(0, 0));
    CHECK(def(1, 0) == def(0, 1));

    CHECK_THROWS_AS(Material(-1.0, 0.3), ArgumentError);
    CHECK_THROWS_AS(Material(1.0, 0.5), ArgumentError);
}

TEST_CASE("all-solid cell: homogeneous closed form in at most 2 iterations") {
    const Material mat(1.0, 0.3);
    const auto load = LoadCase::perturbation(StrainComponent::e11, 1e-2);
    const SolveReport report = solve_cell(test::constant_cell(32, 32, 1), mat, load);
    CHECK(report.converged);
    CHECK(report.iterations <= 2);
    CHECK(report.average_stress(0, 0) / 1e-2 ==
          doctest::Approx(kSolidC11).epsilon(1e-10));

    const StiffnessResult rs = effective_c11(test::constant_cell(32, 32, 1), mat);
    CHECK(std::abs(rs.normalized_c11 - kSolidC11) < 1e-8);
}

TEST_CASE("all-void cell carries no stress") {
    const Material mat(1.0, 0.3);
    const auto load = LoadCase::perturbation(StrainComponent::e11, 1e-2);
    const SolveReport report = solve_cell(test::constant_cell(32, 32, 0), mat, load);
    CHECK(report.converged);
    CHECK(report.average_stress.norm() == 0.0);
}

TEST_CASE("laminate parallel to the load matches the closed form") {
    const Material mat(1.0, 0.3);
    // Layers normal to y, continuous along the loading axis x.
    const UnitCell cell = test::stripes_normal_y(32, 32, 8);
    REQUIRE(volume_fraction(cell) == 0.5);
    const StiffnessResult rs = effective_c11(cell, mat, 1e-10);
    CHECK(std::abs(rs.normalized_c11 - kLaminateC11) < 1e-6);
}

TEST_CASE("laminate in series transmits nothing") {
    const Material mat(1.0, 0.3);
    const UnitCell cell = test::stripes_normal_x(32, 32, 8);
    REQUIRE(volume_fraction(cell) == 0.5);
    const StiffnessResult rs = effective_c11(cell, mat, 1e-10);
    CHECK(std::abs(rs.normalized_c11) <= 1e-6);
}

TEST_CASE("beta invariance under linearity") {
    const Material mat(1.0, 0.3);
    const UnitCell cell = smooth_test_cell(32, 3);
    const double r1 = effective_c11(cell, mat, 1e-10, 1e-3).normalized_c11;
    const double r2 = effective_c11(cell, mat, 1e-10, 1e-2).normalized_c11;
    const double r3 = effective_c11(cell, mat, 1e-10, 1e-1).normalized_c11;
    CHECK(std::abs(r1 - r2) / r2 < 1e-9);
    CHECK(std::abs(r3 - r2) / r2 < 1e-9);
}

TEST_CASE("linearity in E and the Voigt bound") {
    const UnitCell cell = smooth_test_cell(32, 5);
    const StiffnessResult at1 = effective_c11(cell, Material(1.0, 0.3), 1e-10);
    const StiffnessResult at2 = effective_c11(cell, Material(2.0, 0.3), 1e-10);
    CHECK(at2.c11 == doctest::Approx(2.0 * at1.c11).epsilon(1e-9));
    CHECK(at2.normalized_c11 == doctest::Approx(at1.normalized_c11).epsilon(1e-9));

    CHECK(at1.normalized_c11 >= 0.0);
    CHECK(at1.normalized_c11 <= kSolidC11 * volume_fraction(cell) + 1e-9);
}

TEST_CASE("translation and mirror invariance") {
    const Material mat(1.0, 0.3);
    const UnitCell cell = smooth_test_cell(32, 8);
    const double base = effective_c11(cell, mat, 1e-10).normalized_c11;

    const double moved = effective_c11(shifted(cell, 5, 9), mat, 1e-10).normalized_c11;
    CHECK(std::abs(moved - base) / base <= 1e-8);

    UnitCell flipped(cell.width(), cell.height());
    for (int y = 0; y < cell.height(); ++y)
        for (int x = 0; x < cell.width(); ++x)
            flipped.at(x, cell.height() - 1 - y) = cell.at(x, y);
    const double mirrored = effective_c11(flipped, mat, 1e-10).normalized_c11;
    CHECK(std::abs(mirrored - base) / base <= 1e-8);
}

TEST_CASE("pixel-replication upsampling moves the answer by under 1%") {
    const Material mat(1.0, 0.3);
    const UnitCell cell = smooth_test_cell(96, 13);
    UnitCell up(cell.width() * 2, cell.height() * 2);
    for (int y = 0; y < up.height(); ++y)
        for (int x = 0; x < up.width(); ++x) up.at(x, y) = cell.at(x / 2, y / 2);
    const double coarse = effective_c11(cell, mat, 1e-9).normalized_c11;
    const double fine = effective_c11(up, mat, 1e-9).normalized_c11;
    CHECK(std::abs(fine - coarse) / coarse <= 0.01);
}

TEST_CASE("label_dataset filters, keeps order, and tolerates failures") {
    const Material mat(1.0, 0.3);
    std::vector<UnitCell> cells{test::constant_cell(16, 16, 1),
                                test::constant_cell(16, 16, 0),
                                test::constant_cell(16, 16, 1)};
    const LabelBatch batch = label_dataset(cells, mat, 1e-8, 0.01);
    REQUIRE(batch.normalized_c11.size() == 3);
    CHECK(batch.normalized_c11[0] == doctest::Approx(kSolidC11).epsilon(1e-9));
    CHECK(batch.normalized_c11[2] == doctest::Approx(kSolidC11).epsilon(1e-9));
    CHECK(batch.kept == std::vector<int>{0, 2}); // the void cell filters out

    const LabelBatch all = label_dataset(cells, mat, 1e-8, 0.0);
    CHECK(all.kept == std::vector<int>{0, 1, 2}); // threshold 0 drops nothing

    // Parallel labeling agrees with sequential labeling bit for bit.
    const LabelBatch par = label_dataset(cells, mat, 1e-8, 0.01, 3);
    CHECK(par.normalized_c11 == batch.normalized_c11);
    CHECK(par.kept == batch.kept);
}

TEST_CASE("solver rejects invalid input") {
    const Material mat(1.0, 0.3);
    UnitCell bad = test::constant_cell(8, 8, 1);
    bad.cells()[3] = 2;
    const auto load = LoadCase::perturbation(StrainComponent::e11, 1e-2);
    CHECK_THROWS_AS(solve_cell(bad, mat, load), ArgumentError);
    CHECK_THROWS_AS(solve_cell(test::constant_cell(8, 8, 1), mat, load, {0.0, 0}),
                    ArgumentError);
}

TEST_SUITE_END();
