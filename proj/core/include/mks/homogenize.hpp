#pragma once

#include <Eigen/Core>

#include <memory>
#include <string>
#include <vector>

#include "mks/grid.hpp"

namespace mks::homogenize {

// Isotropic linear elastic solid under plane strain.
struct Material {
    double youngs_modulus = 1.0; // GPa
    double poissons_ratio = 0.3;

    Material() = default;
    Material(double e, double nu);

    double lame_lambda() const;
    double lame_mu() const;
};

enum class StrainComponent { e11, e22, e12 };

// One macroscopic strain perturbation: exactly one component set to beta.
struct LoadCase {
    Eigen::Matrix2d macro_strain = Eigen::Matrix2d::Zero();
    double perturbation_magnitude = 0.0;

    static LoadCase perturbation(StrainComponent component, double beta);
};

struct SolveReport {
    Eigen::Matrix2d average_stress = Eigen::Matrix2d::Zero();
    int iterations = 0;
    double relative_residual = 0.0;
    bool converged = false;
};

struct StiffnessResult {
    double c11 = 0.0;
    double normalized_c11 = 0.0; // c11 / E, zero when E = 0
};

// Voigt-reduced 3x3 plane-strain stiffness with rows/cols ordered
// (11, 22, 12); entry (2,2) is C1212 = mu.
Eigen::Matrix3d plane_strain_stiffness(const Material& material);

struct SolverOptions {
    double tol = 1e-8;
    int max_iter = 0; // 0 -> min(100 * sqrt(pixel count), 20000)
};

// Galerkin-FFT cell solver on the rotated finite-difference grid, solved
// matrix-free with MINRES. Voids carry exactly zero stiffness. One instance
// per thread; plans and buffers are reused across solves of the same size.
class CellSolver {
public:
    CellSolver(int width, int height);
    ~CellSolver();
    CellSolver(const CellSolver&) = delete;
    CellSolver& operator=(const CellSolver&) = delete;

    SolveReport solve(const UnitCell& cell, const Material& material,
                      const LoadCase& load, const SolverOptions& options = {});

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience around CellSolver.
SolveReport solve_cell(const UnitCell& cell, const Material& material,
                       const LoadCase& load, const SolverOptions& options = {});

// C11 = sigma_11(11) / beta from the single perturbation strain_11 = beta.
StiffnessResult effective_c11(const UnitCell& cell, const Material& material,
                              double tol = 1e-8, double beta = 1e-2);

struct LabelBatch {
    // Per input cell; NaN where the solve failed outright.
    std::vector<double> normalized_c11;
    std::vector<SolveReport> reports;
    // Failure message per cell, empty string when the solve ran.
    std::vector<std::string> failures;
    // Indices whose label passed the filter, in dataset order.
    std::vector<int> kept;
};

// Labels every cell and drops labels below filter_threshold from `kept`.
// Per-cell failures are recorded, never fatal. Deterministic for any `jobs`.
LabelBatch label_dataset(const std::vector<UnitCell>& cells, const Material& material,
                         double tol, double filter_threshold, int jobs = 1,
                         double beta = 1e-2);

} // namespace mks::homogenize
