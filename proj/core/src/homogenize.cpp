#include "mks/homogenize.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <sstream>
#include <thread>

#include "mks/fft_plan.hpp"
#include "mks/minres.hpp"

namespace mks::homogenize {

Material::Material(double e, double nu) : youngs_modulus(e), poissons_ratio(nu) {
    if (!(e >= 0.0))
        throw ArgumentError("Material: Young's modulus must be >= 0");
    if (!(nu > -1.0 && nu < 0.5))
        throw ArgumentError("Material: Poisson's ratio must be in (-1, 0.5)");
}

double Material::lame_lambda() const {
    const double e = youngs_modulus, nu = poissons_ratio;
    return e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

double Material::lame_mu() const {
    return youngs_modulus / (2.0 * (1.0 + poissons_ratio));
}

LoadCase LoadCase::perturbation(StrainComponent component, double beta) {
    LoadCase load;
    load.perturbation_magnitude = beta;
    switch (component) {
        case StrainComponent::e11: load.macro_strain(0, 0) = beta; break;
        case StrainComponent::e22: load.macro_strain(1, 1) = beta; break;
        case StrainComponent::e12:
            load.macro_strain(0, 1) = beta;
            load.macro_strain(1, 0) = beta;
            break;
    }
    return load;
}

Eigen::Matrix3d plane_strain_stiffness(const Material& material) {
    const double lambda = material.lame_lambda();
    const double mu = material.lame_mu();
    Eigen::Matrix3d c = Eigen::Matrix3d::Zero();
    c(0, 0) = c(1, 1) = lambda + 2.0 * mu;
    c(0, 1) = c(1, 0) = lambda;
    c(2, 2) = mu;
    return c;
}

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

// Strain/stress fields live in Mandel components (e11, e22, sqrt2*e12),
// stored as three contiguous pixel planes so the Frobenius inner product of
// tensor fields equals the Euclidean dot product of the stacked vector.
struct Planes {
    static long size(long npix) { return 3 * npix; }
};

} // namespace

struct CellSolver::Impl {
    int w, h;
    long npix;
    Fft2D fft;
    long ns;
    // Rotated-grid modified frequency direction per half-spectrum bin;
    // (0, 0) marks the projected-out modes (DC and the checkerboard corner).
    std::vector<double> nx, ny;
    // Scratch
    std::vector<std::complex<double>> spec[3];
    const std::vector<std::uint8_t>* solid = nullptr;
    double c00 = 0, c01 = 0, c22 = 0; // Mandel stiffness entries of the solid

    Impl(int width, int height)
        : w(width), h(height), npix(static_cast<long>(width) * height),
          fft(width, height), ns(fft.spectrum_size()) {
        nx.resize(static_cast<std::size_t>(ns));
        ny.resize(static_cast<std::size_t>(ns));
        const int sw = fft.spectrum_width();
        for (int ky = 0; ky < h; ++ky) {
            const double k2 = std::numbers::pi * ky / h; // k_y / 2 with h=1 pixels
            for (int kx = 0; kx < sw; ++kx) {
                const double k1 = std::numbers::pi * kx / w;
                double x1 = std::sin(k1) * std::cos(k2);
                double x2 = std::cos(k1) * std::sin(k2);
                const bool zero_mode =
                    (kx == 0 && ky == 0) ||
                    (w % 2 == 0 && h % 2 == 0 && kx == w / 2 && ky == h / 2);
                const std::size_t i = static_cast<std::size_t>(ky) * sw + kx;
                if (zero_mode) {
                    nx[i] = ny[i] = 0.0;
                } else {
                    const double norm = std::hypot(x1, x2);
                    nx[i] = x1 / norm;
                    ny[i] = x2 / norm;
                }
            }
        }
        for (auto& s : spec) s.resize(static_cast<std::size_t>(ns));
    }

    // out = C(x) : in, pixelwise; void pixels return zero stress.
    void apply_stiffness(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
        const auto& mask = *solid;
        const double* a = in.data();
        const double* b = in.data() + npix;
        const double* c = in.data() + 2 * npix;
        double* oa = out.data();
        double* ob = out.data() + npix;
        double* oc = out.data() + 2 * npix;
        for (long p = 0; p < npix; ++p) {
            if (mask[static_cast<std::size_t>(p)]) {
                oa[p] = c00 * a[p] + c01 * b[p];
                ob[p] = c01 * a[p] + c00 * b[p];
                oc[p] = c22 * c[p];
            } else {
                oa[p] = ob[p] = oc[p] = 0.0;
            }
        }
    }

    // Orthogonal projection onto compatible zero-mean strain fields.
    void apply_projection(const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        for (int comp = 0; comp < 3; ++comp)
            fft.forward_r2c(in.data() + comp * npix, spec[comp].data());

        for (long i = 0; i < ns; ++i) {
            const double n1 = nx[static_cast<std::size_t>(i)];
            const double n2 = ny[static_cast<std::size_t>(i)];
            auto& sa = spec[0][static_cast<std::size_t>(i)];
            auto& sb = spec[1][static_cast<std::size_t>(i)];
            auto& sc = spec[2][static_cast<std::size_t>(i)];
            if (n1 == 0.0 && n2 == 0.0) {
                sa = sb = sc = 0.0;
                continue;
            }
            // eps_hat = [[a, c/sqrt2], [c/sqrt2, b]], projected onto
            // sym(n (x) u) with u = 2 eps_hat n - (n . eps_hat n) n.
            const std::complex<double> c12 = sc / kSqrt2;
            const std::complex<double> t1 = sa * n1 + c12 * n2;
            const std::complex<double> t2 = c12 * n1 + sb * n2;
            const std::complex<double> s = t1 * n1 + t2 * n2;
            const std::complex<double> u1 = 2.0 * t1 - s * n1;
            const std::complex<double> u2 = 2.0 * t2 - s * n2;
            sa = n1 * u1;
            sb = n2 * u2;
            sc = (n1 * u2 + n2 * u1) * (kSqrt2 * 0.5);
        }

        const double inv_n = 1.0 / static_cast<double>(npix);
        for (int comp = 0; comp < 3; ++comp) {
            fft.backward_c2r(spec[comp].data(), out.data() + comp * npix);
            Eigen::Map<Eigen::VectorXd>(out.data() + comp * npix, npix) *= inv_n;
        }
    }
};

CellSolver::CellSolver(int width, int height)
    : impl_(std::make_unique<Impl>(width, height)) {}

CellSolver::~CellSolver() = default;

SolveReport CellSolver::solve(const UnitCell& cell, const Material& material,
                              const LoadCase& load, const SolverOptions& options) {
    Impl& im = *impl_;
    if (cell.width() != im.w || cell.height() != im.h)
        throw ArgumentError("CellSolver: cell size does not match solver size");
    if (!is_binary(cell))
        throw ArgumentError("CellSolver: cell must be binary");
    if (!(options.tol > 0.0))
        throw ArgumentError("CellSolver: tol must be > 0");

    const double lambda = material.lame_lambda();
    const double mu = material.lame_mu();
    im.c00 = lambda + 2.0 * mu;
    im.c01 = lambda;
    im.c22 = 2.0 * mu; // Mandel shear entry
    im.solid = &cell.cells();

    const long n3 = Planes::size(im.npix);
    Eigen::VectorXd macro(n3);
    macro.segment(0, im.npix).setConstant(load.macro_strain(0, 0));
    macro.segment(im.npix, im.npix).setConstant(load.macro_strain(1, 1));
    macro.segment(2 * im.npix, im.npix).setConstant(kSqrt2 * load.macro_strain(0, 1));

    Eigen::VectorXd tmp(n3), rhs(n3);
    im.apply_stiffness(macro, tmp);
    im.apply_projection(tmp, rhs);
    rhs = -rhs;

    int max_iter = options.max_iter;
    if (max_iter <= 0) {
        max_iter = static_cast<int>(
            std::min(100.0 * std::sqrt(static_cast<double>(im.npix)), 20000.0));
    }

    // A = G C G: symmetric positive semidefinite on the whole space, equal to
    // G C on the compatible subspace the iterates live in.
    Eigen::VectorXd ga(n3), cga(n3);
    auto apply = [&](const Eigen::VectorXd& in, Eigen::VectorXd& out) {
        im.apply_projection(in, ga);
        im.apply_stiffness(ga, cga);
        im.apply_projection(cga, out);
    };

    Eigen::VectorXd fluctuation(n3);
    // Solve to half the requested tolerance, then verify the true residual.
    MinresResult mr = minres(apply, rhs, fluctuation, 0.5 * options.tol, max_iter);

    SolveReport report;
    report.iterations = mr.iterations;
    const double rhs_norm = rhs.norm();
    if (rhs_norm > 0.0) {
        apply(fluctuation, tmp);
        report.relative_residual = (rhs - tmp).norm() / rhs_norm;
        report.converged = report.relative_residual <= options.tol;
    } else {
        report.relative_residual = 0.0;
        report.converged = true;
        fluctuation.setZero();
    }

    Eigen::VectorXd total = macro + fluctuation;
    im.apply_stiffness(total, tmp);
    const double s11 = tmp.segment(0, im.npix).mean();
    const double s22 = tmp.segment(im.npix, im.npix).mean();
    const double s12 = tmp.segment(2 * im.npix, im.npix).mean() / kSqrt2;
    if (!std::isfinite(s11) || !std::isfinite(s22) || !std::isfinite(s12))
        throw NumericalError("CellSolver: non-finite average stress");
    report.average_stress << s11, s12, s12, s22;
    im.solid = nullptr;
    return report;
}

SolveReport solve_cell(const UnitCell& cell, const Material& material,
                       const LoadCase& load, const SolverOptions& options) {
    CellSolver solver(cell.width(), cell.height());
    return solver.solve(cell, material, load, options);
}

StiffnessResult effective_c11(const UnitCell& cell, const Material& material,
                              double tol, double beta) {
    CellSolver solver(cell.width(), cell.height());
    const LoadCase load = LoadCase::perturbation(StrainComponent::e11, beta);
    const SolveReport report = solver.solve(cell, material, load, {tol, 0});
    StiffnessResult result;
    result.c11 = report.average_stress(0, 0) / beta;
    result.normalized_c11 =
        material.youngs_modulus > 0.0 ? result.c11 / material.youngs_modulus : 0.0;
    return result;
}

LabelBatch label_dataset(const std::vector<UnitCell>& cells, const Material& material,
                         double tol, double filter_threshold, int jobs, double beta) {
    if (filter_threshold < 0.0)
        throw ArgumentError("label_dataset: filter_threshold must be >= 0");
    const int n = static_cast<int>(cells.size());
    LabelBatch batch;
    batch.normalized_c11.assign(static_cast<std::size_t>(n),
                                std::numeric_limits<double>::quiet_NaN());
    batch.reports.assign(static_cast<std::size_t>(n), SolveReport{});
    batch.failures.assign(static_cast<std::size_t>(n), std::string{});

    const LoadCase load = LoadCase::perturbation(StrainComponent::e11, beta);
    auto work = [&](int begin, int end) {
        std::unique_ptr<CellSolver> solver;
        int sw = -1, sh = -1;
        for (int i = begin; i < end; ++i) {
            const auto& cell = cells[static_cast<std::size_t>(i)];
            try {
                if (!solver || cell.width() != sw || cell.height() != sh) {
                    sw = cell.width();
                    sh = cell.height();
                    solver = std::make_unique<CellSolver>(sw, sh);
                }
                const SolveReport report = solver->solve(cell, material, load, {tol, 0});
                batch.reports[static_cast<std::size_t>(i)] = report;
                const double c11 = report.average_stress(0, 0) / beta;
                batch.normalized_c11[static_cast<std::size_t>(i)] =
                    material.youngs_modulus > 0.0 ? c11 / material.youngs_modulus : 0.0;
            } catch (const std::exception& e) {
                batch.failures[static_cast<std::size_t>(i)] = e.what();
            }
        }
    };

    jobs = std::max(1, jobs);
    if (jobs == 1 || n <= 1) {
        work(0, n);
    } else {
        jobs = std::min(jobs, n);
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(jobs));
        // Static partition by index keeps the output independent of timing.
        for (int t = 0; t < jobs; ++t) {
            const int begin = static_cast<int>(static_cast<long>(n) * t / jobs);
            const int end = static_cast<int>(static_cast<long>(n) * (t + 1) / jobs);
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    for (int i = 0; i < n; ++i) {
        if (batch.failures[static_cast<std::size_t>(i)].empty() &&
            batch.normalized_c11[static_cast<std::size_t>(i)] >= filter_threshold) {
            batch.kept.push_back(i);
        }
    }
    return batch;
}

} // namespace mks::homogenize
