#include "mks/geometry.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>
#include <vector>

#include "mks/cell_rng.hpp"
#include "mks/fft_plan.hpp"

namespace mks {

double volume_fraction(const Grid<std::uint8_t>& grid) {
    long solid = 0;
    for (auto v : grid.cells()) solid += v;
    return static_cast<double>(solid) / static_cast<double>(grid.size());
}

double volume_fraction(const PhaseMask& mask) { return volume_fraction(mask.grid); }

} // namespace mks

namespace mks::geometry {

RealField sample_gaussian_field(std::uint64_t seed, int width, int height,
                                double correlation_length) {
    if (width < 2 || height < 2)
        throw ArgumentError("sample_gaussian_field: width and height must be >= 2");
    if (!(correlation_length > 0.0))
        throw ArgumentError("sample_gaussian_field: correlation_length must be > 0");

    Rng rng(derive_seed(seed, "grf"));
    RealField field(width, height);
    for (auto& v : field.cells()) v = rng.normal();

    Fft2D fft(width, height);
    std::vector<std::complex<double>> spec(fft.spectrum_size());
    fft.forward_r2c(field.data(), spec.data());

    // Squared-exponential covariance exp(-|r|^2 / (2 l^2)) has spectral
    // density proportional to exp(-l^2 |k|^2 / 2); the filter applies its
    // square root. The DC mode is zeroed for an exactly zero-mean field.
    const double l2 = correlation_length * correlation_length;
    const int sw = fft.spectrum_width();
    for (int ky = 0; ky < height; ++ky) {
        const int fy = (ky <= height / 2) ? ky : ky - height;
        const double k_y = 2.0 * std::numbers::pi * fy / height;
        for (int kx = 0; kx < sw; ++kx) {
            const double k_x = 2.0 * std::numbers::pi * kx / width;
            const double k2 = k_x * k_x + k_y * k_y;
            double env = std::exp(-0.25 * l2 * k2);
            if (kx == 0 && ky == 0) env = 0.0;
            spec[static_cast<std::size_t>(ky) * sw + kx] *= env;
        }
    }

    fft.backward_c2r(spec.data(), field.data());

    // Normalize to zero sample mean and unit sample variance; downstream
    // thresholding is quantile-based, so the absolute scale is free.
    const double n = static_cast<double>(field.size());
    double mean = 0.0;
    for (auto v : field.cells()) mean += v;
    mean /= n;
    double var = 0.0;
    for (auto v : field.cells()) var += (v - mean) * (v - mean);
    var /= n;
    if (!(var > 1e-300))
        throw NumericalError("sample_gaussian_field: degenerate (constant) field");
    const double inv_std = 1.0 / std::sqrt(var);
    for (auto& v : field.cells()) v = (v - mean) * inv_std;
    return field;
}

UnitCell binarize(const RealField& field, double threshold) {
    UnitCell cell(field.width(), field.height());
    const auto& src = field.cells();
    auto& dst = cell.cells();
    for (std::size_t i = 0; i < src.size(); ++i)
        dst[i] = src[i] >= threshold ? 1 : 0;
    return cell;
}

namespace {

double line_fraction(const UnitCell& cell, bool row, int index) {
    const int n = row ? cell.width() : cell.height();
    long solid = 0;
    for (int i = 0; i < n; ++i)
        solid += row ? cell.at(i, index) : cell.at(index, i);
    return static_cast<double>(solid) / n;
}

bool single_periodic_component(const UnitCell& cell) {
    const int w = cell.width(), h = cell.height();
    long total = 0;
    for (auto v : cell.cells()) total += v;
    if (total == 0) return false;

    std::vector<std::uint8_t> seen(cell.size(), 0);
    std::vector<int> stack;
    int start = -1;
    for (std::size_t i = 0; i < cell.size(); ++i)
        if (cell.cells()[i]) { start = static_cast<int>(i); break; }
    stack.push_back(start);
    seen[start] = 1;
    long reached = 0;
    while (!stack.empty()) {
        const int p = stack.back();
        stack.pop_back();
        ++reached;
        const int x = p % w, y = p / w;
        const int nx[4] = {(x + 1) % w, (x + w - 1) % w, x, x};
        const int ny[4] = {y, y, (y + 1) % h, (y + h - 1) % h};
        for (int j = 0; j < 4; ++j) {
            const int q = ny[j] * w + nx[j];
            if (cell.cells()[q] && !seen[q]) {
                seen[q] = 1;
                stack.push_back(q);
            }
        }
    }
    return reached == total;
}

} // namespace

bool boundary_connectivity_ok(const UnitCell& cell, double min_boundary_fraction,
                              bool require_connected) {
    if (min_boundary_fraction < 0.0 || min_boundary_fraction > 1.0)
        throw ArgumentError("boundary_connectivity_ok: fraction must be in [0, 1]");
    const double f = min_boundary_fraction;
    if (line_fraction(cell, true, 0) < f) return false;
    if (line_fraction(cell, true, cell.height() - 1) < f) return false;
    if (line_fraction(cell, false, 0) < f) return false;
    if (line_fraction(cell, false, cell.width() - 1) < f) return false;
    if (require_connected && !single_periodic_component(cell)) return false;
    return true;
}

UnitCell mirror_periodic(const UnitCell& tile) {
    const int w = tile.width(), h = tile.height();
    UnitCell out(2 * w, 2 * h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const auto v = tile.at(x, y);
            out.at(x, y) = v;
            out.at(2 * w - 1 - x, y) = v;
            out.at(x, 2 * h - 1 - y) = v;
            out.at(2 * w - 1 - x, 2 * h - 1 - y) = v;
        }
    }
    return out;
}

namespace {

// One accepted tile drawn from the per-sample trial stream, or nullopt-like
// failure signalled by an empty cell.
bool try_tile(std::uint64_t trial_seed, const GenConfig& cfg, UnitCell& out) {
    RealField field = sample_gaussian_field(trial_seed, cfg.tile_width,
                                            cfg.tile_height, cfg.correlation_length);
    Rng rng(derive_seed(trial_seed, "threshold"));
    const double target_density = rng.uniform(cfg.density_min, cfg.density_max);

    // Threshold at the (1 - d) quantile so the solid fraction lands at d.
    std::vector<double> sorted(field.cells());
    std::sort(sorted.begin(), sorted.end());
    const long n = static_cast<long>(sorted.size());
    long pos = static_cast<long>(std::floor((1.0 - target_density) * n));
    pos = std::clamp(pos, 0L, n - 1);
    UnitCell tile = binarize(field, sorted[pos]);

    const double density = volume_fraction(tile);
    if (density < cfg.density_min || density > cfg.density_max) return false;
    if (!boundary_connectivity_ok(tile, cfg.min_boundary_fraction, cfg.require_connected))
        return false;

    out = mirror_periodic(tile);
    return boundary_connectivity_ok(out, cfg.min_boundary_fraction, cfg.require_connected);
}

} // namespace

std::vector<UnitCell> generate_dataset(int count, std::uint64_t seed,
                                       const GenConfig& cfg) {
    if (count < 1) throw ArgumentError("generate_dataset: count must be >= 1");
    if (cfg.tile_width < 2 || cfg.tile_height < 2)
        throw ArgumentError("generate_dataset: tile dimensions must be >= 2");
    if (!(cfg.density_min <= cfg.density_max))
        throw ArgumentError("generate_dataset: empty density band");

    std::vector<UnitCell> cells(static_cast<std::size_t>(count));
    long trials_total = 0, accepted_total = 0;
    for (int i = 0; i < count; ++i) {
        const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        bool accepted = false;
        for (int t = 0; t < cfg.trial_budget; ++t) {
            ++trials_total;
            if (try_tile(derive_seed(sample_seed, static_cast<std::uint64_t>(t)), cfg,
                         cells[static_cast<std::size_t>(i)])) {
                ++accepted_total;
                accepted = true;
                break;
            }
        }
        const bool rate_too_low =
            trials_total >= cfg.trial_budget &&
            static_cast<double>(accepted_total) < cfg.min_acceptance_rate * trials_total;
        if (!accepted || rate_too_low) {
            std::ostringstream msg;
            msg << "generate_dataset: acceptance stalled (accepted " << accepted_total
                << "/" << trials_total << " trials; floor " << cfg.min_acceptance_rate
                << ") with tile " << cfg.tile_width << "x" << cfg.tile_height
                << ", correlation_length " << cfg.correlation_length << ", density ["
                << cfg.density_min << ", " << cfg.density_max
                << "], min_boundary_fraction " << cfg.min_boundary_fraction
                << (cfg.require_connected ? ", connected" : "");
            throw GenerationStallError(msg.str());
        }
    }
    return cells;
}

PhaseMask extract_interface(const UnitCell& cell) {
    const int w = cell.width(), h = cell.height();
    PhaseMask mask{Grid<std::uint8_t>(w, h), 2};
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (cell.at(x, y)) continue; // solid pixels are never interface
            const int conv = cell.wrap(x + 1, y) + cell.wrap(x - 1, y) +
                             cell.wrap(x, y + 1) + cell.wrap(x, y - 1);
            mask.grid.at(x, y) = conv > 0 ? 1 : 0;
        }
    }
    return mask;
}

PhaseMask solid_mask(const UnitCell& cell) {
    return PhaseMask{cell, 1};
}

namespace {

// Flattened binary images packed into 64-bit words for popcount distances.
struct PackedCells {
    long words_per_cell;
    std::vector<std::uint64_t> bits;

    explicit PackedCells(const std::vector<UnitCell>& dataset) {
        const long npix = static_cast<long>(dataset[0].size());
        words_per_cell = (npix + 63) / 64;
        bits.assign(static_cast<std::size_t>(words_per_cell) * dataset.size(), 0);
        for (std::size_t j = 0; j < dataset.size(); ++j) {
            const auto& cells = dataset[j].cells();
            std::uint64_t* row = &bits[j * static_cast<std::size_t>(words_per_cell)];
            for (long p = 0; p < npix; ++p)
                if (cells[static_cast<std::size_t>(p)])
                    row[p / 64] |= (std::uint64_t{1} << (p % 64));
        }
    }

    long hamming(std::size_t a, std::size_t b) const {
        const std::uint64_t* ra = &bits[a * static_cast<std::size_t>(words_per_cell)];
        const std::uint64_t* rb = &bits[b * static_cast<std::size_t>(words_per_cell)];
        long d = 0;
        for (long w = 0; w < words_per_cell; ++w) d += std::popcount(ra[w] ^ rb[w]);
        return d;
    }
};

double kmeans_size_cv(const std::vector<UnitCell>& dataset, int k, std::uint64_t seed) {
    const long n = static_cast<long>(dataset.size());
    const long d = static_cast<long>(dataset[0].size());

    Eigen::MatrixXd points(n, d);
    for (long j = 0; j < n; ++j)
        for (long p = 0; p < d; ++p)
            points(j, p) = dataset[static_cast<std::size_t>(j)].cells()[static_cast<std::size_t>(p)];

    // Seeded uniform initialization without replacement.
    Rng rng(derive_seed(seed, "kmeans"));
    std::vector<long> order(static_cast<std::size_t>(n));
    for (long j = 0; j < n; ++j) order[static_cast<std::size_t>(j)] = j;
    for (long j = 0; j < k; ++j) {
        const long pick = j + static_cast<long>(rng.below(static_cast<std::uint64_t>(n - j)));
        std::swap(order[static_cast<std::size_t>(j)], order[static_cast<std::size_t>(pick)]);
    }
    Eigen::MatrixXd centroids(k, d);
    for (long c = 0; c < k; ++c) centroids.row(c) = points.row(order[static_cast<std::size_t>(c)]);

    std::vector<long> assign(static_cast<std::size_t>(n), -1);
    std::vector<double> best_dist(static_cast<std::size_t>(n), 0.0);
    std::vector<long> sizes(static_cast<std::size_t>(k), 0);

    constexpr int kMaxIters = 100;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        // Assignment: argmin ||x||^2 - 2 x.c + ||c||^2; the ||x||^2 term is
        // constant per point and dropped. Ties go to the lowest cluster.
        Eigen::VectorXd cnorm = centroids.rowwise().squaredNorm();
        Eigen::MatrixXd dots = points * centroids.transpose(); // n x k
        bool changed = false;
        for (long j = 0; j < n; ++j) {
            long arg = 0;
            double best = cnorm(0) - 2.0 * dots(j, 0);
            for (long c = 1; c < k; ++c) {
                const double v = cnorm(c) - 2.0 * dots(j, c);
                if (v < best) { best = v; arg = c; }
            }
            best_dist[static_cast<std::size_t>(j)] =
                best + points.row(j).squaredNorm();
            if (assign[static_cast<std::size_t>(j)] != arg) {
                assign[static_cast<std::size_t>(j)] = arg;
                changed = true;
            }
        }
        if (!changed && iter > 0) break;

        // Update step.
        centroids.setZero();
        std::fill(sizes.begin(), sizes.end(), 0);
        for (long j = 0; j < n; ++j) {
            centroids.row(assign[static_cast<std::size_t>(j)]) += points.row(j);
            ++sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])];
        }
        std::vector<std::uint8_t> taken(static_cast<std::size_t>(n), 0);
        for (long c = 0; c < k; ++c) {
            if (sizes[static_cast<std::size_t>(c)] > 0) {
                centroids.row(c) /= static_cast<double>(sizes[static_cast<std::size_t>(c)]);
            } else {
                // Re-seed an empty cluster from the farthest point.
                long far = -1;
                double far_d = -1.0;
                for (long j = 0; j < n; ++j) {
                    if (taken[static_cast<std::size_t>(j)]) continue;
                    if (best_dist[static_cast<std::size_t>(j)] > far_d) {
                        far_d = best_dist[static_cast<std::size_t>(j)];
                        far = j;
                    }
                }
                centroids.row(c) = points.row(far);
                taken[static_cast<std::size_t>(far)] = 1;
            }
        }
    }

    std::fill(sizes.begin(), sizes.end(), 0);
    for (long j = 0; j < n; ++j) ++sizes[static_cast<std::size_t>(assign[static_cast<std::size_t>(j)])];
    double mean = static_cast<double>(n) / k;
    double var = 0.0;
    for (long c = 0; c < k; ++c) {
        const double dlt = sizes[static_cast<std::size_t>(c)] - mean;
        var += dlt * dlt;
    }
    var /= k;
    return std::sqrt(var) / mean;
}

} // namespace

DiversityReport diversity_stats(const std::vector<UnitCell>& dataset, int k,
                                std::uint64_t seed, long max_pairs) {
    const long n = static_cast<long>(dataset.size());
    if (n < 2) throw ArgumentError("diversity_stats: need at least 2 cells");
    if (k < 1 || k > n) throw ArgumentError("diversity_stats: k must be in [1, dataset size]");
    for (const auto& c : dataset)
        if (!c.same_shape(dataset[0]))
            throw ArgumentError("diversity_stats: cells must share one shape");

    PackedCells packed(dataset);
    const long total_pairs = n * (n - 1) / 2;
    double sum = 0.0;
    long used = 0;
    if (total_pairs <= max_pairs) {
        for (long a = 0; a < n; ++a)
            for (long b = a + 1; b < n; ++b) {
                sum += std::sqrt(static_cast<double>(
                    packed.hamming(static_cast<std::size_t>(a), static_cast<std::size_t>(b))));
                ++used;
            }
    } else {
        Rng rng(derive_seed(seed, "pairs"));
        for (long t = 0; t < max_pairs; ++t) {
            const long a = static_cast<long>(rng.below(static_cast<std::uint64_t>(n)));
            long b = static_cast<long>(rng.below(static_cast<std::uint64_t>(n - 1)));
            if (b >= a) ++b;
            sum += std::sqrt(static_cast<double>(
                packed.hamming(static_cast<std::size_t>(a), static_cast<std::size_t>(b))));
            ++used;
        }
    }

    DiversityReport report;
    report.mean_pairwise_distance = sum / static_cast<double>(used);
    report.normalized_score =
        report.mean_pairwise_distance / std::sqrt(static_cast<double>(dataset[0].size()));
    report.k = k;
    report.kmeans_cluster_size_cv = kmeans_size_cv(dataset, k, seed);
    return report;
}

} // namespace mks::geometry
