#pragma once

#include <cstdint>
#include <vector>

#include "mks/grid.hpp"

namespace mks::geometry {

// Periodic zero-mean Gaussian random field with a squared-exponential
// spectral envelope, synthesized from independent complex Gaussian
// coefficients with Hermitian symmetry. Output is normalized to zero sample
// mean and unit sample variance; deterministic for a fixed seed.
RealField sample_gaussian_field(std::uint64_t seed, int width, int height,
                                double correlation_length);

// Solid where field >= threshold (tie rule: >= means solid).
UnitCell binarize(const RealField& field, double threshold);

// Every boundary row/column must reach the given solid fraction; optionally
// the solid phase must form a single 4-connected component under periodic
// wrap (no solid pixels counts as not connected).
bool boundary_connectivity_ok(const UnitCell& cell, double min_boundary_fraction,
                              bool require_connected);

// 2w x 2h cell: tile top-left, horizontal mirror top-right, vertical mirror
// bottom-left, double mirror bottom-right.
UnitCell mirror_periodic(const UnitCell& tile);

struct GenConfig {
    int tile_width = 48;
    int tile_height = 48;
    double correlation_length = 8.0;
    double density_min = 0.30;
    double density_max = 0.68;
    double min_boundary_fraction = 0.1;
    bool require_connected = true;
    // Stall detection: error out if fewer than min_acceptance_rate of the
    // first trial_budget trials for any one sample are accepted.
    int trial_budget = 1000;
    double min_acceptance_rate = 0.01;
};

// Rejection-sampled dataset of mirrored (2*tile) x (2*tile) cells whose
// relative density lands in [density_min, density_max]. Pure function of
// (count, seed, config); per-sample derived seeds keep it order-independent.
std::vector<UnitCell> generate_dataset(int count, std::uint64_t seed,
                                       const GenConfig& config = {});

// Interface local state h=2: void pixels whose periodic 5-point (von Neumann
// + center) solid count is positive.
PhaseMask extract_interface(const UnitCell& cell);

// The cell itself viewed as the solid local state h=1.
PhaseMask solid_mask(const UnitCell& cell);

struct DiversityReport {
    double mean_pairwise_distance = 0.0; // pixel-count units
    double normalized_score = 0.0;       // mean / sqrt(width*height)
    double kmeans_cluster_size_cv = 0.0;
    int k = 0;
};

// Mean Euclidean distance between flattened binary images over all pairs
// (uniformly subsampled to max_pairs when the full count exceeds it), plus
// the coefficient of variation of seeded Lloyd k-means cluster sizes.
DiversityReport diversity_stats(const std::vector<UnitCell>& dataset, int k,
                                std::uint64_t seed, long max_pairs = 2'000'000);

} // namespace mks::geometry
