#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <vector>

#include "mks/grid.hpp"

namespace mks::stats {

// Ordered local-state pair (h, h') of a 2-point correlation set.
struct PhasePair {
    int first = 1;
    int second = 1;
    friend auto operator<=>(const PhasePair&, const PhasePair&) = default;
};

// Periodic 2-point statistics over shift vectors r, stored flattened in
// canonical (unshifted) FFT order: index = r_y * width + r_x.
struct CorrelationMap {
    int width = 0;
    int height = 0;
    PhasePair pair{1, 1};
    Eigen::ArrayXd values;

    double at(int rx, int ry) const { return values[static_cast<long>(ry) * width + rx]; }
};

// FFT form f = (1/|S|) IFFT(conj(FFT(a)) * FFT(b)); the r = 0 bin is written
// from the exact pixel count. Reuses plans across calls of one size.
class CorrelationEngine {
public:
    CorrelationEngine(int width, int height);
    ~CorrelationEngine();
    CorrelationEngine(const CorrelationEngine&) = delete;
    CorrelationEngine& operator=(const CorrelationEngine&) = delete;

    CorrelationMap compute(const PhaseMask& a, const PhaseMask& b);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

CorrelationMap two_point_fft(const PhaseMask& a, const PhaseMask& b);

// Quadratic-cost direct double sum with periodic wrap; the independent
// oracle for two_point_fft.
CorrelationMap two_point_direct(const PhaseMask& a, const PhaseMask& b);

// Reorders values so the zero shift sits at (width/2, height/2), for display.
CorrelationMap fftshifted(const CorrelationMap& map);

// Which correlation sets feed the feature matrix.
enum class Combination { S, SI, SIX };
const std::vector<PhasePair>& combination_pairs(Combination c);
Combination combination_from_string(const std::string& tag); // "s", "si", "six"
std::string to_string(Combination c);

// All correlation maps needed for `c`, in feature order (f11[, f22[, f12]]).
std::vector<CorrelationMap> cell_correlations(const UnitCell& cell, Combination c,
                                              CorrelationEngine& engine);

// Per-pair ensemble mean/std over all spatial bins and cells; sigma^{11} is
// the rescale reference.
struct RescaleModel {
    struct PairStats {
        double mean = 0.0;
        double stddev = 0.0;
        long cells = 0;
    };
    std::map<PhasePair, PairStats> pairs;

    double reference_sigma() const; // sigma^{11}
    // sigma^{11} / sigma^{hh'}; exactly 1 for (1,1). Unknown pair -> error.
    double factor(PhasePair pair) const;
};

// Streaming fit: feed every map of every cell, then finalize.
class RescaleAccumulator {
public:
    void add(const CorrelationMap& map);
    RescaleModel finalize() const; // throws DegenerateEnsembleError on sigma == 0

private:
    struct Welford {
        long count = 0;
        double mean = 0.0;
        double m2 = 0.0;
        long cells = 0;
    };
    std::map<PhasePair, Welford> acc_;
};

RescaleModel fit_rescale(const std::vector<std::vector<CorrelationMap>>& cells);

CorrelationMap apply_rescale(const CorrelationMap& map, const RescaleModel& model);

// One feature row: rescaled maps concatenated in combination order. The
// stride-aware Ref binds rows of a column-major matrix directly.
using FeatureRowRef = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;
void fill_feature_row(const std::vector<CorrelationMap>& maps, Combination c,
                      const RescaleModel& model, FeatureRowRef out);

// J x R matrix, R = pixels * set count; row order follows `cells`.
Eigen::MatrixXd assemble_features(const std::vector<std::vector<CorrelationMap>>& cells,
                                  Combination c, const RescaleModel& model);

// PCA of the centered feature matrix via seeded randomized truncated SVD
// (oversampling 10, 4 power iterations); falls back to an exact SVD when the
// oversampled rank covers the full spectrum.
struct PcaModel {
    Eigen::VectorXd mean;               // length R
    Eigen::MatrixXd basis;              // R x rank, orthonormal columns
    Eigen::VectorXd explained_variance; // non-increasing

    int rank() const { return static_cast<int>(basis.cols()); }
};

PcaModel pca_fit(const Eigen::MatrixXd& features, int n_components, std::uint64_t seed);
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& features);
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& scores);

// Per-column standardization with training statistics (population std).
struct ScoreScaler {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;
};

ScoreScaler fit_score_scaler(const Eigen::MatrixXd& train_scores);
Eigen::MatrixXd apply_score_scaler(const ScoreScaler& scaler, const Eigen::MatrixXd& scores);

struct StandardizedScores {
    Eigen::MatrixXd train;
    Eigen::MatrixXd apply;
    ScoreScaler scaler;
};
StandardizedScores standardize_scores(const Eigen::MatrixXd& train_scores,
                                      const Eigen::MatrixXd& apply_scores);

} // namespace mks::stats
