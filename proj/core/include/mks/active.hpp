#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mks/gpr.hpp"

namespace mks::active {

struct StopRule {
    int window = 5;        // Q
    double epsilon = 1e-4; // threshold on the mean relative MAE change
    int budget = 0;        // hard cap on labeled points
};

struct ActiveState {
    std::vector<int> labeled; // in acquisition order
    std::vector<int> pool;    // ascending
};

// n_init indices sampled uniformly without replacement (seeded); the rest
// form the candidate pool.
ActiveState init_state(int n_total, int n_init, std::uint64_t seed);

// Position of the maximum predictive variance; ties break to the lowest
// pool position.
int query_max_variance(const Eigen::VectorXd& pool_variance);
int query_max_variance(const gpr::GprModel& model, const Eigen::MatrixXd& pool_features);

// Mean absolute relative change over the last `window` consecutive pairs
// below epsilon. False until the history holds window+1 entries; a zero
// denominator counts as converged.
bool stopping_met(const std::vector<double>& mae_history, const StopRule& rule);

struct IterationRow {
    int iteration = 0; // 0 is the initialization row
    int n_labeled = 0;
    double pool_mae = 0.0;
    double max_pool_std = 0.0;
    int chosen_index = -1; // global dataset index added before this row
    bool stopped = false;
};

struct LearningCurve {
    std::vector<IterationRow> rows;
    int repetition = 0;
    std::uint64_t seed = 0;
};

struct RunConfig {
    int n_init = 10;
    StopRule rule{5, 1e-4, 0};
    gpr::FitConfig fit;           // initial fit and fresh restarts
    int warm_iterations = 0;      // 0 -> fit.iterations for warm-started refits
    bool refresh_scaler = false;  // re-standardize on the labeled set each iteration
    std::uint64_t seed = 0;
};

struct RunResult {
    LearningCurve curve;
    gpr::GprModel model;
    ActiveState state;
    std::vector<int> skipped; // oracle-mode failures
};

// Benchmark mode: every label is known; pool MAE drives the stopping rule.
RunResult run(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
              const RunConfig& config);

// Oracle mode: labels are produced on demand; pool MAE is unavailable, so
// the same sliding-window rule runs on the max pool standard deviation.
// A throwing oracle gets skipped and logged; the next-highest variance
// candidate is queried instead.
using LabelOracle = std::function<double(int index)>;
RunResult run(const Eigen::MatrixXd& features, const LabelOracle& oracle,
              const RunConfig& config);

struct AggregatedCurve {
    std::vector<int> iteration;
    std::vector<double> mean_n_labeled;
    std::vector<double> mean_mae, std_mae;
    std::vector<double> mean_max_std, std_max_std;
    std::vector<int> active_runs; // repetitions not padded at this row
    std::vector<LearningCurve> curves;
};

// Repetitions with derived seeds; rows aligned by iteration, exhausted runs
// padded by carrying their final values (active_runs flags the padding).
AggregatedCurve repeat_runs(int n_reps, std::uint64_t base_seed,
                            const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& labels, const RunConfig& config,
                            int jobs = 1);

} // namespace mks::active
