#include "mks/active.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "mks/cell_rng.hpp"
#include "mks/errors.hpp"
#include "mks/stats.hpp"

namespace mks::active {

ActiveState init_state(int n_total, int n_init, std::uint64_t seed) {
    if (n_init < 1 || n_init >= n_total)
        throw ArgumentError("init_state: need 1 <= n_init < n_total");
    std::vector<int> order(static_cast<std::size_t>(n_total));
    for (int i = 0; i < n_total; ++i) order[static_cast<std::size_t>(i)] = i;
    Rng rng(derive_seed(seed, "init"));
    for (int i = 0; i < n_init; ++i) {
        const int pick = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(n_total - i)));
        std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(pick)]);
    }
    ActiveState state;
    state.labeled.assign(order.begin(), order.begin() + n_init);
    state.pool.assign(order.begin() + n_init, order.end());
    std::sort(state.pool.begin(), state.pool.end());
    return state;
}

int query_max_variance(const Eigen::VectorXd& pool_variance) {
    if (pool_variance.size() == 0)
        throw StateError("query_max_variance: empty pool");
    int arg = 0;
    double best = pool_variance[0];
    for (int i = 1; i < pool_variance.size(); ++i) {
        if (pool_variance[i] > best) { // strict: ties keep the lowest position
            best = pool_variance[i];
            arg = i;
        }
    }
    return arg;
}

int query_max_variance(const gpr::GprModel& model, const Eigen::MatrixXd& pool_features) {
    if (pool_features.rows() == 0)
        throw StateError("query_max_variance: empty pool");
    return query_max_variance(gpr::predict(model, pool_features).variance);
}

bool stopping_met(const std::vector<double>& mae_history, const StopRule& rule) {
    const int q = rule.window;
    if (q < 1) throw ArgumentError("stopping_met: window must be >= 1");
    if (!(rule.epsilon > 0.0)) throw ArgumentError("stopping_met: epsilon must be > 0");
    if (static_cast<int>(mae_history.size()) < q + 1) return false;
    const std::size_t last = mae_history.size() - 1;
    double total = 0.0;
    for (int i = 0; i < q; ++i) {
        const double prev = mae_history[last - static_cast<std::size_t>(i) - 1];
        const double curr = mae_history[last - static_cast<std::size_t>(i)];
        if (prev == 0.0) return true; // already at zero error: converged
        total += std::abs((curr - prev) / prev);
    }
    return total / q < rule.epsilon;
}

namespace {

struct LoopContext {
    const Eigen::MatrixXd& features;
    const RunConfig& config;
    bool benchmark;
    const Eigen::VectorXd* labels = nullptr;
    const LabelOracle* oracle = nullptr;
};

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<long>(idx.size()), m.cols());
    for (std::size_t i = 0; i < idx.size(); ++i)
        out.row(static_cast<long>(i)) = m.row(idx[i]);
    return out;
}

RunResult run_loop(const LoopContext& ctx) {
    const auto& cfg = ctx.config;
    const int n_total = static_cast<int>(ctx.features.rows());
    if (cfg.rule.budget < cfg.n_init)
        throw ArgumentError("run: budget must be >= n_init");
    if (cfg.rule.budget > n_total)
        throw ArgumentError("run: budget exceeds the dataset size");

    RunResult result;
    result.state = init_state(n_total, cfg.n_init, cfg.seed);
    result.curve.seed = cfg.seed;
    auto& labeled = result.state.labeled;
    auto& pool = result.state.pool;

    // Ensemble-wide standardization by default; pool-based sampling has all
    // features up front. refresh_scaler refits on the labeled set instead.
    stats::ScoreScaler scaler = stats::fit_score_scaler(ctx.features);

    std::vector<double> known_labels(static_cast<std::size_t>(n_total), 0.0);
    if (ctx.benchmark)
        for (int i = 0; i < n_total; ++i) known_labels[static_cast<std::size_t>(i)] = (*ctx.labels)[i];
    else
        for (int idx : labeled) known_labels[static_cast<std::size_t>(idx)] = (*ctx.oracle)(idx);

    std::vector<double> stop_history;
    gpr::Hyperparameters warm;
    bool have_warm = false;

    int iteration = 0;
    while (true) {
        if (cfg.refresh_scaler)
            scaler = stats::fit_score_scaler(rows_of(ctx.features, labeled));
        const Eigen::MatrixXd x_train =
            stats::apply_score_scaler(scaler, rows_of(ctx.features, labeled));
        Eigen::VectorXd y_train(static_cast<long>(labeled.size()));
        for (std::size_t i = 0; i < labeled.size(); ++i)
            y_train[static_cast<long>(i)] = known_labels[static_cast<std::size_t>(labeled[i])];

        gpr::FitConfig fit_cfg = cfg.fit;
        std::uint64_t fit_seed = derive_seed(cfg.seed, "fit");
        const gpr::Hyperparameters* warm_ptr = nullptr;
        if (have_warm) {
            // Previous optimum plus one fresh seeded restart.
            fit_cfg.n_restarts = 1;
            if (cfg.warm_iterations > 0) fit_cfg.iterations = cfg.warm_iterations;
            fit_seed = derive_seed(fit_seed, static_cast<std::uint64_t>(iteration));
            warm_ptr = &warm;
        }
        gpr::FitResult fitted = gpr::fit(x_train, y_train, fit_cfg, fit_seed, warm_ptr);
        warm = fitted.model.theta;
        have_warm = true;

        IterationRow row;
        row.iteration = iteration;
        row.n_labeled = static_cast<int>(labeled.size());

        Eigen::VectorXd pool_variance;
        if (!pool.empty()) {
            const Eigen::MatrixXd x_pool =
                stats::apply_score_scaler(scaler, rows_of(ctx.features, pool));
            const gpr::Prediction pred = gpr::predict(fitted.model, x_pool);
            pool_variance = pred.variance;
            row.max_pool_std = std::sqrt(pred.variance.maxCoeff());
            if (ctx.benchmark) {
                Eigen::VectorXd y_pool(static_cast<long>(pool.size()));
                for (std::size_t i = 0; i < pool.size(); ++i)
                    y_pool[static_cast<long>(i)] = known_labels[static_cast<std::size_t>(pool[i])];
                row.pool_mae = gpr::mean_absolute_error(y_pool, pred.mean);
            } else {
                row.pool_mae = std::numeric_limits<double>::quiet_NaN();
            }
        }
        if (iteration > 0)
            row.chosen_index = labeled.back();

        stop_history.push_back(ctx.benchmark ? row.pool_mae : row.max_pool_std);
        const bool stop = stopping_met(stop_history, cfg.rule);
        row.stopped = stop;
        result.curve.rows.push_back(row);

        if (stop || static_cast<int>(labeled.size()) >= cfg.rule.budget || pool.empty()) {
            result.model = std::move(fitted.model);
            break;
        }

        int chosen_global = -1;
        if (ctx.benchmark) {
            const int pos = query_max_variance(pool_variance);
            chosen_global = pool[static_cast<std::size_t>(pos)];
            pool.erase(pool.begin() + pos);
        } else {
            // Walk candidates in variance order; skip-and-log oracle failures.
            std::vector<int> ranked(pool.size());
            for (std::size_t i = 0; i < pool.size(); ++i) ranked[i] = static_cast<int>(i);
            std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
                if (pool_variance[a] != pool_variance[b])
                    return pool_variance[a] > pool_variance[b];
                return a < b;
            });
            std::vector<int> failed;
            for (int pos : ranked) {
                const int global = pool[static_cast<std::size_t>(pos)];
                try {
                    known_labels[static_cast<std::size_t>(global)] = (*ctx.oracle)(global);
                    chosen_global = global;
                    break;
                } catch (const std::exception&) {
                    failed.push_back(global);
                    result.skipped.push_back(global);
                }
            }
            std::vector<int> next;
            next.reserve(pool.size());
            for (int idx : pool)
                if (idx != chosen_global &&
                    std::find(failed.begin(), failed.end(), idx) == failed.end())
                    next.push_back(idx);
            pool = std::move(next);
            if (chosen_global < 0) {
                result.model = std::move(fitted.model);
                break; // every remaining candidate failed to label
            }
        }
        labeled.push_back(chosen_global);
        ++iteration;
    }
    return result;
}

} // namespace

RunResult run(const Eigen::MatrixXd& features, const Eigen::VectorXd& labels,
              const RunConfig& config) {
    if (features.rows() != labels.size())
        throw ArgumentError("run: features rows and labels length differ");
    LoopContext ctx{features, config, true, &labels, nullptr};
    return run_loop(ctx);
}

RunResult run(const Eigen::MatrixXd& features, const LabelOracle& oracle,
              const RunConfig& config) {
    LoopContext ctx{features, config, false, nullptr, &oracle};
    return run_loop(ctx);
}

AggregatedCurve repeat_runs(int n_reps, std::uint64_t base_seed,
                            const Eigen::MatrixXd& features,
                            const Eigen::VectorXd& labels, const RunConfig& config,
                            int jobs) {
    if (n_reps < 1) throw ArgumentError("repeat_runs: n_reps must be >= 1");
    std::vector<LearningCurve> curves(static_cast<std::size_t>(n_reps));

    auto work = [&](int begin, int end) {
        for (int rep = begin; rep < end; ++rep) {
            RunConfig cfg = config;
            cfg.seed = derive_seed(base_seed, static_cast<std::uint64_t>(rep));
            RunResult r = run(features, labels, cfg);
            r.curve.repetition = rep;
            curves[static_cast<std::size_t>(rep)] = std::move(r.curve);
        }
    };
    jobs = std::max(1, std::min(jobs, n_reps));
    if (jobs == 1) {
        work(0, n_reps);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) {
            const int begin = static_cast<int>(static_cast<long>(n_reps) * t / jobs);
            const int end = static_cast<int>(static_cast<long>(n_reps) * (t + 1) / jobs);
            pool.emplace_back(work, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    AggregatedCurve agg;
    std::size_t max_rows = 0;
    for (const auto& c : curves) max_rows = std::max(max_rows, c.rows.size());
    for (std::size_t i = 0; i < max_rows; ++i) {
        double sum_mae = 0, sum_mae2 = 0, sum_std = 0, sum_std2 = 0, sum_n = 0;
        int active = 0;
        for (const auto& c : curves) {
            // Carry the final row of exhausted runs.
            const IterationRow& row = i < c.rows.size() ? c.rows[i] : c.rows.back();
            if (i < c.rows.size()) ++active;
            sum_mae += row.pool_mae;
            sum_mae2 += row.pool_mae * row.pool_mae;
            sum_std += row.max_pool_std;
            sum_std2 += row.max_pool_std * row.max_pool_std;
            sum_n += row.n_labeled;
        }
        const double inv = 1.0 / n_reps;
        agg.iteration.push_back(static_cast<int>(i));
        agg.mean_n_labeled.push_back(sum_n * inv);
        agg.mean_mae.push_back(sum_mae * inv);
        agg.std_mae.push_back(
            std::sqrt(std::max(0.0, sum_mae2 * inv - sum_mae * inv * sum_mae * inv)));
        agg.mean_max_std.push_back(sum_std * inv);
        agg.std_max_std.push_back(
            std::sqrt(std::max(0.0, sum_std2 * inv - sum_std * inv * sum_std * inv)));
        agg.active_runs.push_back(active);
    }
    agg.curves = std::move(curves);
    return agg;
}

} // namespace mks::active
