#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace mks::gpr {

// Kernel hyperparameters in the log domain: positivity for free.
struct Hyperparameters {
    double log_sigma_f = 0.0;
    double log_sigma_n = 0.0;
    Eigen::VectorXd log_lengthscales;

    int dims() const { return static_cast<int>(log_lengthscales.size()); }
    double sigma_f() const { return std::exp(log_sigma_f); }
    double sigma_n() const { return std::exp(log_sigma_n); }
    double lengthscale(int d) const { return std::exp(log_lengthscales[d]); }

    Eigen::VectorXd packed() const;                     // (log_sf, log_sn, log_l...)
    static Hyperparameters unpack(const Eigen::VectorXd& packed);
};

// ARD squared exponential; the noise term applies only when both arguments
// are the same point of a same-set Gram matrix.
double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
              const Hyperparameters& theta, bool same_point);

struct NlmlResult {
    double value = 0.0;
    Eigen::VectorXd grad; // d(nlml)/d(log theta), packed order
    double jitter_used = 0.0;
};

// Negative log marginal likelihood and its analytic log-domain gradient via
// Cholesky. Escalates jitter by decades up to 1e-4 before giving up.
NlmlResult nlml_and_grad(const Hyperparameters& theta, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, double jitter);

struct FitConfig {
    int n_restarts = 5;
    int iterations = 500;
    double learning_rate = 0.05; // Adam step size, cosine-annealed to zero
    double jitter = 1e-10;
    int max_exact_n = 8192; // exact Cholesky GPR, guard the cubic cost
};

struct GprModel {
    Hyperparameters theta;
    Eigen::MatrixXd x;        // N x D training inputs (standardized scores)
    Eigen::VectorXd y;        // mean-shifted targets
    double y_shift = 0.0;
    double jitter_used = 0.0;
    Eigen::MatrixXd chol_lower; // L with L L^T = K(X, X) + jitter I
    Eigen::VectorXd alpha;      // K^{-1} y
};

struct FitReport {
    double best_nlml = 0.0;
    int restarts_attempted = 0;
    int best_restart = -1;
    int iterations = 0;
    double final_grad_norm = 0.0;
    std::vector<double> restart_nlml; // +inf where conditioning failed
};

struct FitResult {
    GprModel model;
    FitReport report;
};

// Factorize K at fixed hyperparameters (jitter ladder applied).
GprModel build_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Hyperparameters& theta, double jitter);

// Adam (cosine-annealed step) from n_restarts seeded initializations;
// restart 0 starts at (l_d = 1, sigma_f = std(y), sigma_n = 0.05 std(y)),
// later restarts perturb each parameter by exp(U[-1, 1]). An optional warm
// start competes alongside the fresh restarts.
FitResult fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
              const FitConfig& config, std::uint64_t seed,
              const Hyperparameters* warm_start = nullptr);

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance; // clamped at zero
};

Prediction predict(const GprModel& model, const Eigen::MatrixXd& x_star);

double mean_absolute_error(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

struct Metrics {
    double mae = 0.0;
    double r2 = 0.0;
    double nmae = 0.0; // mae / range(y_true)
};

// Throws UndefinedMetricError when y_true is constant (r2, nmae) or too short.
Metrics metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

} // namespace mks::gpr
