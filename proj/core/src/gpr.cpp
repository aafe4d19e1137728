#include "mks/gpr.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mks/cell_rng.hpp"
#include "mks/errors.hpp"

namespace mks::gpr {

Eigen::VectorXd Hyperparameters::packed() const {
    Eigen::VectorXd p(2 + log_lengthscales.size());
    p[0] = log_sigma_f;
    p[1] = log_sigma_n;
    p.tail(log_lengthscales.size()) = log_lengthscales;
    return p;
}

Hyperparameters Hyperparameters::unpack(const Eigen::VectorXd& packed) {
    Hyperparameters theta;
    theta.log_sigma_f = packed[0];
    theta.log_sigma_n = packed[1];
    theta.log_lengthscales = packed.tail(packed.size() - 2);
    return theta;
}

double kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& x_prime,
              const Hyperparameters& theta, bool same_point) {
    if (x.size() != theta.dims() || x_prime.size() != theta.dims())
        throw ArgumentError("kernel: input dimension does not match hyperparameters");
    double q = 0.0;
    for (int d = 0; d < theta.dims(); ++d) {
        const double diff = (x[d] - x_prime[d]) / theta.lengthscale(d);
        q += diff * diff;
    }
    const double sf = theta.sigma_f();
    double v = sf * sf * std::exp(-0.5 * q);
    if (same_point) {
        const double sn = theta.sigma_n();
        v += sn * sn;
    }
    return v;
}

namespace {

// Pairwise squared differences per dimension; shared by value and gradient.
std::vector<Eigen::MatrixXd> squared_diffs(const Eigen::MatrixXd& x) {
    const long n = x.rows();
    const int d = static_cast<int>(x.cols());
    std::vector<Eigen::MatrixXd> dsq(static_cast<std::size_t>(d));
    for (int k = 0; k < d; ++k) {
        const auto col = x.col(k);
        dsq[static_cast<std::size_t>(k)] =
            (col.replicate(1, n) - col.transpose().replicate(n, 1)).array().square();
    }
    return dsq;
}

Eigen::MatrixXd se_gram(const Hyperparameters& theta,
                        const std::vector<Eigen::MatrixXd>& dsq, long n) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    for (int d = 0; d < theta.dims(); ++d) {
        const double l = theta.lengthscale(d);
        q += dsq[static_cast<std::size_t>(d)] / (l * l);
    }
    const double sf2 = theta.sigma_f() * theta.sigma_f();
    return (q.array() * -0.5).exp().matrix() * sf2;
}

constexpr double kMaxJitter = 1e-4;

// Cholesky with decade jitter escalation; returns the jitter that worked.
double ladder_llt(Eigen::LLT<Eigen::MatrixXd>& llt, const Eigen::MatrixXd& gram,
                  double noise2, double jitter) {
    const long n = gram.rows();
    double j = jitter > 0.0 ? jitter : 1e-10;
    while (true) {
        Eigen::MatrixXd k = gram;
        k.diagonal().array() += noise2 + j;
        llt.compute(k);
        if (llt.info() == Eigen::Success) return j;
        if (j >= kMaxJitter) {
            std::ostringstream os;
            os << "gpr: Cholesky failed after jitter escalation to " << j
               << " (N = " << n << ")";
            throw NumericalError(os.str());
        }
        j *= 10.0;
    }
}

NlmlResult nlml_impl(const Hyperparameters& theta, const Eigen::MatrixXd& x,
                     const Eigen::VectorXd& y,
                     const std::vector<Eigen::MatrixXd>& dsq, double jitter) {
    const long n = x.rows();
    const int d = theta.dims();
    const Eigen::MatrixXd kse = se_gram(theta, dsq, n);
    const double sn2 = theta.sigma_n() * theta.sigma_n();

    Eigen::LLT<Eigen::MatrixXd> llt;
    NlmlResult result;
    result.jitter_used = ladder_llt(llt, kse, sn2, jitter);

    const Eigen::VectorXd alpha = llt.solve(y);
    double logdet = 0.0;
    for (long i = 0; i < n; ++i) logdet += std::log(llt.matrixLLT()(i, i));
    result.value = 0.5 * y.dot(alpha) + logdet +
                   0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

    // W = alpha alpha^T - K^{-1}; gradient of nlml is -1/2 tr(W dK/dtheta).
    Eigen::MatrixXd w = llt.solve(Eigen::MatrixXd::Identity(n, n));
    w.noalias() -= alpha * alpha.transpose();
    w = -w;

    result.grad.resize(2 + d);
    result.grad[0] = -w.cwiseProduct(kse).sum();           // dK/dlog sf = 2 Kse
    result.grad[1] = -sn2 * w.trace();                     // dK/dlog sn = 2 sn^2 I
    for (int k = 0; k < d; ++k) {
        const double l = theta.lengthscale(k);
        const double t =
            w.cwiseProduct(kse.cwiseProduct(dsq[static_cast<std::size_t>(k)])).sum();
        result.grad[2 + k] = -0.5 * t / (l * l);
    }
    return result;
}

} // namespace

NlmlResult nlml_and_grad(const Hyperparameters& theta, const Eigen::MatrixXd& x,
                         const Eigen::VectorXd& y, double jitter) {
    if (x.rows() != y.size())
        throw ArgumentError("nlml_and_grad: X rows and y length differ");
    if (x.rows() < 1) throw ArgumentError("nlml_and_grad: empty training set");
    if (x.cols() != theta.dims())
        throw ArgumentError("nlml_and_grad: dimension mismatch");
    return nlml_impl(theta, x, y, squared_diffs(x), jitter);
}

GprModel build_model(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                     const Hyperparameters& theta, double jitter) {
    if (x.rows() != y.size())
        throw ArgumentError("build_model: X rows and y length differ");
    if (x.cols() != theta.dims())
        throw ArgumentError("build_model: dimension mismatch");
    GprModel model;
    model.theta = theta;
    model.x = x;
    model.y_shift = y.mean();
    model.y = y.array() - model.y_shift;

    const auto dsq = squared_diffs(x);
    const Eigen::MatrixXd kse = se_gram(theta, dsq, x.rows());
    Eigen::LLT<Eigen::MatrixXd> llt;
    model.jitter_used = ladder_llt(llt, kse, theta.sigma_n() * theta.sigma_n(), jitter);
    model.chol_lower = llt.matrixL();
    model.alpha = llt.solve(model.y);
    return model;
}

namespace {

Hyperparameters fresh_init(const Eigen::VectorXd& y_shifted, int dims, int restart,
                           std::uint64_t seed) {
    const double sd = std::sqrt(y_shifted.squaredNorm() /
                                static_cast<double>(y_shifted.size()));
    const double sf = std::max(sd, 1e-8);
    Hyperparameters theta;
    theta.log_sigma_f = std::log(sf);
    theta.log_sigma_n = std::log(0.05 * sf);
    theta.log_lengthscales = Eigen::VectorXd::Zero(dims);
    if (restart > 0) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(restart)));
        theta.log_sigma_f += rng.uniform(-1.0, 1.0);
        theta.log_sigma_n += rng.uniform(-1.0, 1.0);
        for (int d = 0; d < dims; ++d)
            theta.log_lengthscales[d] += rng.uniform(-1.0, 1.0);
    }
    return theta;
}

struct RestartOutcome {
    bool ok = false;
    Eigen::VectorXd packed;
    double nlml = std::numeric_limits<double>::infinity();
    double grad_norm = 0.0;
};

RestartOutcome adam_minimize(const Eigen::VectorXd& start, const Eigen::MatrixXd& x,
                             const Eigen::VectorXd& y,
                             const std::vector<Eigen::MatrixXd>& dsq,
                             const FitConfig& config) {
    RestartOutcome out;
    Eigen::VectorXd p = start;
    Eigen::VectorXd m = Eigen::VectorXd::Zero(p.size());
    Eigen::VectorXd v = Eigen::VectorXd::Zero(p.size());
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    try {
        for (int t = 1; t <= config.iterations; ++t) {
            const NlmlResult r =
                nlml_impl(Hyperparameters::unpack(p), x, y, dsq, config.jitter);
            const double lr =
                0.5 * config.learning_rate *
                (1.0 + std::cos(std::numbers::pi * (t - 1) / config.iterations));
            m = b1 * m + (1.0 - b1) * r.grad;
            v = b2 * v + (1.0 - b2) * r.grad.cwiseProduct(r.grad);
            const double c1 = 1.0 - std::pow(b1, t);
            const double c2 = 1.0 - std::pow(b2, t);
            p -= lr * (m / c1).cwiseQuotient(((v / c2).cwiseSqrt().array() + eps).matrix());
        }
        const NlmlResult fin =
            nlml_impl(Hyperparameters::unpack(p), x, y, dsq, config.jitter);
        out.ok = true;
        out.packed = p;
        out.nlml = fin.value;
        out.grad_norm = fin.grad.norm();
    } catch (const NumericalError&) {
        out.ok = false;
    }
    return out;
}

} // namespace

FitResult fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
              const FitConfig& config, std::uint64_t seed,
              const Hyperparameters* warm_start) {
    const long n = x.rows();
    if (n != y.size()) throw ArgumentError("fit: X rows and y length differ");
    if (n < 2) throw ArgumentError("fit: need at least 2 training points");
    if (n > config.max_exact_n) {
        std::ostringstream os;
        os << "fit: " << n << " rows exceed the exact-GPR cap " << config.max_exact_n
           << "; raise max_exact_n or subsample";
        throw ArgumentError(os.str());
    }
    if (config.n_restarts < 1 && warm_start == nullptr)
        throw ArgumentError("fit: need at least one restart or a warm start");

    const int dims = static_cast<int>(x.cols());
    const double shift = y.mean();
    const Eigen::VectorXd ys = y.array() - shift;
    const auto dsq = squared_diffs(x);

    std::vector<Eigen::VectorXd> starts;
    if (warm_start != nullptr) {
        if (warm_start->dims() != dims)
            throw ArgumentError("fit: warm start dimension mismatch");
        starts.push_back(warm_start->packed());
    }
    for (int r = 0; r < config.n_restarts; ++r)
        starts.push_back(fresh_init(ys, dims, r, seed).packed());

    FitResult result;
    result.report.restarts_attempted = static_cast<int>(starts.size());
    result.report.iterations = config.iterations;
    result.report.restart_nlml.resize(starts.size(),
                                      std::numeric_limits<double>::infinity());

    RestartOutcome best;
    int best_index = -1;
    for (std::size_t r = 0; r < starts.size(); ++r) {
        const RestartOutcome out = adam_minimize(starts[r], x, ys, dsq, config);
        result.report.restart_nlml[r] = out.ok
            ? out.nlml : std::numeric_limits<double>::infinity();
        if (out.ok && out.nlml < best.nlml) {
            best = out;
            best_index = static_cast<int>(r);
        }
    }
    if (best_index < 0)
        throw NumericalError("fit: every restart failed Cholesky conditioning");

    result.report.best_nlml = best.nlml;
    result.report.best_restart = best_index;
    result.report.final_grad_norm = best.grad_norm;
    result.model = build_model(x, y, Hyperparameters::unpack(best.packed), config.jitter);
    return result;
}

Prediction predict(const GprModel& model, const Eigen::MatrixXd& x_star) {
    if (x_star.cols() != model.x.cols())
        throw ArgumentError("predict: input dimension mismatch");
    const long n = model.x.rows();
    const long m = x_star.rows();
    const int d = model.theta.dims();

    Eigen::MatrixXd kstar(n, m);
    Eigen::VectorXd inv_l2(d);
    for (int k = 0; k < d; ++k) {
        const double l = model.theta.lengthscale(k);
        inv_l2[k] = 1.0 / (l * l);
    }
    const double sf2 = model.theta.sigma_f() * model.theta.sigma_f();
    for (long j = 0; j < m; ++j) {
        for (long i = 0; i < n; ++i) {
            double q = 0.0;
            for (int k = 0; k < d; ++k) {
                const double diff = model.x(i, k) - x_star(j, k);
                q += diff * diff * inv_l2[k];
            }
            kstar(i, j) = sf2 * std::exp(-0.5 * q);
        }
    }

    Prediction pred;
    pred.mean = kstar.transpose() * model.alpha;
    pred.mean.array() += model.y_shift;

    const Eigen::MatrixXd v =
        model.chol_lower.triangularView<Eigen::Lower>().solve(kstar);
    const double sn2 = model.theta.sigma_n() * model.theta.sigma_n();
    pred.variance = (sf2 + sn2) - v.colwise().squaredNorm().transpose().array();
    pred.variance = pred.variance.cwiseMax(0.0);
    return pred;
}

double mean_absolute_error(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size() || y_true.size() < 1)
        throw ArgumentError("mean_absolute_error: length mismatch or empty");
    return (y_true - y_pred).cwiseAbs().mean();
}

Metrics metrics(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    Metrics m;
    m.mae = mean_absolute_error(y_true, y_pred);
    if (y_true.size() < 2)
        throw UndefinedMetricError("metrics: R^2 needs at least 2 samples");
    const double range = y_true.maxCoeff() - y_true.minCoeff();
    if (!(range > 0.0))
        throw UndefinedMetricError("metrics: y_true is constant; R^2 and nMAE undefined");
    const double ss_res = (y_true - y_pred).squaredNorm();
    const double ss_tot = (y_true.array() - y_true.mean()).matrix().squaredNorm();
    m.r2 = 1.0 - ss_res / ss_tot;
    m.nmae = m.mae / range;
    return m;
}

} // namespace mks::gpr
