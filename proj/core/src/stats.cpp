#include "mks/stats.hpp"

#include <Eigen/Dense>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

#include "mks/cell_rng.hpp"
#include "mks/fft_plan.hpp"
#include "mks/geometry.hpp"

namespace mks::stats {

namespace {

std::string pair_name(PhasePair p) {
    std::ostringstream os;
    os << "f" << p.first << p.second;
    return os.str();
}

void check_mask_pair(const PhaseMask& a, const PhaseMask& b) {
    if (a.width() != b.width() || a.height() != b.height())
        throw ArgumentError("two_point: mask dimensions differ");
    if (!is_binary(a.grid) || !is_binary(b.grid))
        throw ArgumentError("two_point: masks must be binary");
}

double exact_zero_shift(const PhaseMask& a, const PhaseMask& b) {
    long dot = 0;
    const auto& va = a.grid.cells();
    const auto& vb = b.grid.cells();
    for (std::size_t i = 0; i < va.size(); ++i) dot += va[i] & vb[i];
    return static_cast<double>(dot) / static_cast<double>(va.size());
}

void clamp_bounds(Eigen::ArrayXd& values) {
    constexpr double tol = 1e-12;
    for (long i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0 && values[i] >= -tol) values[i] = 0.0;
        else if (values[i] > 1.0 && values[i] <= 1.0 + tol) values[i] = 1.0;
    }
}

} // namespace

struct CorrelationEngine::Impl {
    Fft2D fft;
    std::vector<std::complex<double>> ca, cb;
    Impl(int w, int h) : fft(w, h), ca(static_cast<std::size_t>(fft.real_size())),
                         cb(static_cast<std::size_t>(fft.real_size())) {}
};

CorrelationEngine::CorrelationEngine(int width, int height)
    : impl_(std::make_unique<Impl>(width, height)) {}

CorrelationEngine::~CorrelationEngine() = default;

CorrelationMap CorrelationEngine::compute(const PhaseMask& a, const PhaseMask& b) {
    check_mask_pair(a, b);
    auto& im = *impl_;
    const int w = a.width(), h = a.height();
    if (w != im.fft.width() || h != im.fft.height())
        throw ArgumentError("CorrelationEngine: mask size does not match engine size");
    const long n = im.fft.real_size();

    for (long i = 0; i < n; ++i)
        im.ca[static_cast<std::size_t>(i)] = a.grid.cells()[static_cast<std::size_t>(i)];
    im.fft.forward_c2c(im.ca.data(), im.ca.data());
    for (long i = 0; i < n; ++i)
        im.cb[static_cast<std::size_t>(i)] = b.grid.cells()[static_cast<std::size_t>(i)];
    im.fft.forward_c2c(im.cb.data(), im.cb.data());

    for (long i = 0; i < n; ++i)
        im.cb[static_cast<std::size_t>(i)] =
            std::conj(im.ca[static_cast<std::size_t>(i)]) * im.cb[static_cast<std::size_t>(i)];
    im.fft.backward_c2c(im.cb.data(), im.cb.data());

    CorrelationMap map;
    map.width = w;
    map.height = h;
    map.pair = {a.phase_id, b.phase_id};
    map.values.resize(n);
    const double scale = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    double max_imag = 0.0;
    for (long i = 0; i < n; ++i) {
        const auto v = im.cb[static_cast<std::size_t>(i)] * scale;
        max_imag = std::max(max_imag, std::abs(v.imag()));
        map.values[i] = v.real();
    }
    if (max_imag > 1e-10)
        throw NumericalError("two_point_fft: imaginary residue above 1e-10; corrupt mask?");

    clamp_bounds(map.values);
    map.values[0] = exact_zero_shift(a, b);
    return map;
}

CorrelationMap two_point_fft(const PhaseMask& a, const PhaseMask& b) {
    check_mask_pair(a, b);
    CorrelationEngine engine(a.width(), a.height());
    return engine.compute(a, b);
}

CorrelationMap two_point_direct(const PhaseMask& a, const PhaseMask& b) {
    check_mask_pair(a, b);
    const int w = a.width(), h = a.height();
    CorrelationMap map;
    map.width = w;
    map.height = h;
    map.pair = {a.phase_id, b.phase_id};
    map.values = Eigen::ArrayXd::Zero(static_cast<long>(w) * h);
    for (int ry = 0; ry < h; ++ry) {
        for (int rx = 0; rx < w; ++rx) {
            long count = 0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (a.grid.at(x, y) && b.grid.wrap(x + rx, y + ry)) ++count;
            map.values[static_cast<long>(ry) * w + rx] =
                static_cast<double>(count) / (static_cast<double>(w) * h);
        }
    }
    return map;
}

CorrelationMap fftshifted(const CorrelationMap& map) {
    CorrelationMap out = map;
    const int w = map.width, h = map.height;
    const int sx = w / 2, sy = h / 2;
    for (int ry = 0; ry < h; ++ry)
        for (int rx = 0; rx < w; ++rx)
            out.values[static_cast<long>((ry + sy) % h) * w + (rx + sx) % w] =
                map.values[static_cast<long>(ry) * w + rx];
    return out;
}

const std::vector<PhasePair>& combination_pairs(Combination c) {
    static const std::vector<PhasePair> s{{1, 1}};
    static const std::vector<PhasePair> si{{1, 1}, {2, 2}};
    static const std::vector<PhasePair> six{{1, 1}, {2, 2}, {1, 2}};
    switch (c) {
        case Combination::S: return s;
        case Combination::SI: return si;
        default: return six;
    }
}

Combination combination_from_string(const std::string& tag) {
    if (tag == "s") return Combination::S;
    if (tag == "si") return Combination::SI;
    if (tag == "six") return Combination::SIX;
    throw ArgumentError("unknown combination tag '" + tag + "' (use s, si, six)");
}

std::string to_string(Combination c) {
    switch (c) {
        case Combination::S: return "s";
        case Combination::SI: return "si";
        default: return "six";
    }
}

std::vector<CorrelationMap> cell_correlations(const UnitCell& cell, Combination c,
                                              CorrelationEngine& engine) {
    const PhaseMask solid = geometry::solid_mask(cell);
    std::vector<CorrelationMap> maps;
    maps.push_back(engine.compute(solid, solid));
    if (c == Combination::S) return maps;
    const PhaseMask interface = geometry::extract_interface(cell);
    maps.push_back(engine.compute(interface, interface));
    if (c == Combination::SIX) maps.push_back(engine.compute(solid, interface));
    return maps;
}

double RescaleModel::reference_sigma() const {
    const auto it = pairs.find(PhasePair{1, 1});
    if (it == pairs.end())
        throw ArgumentError("RescaleModel: solid auto-correlation (1,1) not fitted");
    return it->second.stddev;
}

double RescaleModel::factor(PhasePair pair) const {
    if (pair == PhasePair{1, 1}) return 1.0; // the reference set stays unchanged
    const auto it = pairs.find(pair);
    if (it == pairs.end())
        throw ArgumentError("RescaleModel: unknown pair " + pair_name(pair));
    return reference_sigma() / it->second.stddev;
}

void RescaleAccumulator::add(const CorrelationMap& map) {
    auto& w = acc_[map.pair];
    // Per-map Welford pass, merged with Chan's update.
    long count = 0;
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < map.values.size(); ++i) {
        ++count;
        const double x = map.values[i];
        const double d = x - mean;
        mean += d / static_cast<double>(count);
        m2 += d * (x - mean);
    }
    if (w.count == 0) {
        w.count = count;
        w.mean = mean;
        w.m2 = m2;
    } else {
        const double delta = mean - w.mean;
        const double total = static_cast<double>(w.count + count);
        w.m2 += m2 + delta * delta * (static_cast<double>(w.count) * count / total);
        w.mean += delta * (static_cast<double>(count) / total);
        w.count += count;
    }
    ++w.cells;
}

RescaleModel RescaleAccumulator::finalize() const {
    if (acc_.empty())
        throw ArgumentError("fit_rescale: empty ensemble");
    RescaleModel model;
    long cells = -1;
    for (const auto& [pair, w] : acc_) {
        if (cells < 0) cells = w.cells;
        if (w.cells != cells)
            throw ArgumentError("fit_rescale: pair " + pair_name(pair) +
                                " is missing for some cells");
        if (w.cells < 2)
            throw ArgumentError("fit_rescale: need at least 2 cells");
        RescaleModel::PairStats stats;
        stats.mean = w.mean;
        stats.stddev = std::sqrt(w.m2 / static_cast<double>(w.count));
        stats.cells = w.cells;
        if (!(stats.stddev > 0.0))
            throw DegenerateEnsembleError("fit_rescale: zero variance in pair " +
                                          pair_name(pair));
        model.pairs[pair] = stats;
    }
    model.reference_sigma(); // require the (1,1) reference
    return model;
}

RescaleModel fit_rescale(const std::vector<std::vector<CorrelationMap>>& cells) {
    RescaleAccumulator acc;
    for (const auto& maps : cells)
        for (const auto& map : maps) acc.add(map);
    return acc.finalize();
}

CorrelationMap apply_rescale(const CorrelationMap& map, const RescaleModel& model) {
    CorrelationMap out = map;
    const double factor = model.factor(map.pair);
    if (factor != 1.0) out.values *= factor;
    return out;
}

void fill_feature_row(const std::vector<CorrelationMap>& maps, Combination c,
                      const RescaleModel& model, FeatureRowRef out) {
    const auto& pairs = combination_pairs(c);
    if (maps.size() != pairs.size())
        throw ArgumentError("fill_feature_row: map count does not match combination");
    long offset = 0;
    for (std::size_t s = 0; s < pairs.size(); ++s) {
        if (maps[s].pair != pairs[s])
            throw ArgumentError("fill_feature_row: maps are not in combination order");
        const double factor = model.factor(maps[s].pair);
        const long len = maps[s].values.size();
        if (offset + len > out.size())
            throw ArgumentError("fill_feature_row: output row too short");
        out.segment(offset, len) = (maps[s].values * factor).matrix().transpose();
        offset += len;
    }
    if (offset != out.size())
        throw ArgumentError("fill_feature_row: output row length mismatch");
}

Eigen::MatrixXd assemble_features(const std::vector<std::vector<CorrelationMap>>& cells,
                                  Combination c, const RescaleModel& model) {
    if (cells.empty()) throw ArgumentError("assemble_features: empty dataset");
    const long per_map = cells[0][0].values.size();
    const long r = per_map * static_cast<long>(combination_pairs(c).size());
    Eigen::MatrixXd features(static_cast<long>(cells.size()), r);
    for (std::size_t j = 0; j < cells.size(); ++j)
        fill_feature_row(cells[j], c, model, features.row(static_cast<long>(j)));
    return features;
}

namespace {

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
    return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

// Flip each basis column so its largest-magnitude entry is positive.
void canonical_signs(Eigen::MatrixXd& basis) {
    for (long c = 0; c < basis.cols(); ++c) {
        long arg = 0;
        basis.col(c).cwiseAbs().maxCoeff(&arg);
        if (basis(arg, c) < 0.0) basis.col(c) = -basis.col(c);
    }
}

} // namespace

PcaModel pca_fit(const Eigen::MatrixXd& features, int n_components, std::uint64_t seed) {
    const long j = features.rows(), r = features.cols();
    const long max_rank = std::min(j - 1, r);
    if (n_components < 1 || n_components > max_rank)
        throw ArgumentError("pca_fit: n_components must be in [1, min(J-1, R)]");

    PcaModel model;
    model.mean = features.colwise().mean();
    Eigen::MatrixXd centered = features.rowwise() - model.mean.transpose();

    constexpr int kOversample = 10;
    constexpr int kPowerIters = 4;
    const long sketch = n_components + kOversample;

    Eigen::VectorXd singular;
    if (sketch >= std::min(j, r)) {
        Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
        model.basis = svd.matrixV().leftCols(n_components);
        singular = svd.singularValues().head(n_components);
    } else {
        Rng rng(derive_seed(seed, "pca"));
        Eigen::MatrixXd omega(r, sketch);
        for (long c = 0; c < sketch; ++c)
            for (long i = 0; i < r; ++i) omega(i, c) = rng.normal();

        Eigen::MatrixXd q = thin_q(centered * omega);
        for (int it = 0; it < kPowerIters; ++it) {
            Eigen::MatrixXd z = thin_q(centered.transpose() * q);
            q = thin_q(centered * z);
        }
        Eigen::MatrixXd b = q.transpose() * centered; // sketch x R
        Eigen::BDCSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinV);
        model.basis = svd.matrixV().leftCols(n_components);
        singular = svd.singularValues().head(n_components);
    }

    canonical_signs(model.basis);
    model.explained_variance =
        singular.array().square() / static_cast<double>(j - 1);
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& features) {
    if (features.cols() != model.mean.size())
        throw ArgumentError("pca_transform: feature dimension mismatch");
    return (features.rowwise() - model.mean.transpose()) * model.basis;
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& scores) {
    if (scores.cols() != model.basis.cols())
        throw ArgumentError("pca_reconstruct: score dimension mismatch");
    return (scores * model.basis.transpose()).rowwise() + model.mean.transpose();
}

ScoreScaler fit_score_scaler(const Eigen::MatrixXd& train_scores) {
    ScoreScaler scaler;
    scaler.mean = train_scores.colwise().mean();
    Eigen::MatrixXd centered = train_scores.rowwise() - scaler.mean.transpose();
    scaler.stddev =
        (centered.array().square().colwise().mean()).sqrt().matrix();
    for (long c = 0; c < scaler.stddev.size(); ++c) {
        if (!(scaler.stddev[c] > 0.0)) {
            std::ostringstream os;
            os << "standardize_scores: PC column " << c + 1 << " has zero variance";
            throw NumericalError(os.str());
        }
    }
    return scaler;
}

Eigen::MatrixXd apply_score_scaler(const ScoreScaler& scaler, const Eigen::MatrixXd& scores) {
    if (scores.cols() != scaler.mean.size())
        throw ArgumentError("apply_score_scaler: column count mismatch");
    return (scores.rowwise() - scaler.mean.transpose()).array().rowwise() /
           scaler.stddev.transpose().array();
}

StandardizedScores standardize_scores(const Eigen::MatrixXd& train_scores,
                                      const Eigen::MatrixXd& apply_scores) {
    StandardizedScores out;
    out.scaler = fit_score_scaler(train_scores);
    out.train = apply_score_scaler(out.scaler, train_scores);
    out.apply = apply_score_scaler(out.scaler, apply_scores);
    return out;
}

} // namespace mks::stats
