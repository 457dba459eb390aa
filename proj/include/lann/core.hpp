#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lann {

enum class ErrorKind {
    InvalidDimension,
    DegenerateMetric,
    InsufficientPoints,
    InvalidDataset,
    InvalidArgument,
    Io,
    Parse,
};

/// Every failure raised by the library. `kind()` lets callers (the CLI in
/// particular) map errors to exit codes without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorKind::InvalidDimension, "matrix data size does not match shape");
        }
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    const std::vector<double>& data() const noexcept { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

using Label = std::size_t;

/// m points in R^n with class ids in {0..L-1}. Construction validates the
/// invariants, so any LabeledDataset in hand is well formed.
class LabeledDataset {
public:
    LabeledDataset(Matrix points, std::vector<Label> labels, std::size_t num_classes,
                   std::vector<std::string> feature_names = {},
                   std::vector<std::string> class_names = {})
        : points_(std::move(points)),
          labels_(std::move(labels)),
          num_classes_(num_classes),
          feature_names_(std::move(feature_names)),
          class_names_(std::move(class_names)) {
        validate();
    }

    std::size_t size() const noexcept { return points_.rows(); }
    std::size_t dim() const noexcept { return points_.cols(); }
    std::size_t num_classes() const noexcept { return num_classes_; }

    const Matrix& points() const noexcept { return points_; }
    std::span<const double> point(std::size_t i) const { return points_.row(i); }
    const std::vector<Label>& labels() const noexcept { return labels_; }
    Label label(std::size_t i) const { return labels_[i]; }

    const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }
    /// Original label text per class id; empty when labels were numeric from the start.
    const std::vector<std::string>& class_names() const noexcept { return class_names_; }

    /// Rows `indices` as a new dataset (keeps class count and names).
    LabeledDataset subset(std::span<const std::size_t> indices) const {
        Matrix pts(indices.size(), dim());
        std::vector<Label> lbl;
        lbl.reserve(indices.size());
        for (std::size_t r = 0; r < indices.size(); ++r) {
            auto src = point(indices[r]);
            std::copy(src.begin(), src.end(), pts.row(r).begin());
            lbl.push_back(labels_[indices[r]]);
        }
        return unchecked(std::move(pts), std::move(lbl), num_classes_, feature_names_, class_names_);
    }

    /// Same labels and names, new feature values (e.g. after z-scoring).
    LabeledDataset with_points(Matrix points) const {
        if (points.rows() != size() || points.cols() != dim()) {
            throw Error(ErrorKind::InvalidDimension, "replacement points have a different shape");
        }
        return LabeledDataset(std::move(points), labels_, num_classes_, feature_names_, class_names_);
    }

    friend bool operator==(const LabeledDataset&, const LabeledDataset&) = default;

private:
    struct NoCheck {};
    LabeledDataset(NoCheck, Matrix points, std::vector<Label> labels, std::size_t num_classes,
                   std::vector<std::string> feature_names, std::vector<std::string> class_names)
        : points_(std::move(points)),
          labels_(std::move(labels)),
          num_classes_(num_classes),
          feature_names_(std::move(feature_names)),
          class_names_(std::move(class_names)) {}

    // A training split may legitimately miss a class entirely, so subsets
    // only re-check the structural invariants.
    static LabeledDataset unchecked(Matrix points, std::vector<Label> labels, std::size_t num_classes,
                                    std::vector<std::string> feature_names,
                                    std::vector<std::string> class_names) {
        LabeledDataset d(NoCheck{}, std::move(points), std::move(labels), num_classes,
                         std::move(feature_names), std::move(class_names));
        d.validate_structure();
        return d;
    }

    void validate_structure() const {
        if (points_.rows() == 0) throw Error(ErrorKind::InvalidDataset, "dataset has no points");
        if (points_.cols() == 0) throw Error(ErrorKind::InvalidDimension, "dataset has no features");
        if (labels_.size() != points_.rows()) {
            throw Error(ErrorKind::InvalidDataset, "label count does not match point count");
        }
        if (num_classes_ < 2) throw Error(ErrorKind::InvalidDataset, "dataset needs at least two classes");
        for (Label y : labels_) {
            if (y >= num_classes_) throw Error(ErrorKind::InvalidDataset, "label out of range");
        }
        for (double v : points_.data()) {
            if (!std::isfinite(v)) throw Error(ErrorKind::InvalidDataset, "non-finite feature value");
        }
        if (!feature_names_.empty() && feature_names_.size() != points_.cols()) {
            throw Error(ErrorKind::InvalidDimension, "feature name count does not match dimension");
        }
    }

    void validate() const {
        validate_structure();
        std::vector<bool> seen(num_classes_, false);
        for (Label y : labels_) seen[y] = true;
        for (std::size_t c = 0; c < num_classes_; ++c) {
            if (!seen[c]) {
                throw Error(ErrorKind::InvalidDataset, "class " + std::to_string(c) + " has no points");
            }
        }
    }

    Matrix points_;
    std::vector<Label> labels_;
    std::size_t num_classes_ = 0;
    std::vector<std::string> feature_names_;
    std::vector<std::string> class_names_;
};

/// Unsquared diagonal weights lambda; the metric matrix is diag(lambda^2).
/// Invariant: sum(lambda^2) == n.
class DiagonalMetric {
public:
    std::size_t dim() const noexcept { return weights_.size(); }
    std::span<const double> weights() const noexcept { return weights_; }
    double operator[](std::size_t l) const { return weights_[l]; }

    /// Adopts weights that already satisfy the normalization (e.g. read back
    /// from a model file) without rescaling them.
    static DiagonalMetric from_normalized(std::vector<double> weights, double rel_tol = 1e-9) {
        if (weights.empty()) throw Error(ErrorKind::InvalidDimension, "metric dimension must be at least 1");
        double sq = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w)) throw Error(ErrorKind::DegenerateMetric, "metric weight is not finite");
            sq += w * w;
        }
        const double n = static_cast<double>(weights.size());
        if (std::abs(sq - n) > rel_tol * n) {
            throw Error(ErrorKind::DegenerateMetric, "metric weights are not normalized");
        }
        return DiagonalMetric(std::move(weights));
    }

    friend bool operator==(const DiagonalMetric&, const DiagonalMetric&) = default;

private:
    explicit DiagonalMetric(std::vector<double> w) : weights_(std::move(w)) {}
    friend DiagonalMetric identity_metric(std::size_t n);
    friend DiagonalMetric normalize_metric(std::span<const double> weights);

    std::vector<double> weights_;
};

inline DiagonalMetric identity_metric(std::size_t n) {
    if (n == 0) throw Error(ErrorKind::InvalidDimension, "metric dimension must be at least 1");
    return DiagonalMetric(std::vector<double>(n, 1.0));
}

/// Rescales |w| so that sum(lambda^2) == n. The sign is dropped because the
/// metric only depends on lambda^2.
inline DiagonalMetric normalize_metric(std::span<const double> weights) {
    if (weights.empty()) throw Error(ErrorKind::InvalidDimension, "metric dimension must be at least 1");
    // Scale by the largest magnitude first so the sum of squares cannot
    // overflow or underflow.
    double peak = 0.0;
    for (double w : weights) {
        if (!std::isfinite(w)) throw Error(ErrorKind::DegenerateMetric, "metric weight is not finite");
        peak = std::max(peak, std::abs(w));
    }
    if (peak == 0.0) throw Error(ErrorKind::DegenerateMetric, "metric weights are all zero");

    std::vector<double> out(weights.size());
    double sq = 0.0;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out[l] = std::abs(weights[l]) / peak;
        sq += out[l] * out[l];
    }
    const double c = std::sqrt(static_cast<double>(weights.size()) / sq);
    for (double& v : out) v *= c;
    return DiagonalMetric(std::move(out));
}

struct Hyperparams {
    std::size_t k = 5;
    double beta = 1.0;
    double learning_rate = 0.01;
    std::size_t epochs = 50;
    double epsilon = 1e-8;
    std::uint64_t seed = 42;

    void validate() const {
        if (k < 1) throw Error(ErrorKind::InvalidArgument, "k must be at least 1");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
            throw Error(ErrorKind::InvalidArgument, "learning rate must be positive");
        }
        if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
            throw Error(ErrorKind::InvalidArgument, "epsilon must be positive");
        }
    }
};

/// Per-feature z-score parameters, fitted on training data only.
struct Scaler {
    std::vector<double> mean;
    std::vector<double> stddev;

    std::size_t dim() const noexcept { return mean.size(); }

    std::vector<double> apply(std::span<const double> x) const {
        if (x.size() != dim()) throw Error(ErrorKind::InvalidDimension, "query dimension does not match scaler");
        std::vector<double> out(x.size());
        for (std::size_t l = 0; l < x.size(); ++l) out[l] = (x[l] - mean[l]) / stddev[l];
        return out;
    }

    friend bool operator==(const Scaler&, const Scaler&) = default;
};

/// A fitted model: z-scored training set, one metric per training point,
/// and the scaler that maps raw queries into the training space.
struct LannModel {
    LabeledDataset dataset;
    std::vector<DiagonalMetric> metrics;
    Hyperparams hyper;
    Scaler scaler;

    void validate() const {
        if (metrics.size() != dataset.size()) {
            throw Error(ErrorKind::InvalidDataset, "metric count does not match training set size");
        }
        for (const auto& m : metrics) {
            if (m.dim() != dataset.dim()) throw Error(ErrorKind::InvalidDimension, "metric dimension mismatch");
        }
        if (scaler.dim() != dataset.dim()) throw Error(ErrorKind::InvalidDimension, "scaler dimension mismatch");
        for (double s : scaler.stddev) {
            if (!(s > 0.0)) throw Error(ErrorKind::InvalidDataset, "scaler stddev must be positive");
        }
    }
};

/// Non-negative feature relevances summing to one.
struct RelevanceProfile {
    std::vector<double> relevances;
};

namespace detail {

/// lambda^2 / sum(lambda^2): the metric's relevance distribution.
inline std::vector<double> normalized_relevance(const DiagonalMetric& metric) {
    std::vector<double> r(metric.dim());
    double total = 0.0;
    for (std::size_t l = 0; l < r.size(); ++l) {
        r[l] = metric[l] * metric[l];
        total += r[l];
    }
    for (double& v : r) v /= total;
    return r;
}

inline void renormalize(std::vector<double>& v) {
    double total = 0.0;
    for (double x : v) total += x;
    for (double& x : v) x /= total;
}

}  // namespace detail

}  // namespace lann
