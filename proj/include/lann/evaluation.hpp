#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lann/core.hpp"
#include "lann/data_io.hpp"
#include "lann/inference.hpp"
#include "lann/neighbors.hpp"
#include "lann/text.hpp"
#include "lann/training.hpp"

namespace lann {

enum class Algorithm { Lann, Knn };

inline std::string_view to_string(Algorithm a) { return a == Algorithm::Lann ? "lann" : "knn"; }

// ---------------------------------------------------------------------------
// Plain weighted kNN baseline
// ---------------------------------------------------------------------------

/// Weighted kNN under squared Euclidean distance, written independently of
/// the local-metric code: votes 1/max(d, epsilon), ties between equal
/// distances go to the smaller index, ties between supports to the smaller
/// class id.
class WeightedKnn {
public:
    WeightedKnn(const LabeledDataset& train, std::size_t k, double epsilon)
        : scaler_(zscore_fit(train)), train_(zscore_apply(scaler_, train)), k_(k), epsilon_(epsilon) {
        if (k_ < 1 || k_ > train_.size()) throw Error(ErrorKind::InsufficientPoints, "k exceeds training set size");
    }

    Label predict(std::span<const double> raw_query) const {
        const auto q = scaler_.apply(raw_query);
        std::vector<double> dist(train_.size());
        for (std::size_t i = 0; i < train_.size(); ++i) {
            double d = 0.0;
            auto x = train_.point(i);
            for (std::size_t l = 0; l < q.size(); ++l) d += (x[l] - q[l]) * (x[l] - q[l]);
            dist[i] = d;
        }
        std::vector<std::size_t> order(train_.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

        std::vector<double> votes(train_.num_classes(), 0.0);
        for (std::size_t r = 0; r < k_; ++r) {
            votes[train_.label(order[r])] += 1.0 / std::max(dist[order[r]], epsilon_);
        }
        return argmax(votes);
    }

private:
    Scaler scaler_;
    LabeledDataset train_;
    std::size_t k_;
    double epsilon_;
};

// ---------------------------------------------------------------------------
// Cross validation
// ---------------------------------------------------------------------------

struct CvResult {
    std::vector<double> fold_accuracies;
    double mean = 0.0;
    double stddev = 0.0;  // population stddev over folds
    Algorithm algorithm = Algorithm::Lann;
    std::string dataset;
    std::uint64_t seed = 0;
};

inline std::pair<double, double> mean_and_stddev(std::span<const double> xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double sq = 0.0;
    for (double x : xs) sq += (x - mean) * (x - mean);
    return {mean, std::sqrt(sq / static_cast<double>(xs.size()))};
}

/// Test accuracy of one fold. Scaling is always fitted on the training split.
inline double evaluate_fold(const LabeledDataset& dataset, const Fold& fold, Algorithm algorithm,
                            const Hyperparams& hyper) {
    const auto train = dataset.subset(fold.train);
    std::size_t correct = 0;
    if (algorithm == Algorithm::Lann) {
        const auto model = fit(train, hyper).first;
        for (std::size_t i : fold.test) correct += predict(model, dataset.point(i)).label == dataset.label(i);
    } else {
        const WeightedKnn knn(train, hyper.k, hyper.epsilon);
        for (std::size_t i : fold.test) correct += knn.predict(dataset.point(i)) == dataset.label(i);
    }
    return static_cast<double>(correct) / static_cast<double>(fold.test.size());
}

/// Stratified, shuffled k-fold CV. `seed` drives the fold plan; training uses hyper.seed.
inline CvResult cross_validate(const LabeledDataset& dataset, Algorithm algorithm, const Hyperparams& hyper,
                               std::uint64_t seed, std::size_t folds = 10, std::string dataset_tag = {}) {
    hyper.validate();
    const auto plan = make_stratified_folds(dataset, folds, seed);
    CvResult res;
    res.algorithm = algorithm;
    res.dataset = std::move(dataset_tag);
    res.seed = seed;
    for (const auto& fold : plan.folds) res.fold_accuracies.push_back(evaluate_fold(dataset, fold, algorithm, hyper));
    std::tie(res.mean, res.stddev) = mean_and_stddev(res.fold_accuracies);
    return res;
}

inline void write_cv_result(std::ostream& out, const CvResult& r) {
    out << "dataset,algorithm,seed,mean,std";
    for (std::size_t f = 0; f < r.fold_accuracies.size(); ++f) out << ",fold" << f;
    out << '\n'
        << r.dataset << ',' << to_string(r.algorithm) << ',' << r.seed << ',' << text::format_double(r.mean) << ','
        << text::format_double(r.stddev);
    for (double a : r.fold_accuracies) out << ',' << text::format_double(a);
    out << '\n';
}

// ---------------------------------------------------------------------------
// Relevance fingerprints
// ---------------------------------------------------------------------------

struct ClassFingerprint {
    std::vector<Label> classes;               // classes present in the training set
    std::vector<RelevanceProfile> profiles;  // profiles[r] belongs to classes[r]
};

/// Per class: mean of the members' normalized lambda^2, renormalized to sum 1.
inline ClassFingerprint fingerprints(const LannModel& model) {
    const auto& data = model.dataset;
    std::vector<std::vector<double>> acc(data.num_classes(), std::vector<double>(data.dim(), 0.0));
    std::vector<std::size_t> counts(data.num_classes(), 0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto r = detail::normalized_relevance(model.metrics[i]);
        auto& a = acc[data.label(i)];
        for (std::size_t l = 0; l < a.size(); ++l) a[l] += r[l];
        ++counts[data.label(i)];
    }
    ClassFingerprint fp;
    for (Label c = 0; c < data.num_classes(); ++c) {
        if (counts[c] == 0) continue;
        detail::renormalize(acc[c]);
        fp.classes.push_back(c);
        fp.profiles.push_back({std::move(acc[c])});
    }
    return fp;
}

inline void write_fingerprints(std::ostream& out, const ClassFingerprint& fp, const LabeledDataset& data) {
    out << "class,feature,relevance\n";
    for (std::size_t r = 0; r < fp.classes.size(); ++r) {
        const Label c = fp.classes[r];
        const std::string cls = data.class_names().empty() ? std::to_string(c) : data.class_names()[c];
        for (std::size_t l = 0; l < data.dim(); ++l) {
            const std::string feat = data.feature_names().empty() ? "f" + std::to_string(l) : data.feature_names()[l];
            out << cls << ',' << feat << ',' << text::format_double(fp.profiles[r].relevances[l]) << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Distance matrices
// ---------------------------------------------------------------------------

enum class Symmetrize { Mean, Min, None };

/// D_ij = d_{Lambda_i}(x^i, x^j), then optionally symmetrized. Diagonal is 0.
inline Matrix export_distance_matrix(const LannModel& model, Symmetrize mode = Symmetrize::Mean) {
    const auto& data = model.dataset;
    const std::size_t m = data.size();
    Matrix raw(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            if (i != j) raw(i, j) = local_distance(model.metrics[i], data.point(i), data.point(j));
        }
    }
    if (mode == Symmetrize::None) return raw;
    Matrix sym(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double v = mode == Symmetrize::Mean ? (raw(i, j) + raw(j, i)) / 2.0 : std::min(raw(i, j), raw(j, i));
            sym(i, j) = v;
            sym(j, i) = v;
        }
    }
    return sym;
}

/// Pairwise squared Euclidean distances between rows.
inline Matrix euclidean_distance_matrix(const Matrix& points) {
    const std::size_t m = points.rows();
    Matrix d(m, m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < points.cols(); ++l) {
                const double diff = points(i, l) - points(j, l);
                s += diff * diff;
            }
            d(i, j) = s;
            d(j, i) = s;
        }
    }
    return d;
}

/// Leave-one-out majority vote over each row's k smallest off-diagonal
/// entries (distance ties go to the smaller index, vote ties to the smaller
/// label). Returns the fraction of points whose vote matches their label.
inline double reclassify_by_matrix(const Matrix& d, std::span<const Label> labels, std::size_t k) {
    const std::size_t m = d.rows();
    if (d.cols() != m) throw Error(ErrorKind::InvalidDimension, "distance matrix must be square");
    if (labels.size() != m) throw Error(ErrorKind::InvalidDimension, "label count does not match matrix size");
    if (k < 1 || k >= m) throw Error(ErrorKind::InsufficientPoints, "k must be in [1, m-1]");
    const std::size_t classes = *std::max_element(labels.begin(), labels.end()) + 1;

    std::size_t correct = 0;
    std::vector<std::size_t> order;
    std::vector<std::size_t> votes(classes);
    for (std::size_t i = 0; i < m; ++i) {
        order.clear();
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) order.push_back(j);
        }
        auto row = d.row(i);
        auto closer = [&](std::size_t a, std::size_t b) { return row[a] < row[b] || (row[a] == row[b] && a < b); };
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), closer);
        std::fill(votes.begin(), votes.end(), 0);
        for (std::size_t r = 0; r < k; ++r) ++votes[labels[order[r]]];
        const auto winner = static_cast<Label>(std::max_element(votes.begin(), votes.end()) - votes.begin());
        correct += winner == labels[i];
    }
    return static_cast<double>(correct) / static_cast<double>(m);
}

inline void write_matrix(std::ostream& out, const Matrix& d) {
    for (std::size_t i = 0; i < d.rows(); ++i) out << text::join_numbers(d.row(i)) << '\n';
}

inline void write_labels(std::ostream& out, std::span<const Label> labels) {
    for (Label y : labels) out << y << '\n';
}

}  // namespace lann
