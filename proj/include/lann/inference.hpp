#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lann/core.hpp"
#include "lann/neighbors.hpp"

namespace lann {

/// S(y|x) per class: summed inverse (floored) distances of same-class neighbors.
struct SupportVector {
    std::vector<double> values;
};

/// Softmax of the supports; sums to one.
struct ProbabilityVector {
    std::vector<double> values;
};

struct Prediction {
    Label label;
    ProbabilityVector probabilities;
};

inline SupportVector support(const LannModel& model, const Neighborhood& neighborhood) {
    SupportVector s{std::vector<double>(model.dataset.num_classes(), 0.0)};
    for (std::size_t r = 0; r < neighborhood.size(); ++r) {
        const double d = std::max(neighborhood.distances[r], model.hyper.epsilon);
        s.values[model.dataset.label(neighborhood.indices[r])] += 1.0 / d;
    }
    return s;
}

inline ProbabilityVector class_probabilities(const SupportVector& s, double beta) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    const double peak = *std::max_element(s.values.begin(), s.values.end());
    ProbabilityVector p{std::vector<double>(s.values.size())};
    double total = 0.0;
    for (std::size_t y = 0; y < s.values.size(); ++y) {
        p.values[y] = std::exp((s.values[y] - peak) / beta);
        total += p.values[y];
    }
    for (double& v : p.values) v /= total;
    return p;
}

/// log P(y|x) for every class, computed without forming P so it stays
/// finite when a floored distance makes one support dominate.
inline std::vector<double> log_class_probabilities(const SupportVector& s, double beta) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    const double peak = *std::max_element(s.values.begin(), s.values.end());
    double total = 0.0;
    for (double v : s.values) total += std::exp((v - peak) / beta);
    const double log_total = std::log(total);
    std::vector<double> out(s.values.size());
    for (std::size_t y = 0; y < out.size(); ++y) out[y] = (s.values[y] - peak) / beta - log_total;
    return out;
}

/// -log P(y|x) as log sum_c exp((S_c - S_y) / beta). When y holds the
/// largest support this is log1p of the remaining terms, which keeps small
/// losses accurate to relative precision.
inline double negative_log_probability(const SupportVector& s, double beta, Label y) {
    if (!(beta > 0.0)) throw Error(ErrorKind::InvalidArgument, "beta must be positive");
    double top = 0.0;
    for (double v : s.values) top = std::max(top, (v - s.values[y]) / beta);
    double rest = 0.0;
    for (std::size_t c = 0; c < s.values.size(); ++c) {
        if (c != y) rest += std::exp((s.values[c] - s.values[y]) / beta - top);
    }
    return top == 0.0 ? std::log1p(rest) : top + std::log(rest + std::exp(-top));
}

/// Index of the largest value; the first one wins ties.
inline Label argmax(std::span<const double> values) {
    return static_cast<Label>(std::max_element(values.begin(), values.end()) - values.begin());
}

/// Predicts from a query already mapped into the model's z-scored space.
inline Prediction predict_scaled(const LannModel& model, std::span<const double> scaled_query) {
    const auto nb = find_neighbors(model, scaled_query, model.hyper.k);
    const auto s = support(model, nb);
    return {argmax(s.values), class_probabilities(s, model.hyper.beta)};
}

/// Predicts the label of a raw (unscaled) query.
inline Prediction predict(const LannModel& model, std::span<const double> query) {
    const auto scaled = model.scaler.apply(query);
    return predict_scaled(model, scaled);
}

/// Relevance profile of a prediction: mean of the k neighbors' normalized
/// lambda^2 vectors.
inline RelevanceProfile explain(const LannModel& model, std::span<const double> query) {
    const auto scaled = model.scaler.apply(query);
    const auto nb = find_neighbors(model, scaled, model.hyper.k);
    std::vector<double> acc(model.dataset.dim(), 0.0);
    for (std::size_t i : nb.indices) {
        const auto r = detail::normalized_relevance(model.metrics[i]);
        for (std::size_t l = 0; l < acc.size(); ++l) acc[l] += r[l];
    }
    detail::renormalize(acc);
    return {std::move(acc)};
}

}  // namespace lann
