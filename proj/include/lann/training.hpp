#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "lann/core.hpp"
#include "lann/data_io.hpp"
#include "lann/inference.hpp"
#include "lann/neighbors.hpp"
#include "lann/random.hpp"

namespace lann {

struct TrainReport {
    std::vector<double> epoch_losses;  // mean sample loss per epoch
    std::size_t epochs = 0;
    double final_loss = 0.0;
    std::uint64_t seed = 0;
    std::size_t metric_resets = 0;  // updates that produced an all-zero metric
};

/// dE(x^i, y_i) / d lambda^j for one neighbor j.
struct GradientRecord {
    std::size_t neighbor;
    std::vector<double> gradient;
};

/// Leave-one-out neighborhood of training point i under the current metrics.
inline Neighborhood training_neighborhood(const LannModel& model, std::size_t i) {
    return find_neighbors(model, model.dataset.point(i), model.hyper.k, i);
}

/// -log P(y_i | x^i) for a given (frozen) neighborhood of x^i.
inline double sample_loss(const LannModel& model, std::size_t i, const Neighborhood& nb) {
    return negative_log_probability(support(model, nb), model.hyper.beta, model.dataset.label(i));
}

inline double sample_loss(const LannModel& model, std::size_t i) {
    return sample_loss(model, i, training_neighborhood(model, i));
}

/// Gradients of the sample loss w.r.t. the lambda of every neighbor in `nb`,
/// with membership held fixed. Non-neighbors have zero gradient and are
/// not listed.
///   same class:       +(1 - P(y_i|x^i)) / (beta d^2) * 2 lambda_l (x^j_l - x^i_l)^2
///   different class:  -P(y_j|x^i)       / (beta d^2) * 2 lambda_l (x^j_l - x^i_l)^2
/// where d = max(d_j(x^j, x^i), epsilon).
inline std::vector<GradientRecord> sample_gradients(const LannModel& model, std::size_t i, const Neighborhood& nb) {
    const auto& data = model.dataset;
    const double beta = model.hyper.beta;
    const auto p = class_probabilities(support(model, nb), beta);
    const Label yi = data.label(i);
    const auto xi = data.point(i);

    std::vector<GradientRecord> out;
    out.reserve(nb.size());
    for (std::size_t r = 0; r < nb.size(); ++r) {
        const std::size_t j = nb.indices[r];
        const Label yj = data.label(j);
        const double d = std::max(nb.distances[r], model.hyper.epsilon);
        const double coeff = (yj == yi ? (1.0 - p.values[yi]) : -p.values[yj]) / (beta * d * d);

        const auto xj = data.point(j);
        const auto& metric = model.metrics[j];
        GradientRecord g{j, std::vector<double>(data.dim())};
        for (std::size_t l = 0; l < data.dim(); ++l) {
            const double diff = xj[l] - xi[l];
            g.gradient[l] = coeff * 2.0 * metric[l] * diff * diff;
        }
        out.push_back(std::move(g));
    }
    return out;
}

inline std::vector<GradientRecord> sample_gradients(const LannModel& model, std::size_t i) {
    return sample_gradients(model, i, training_neighborhood(model, i));
}

/// Trains one diagonal metric per training point by SGD.
///
/// The dataset is z-scored first (the scaler is stored in the model). All
/// metrics start at identity. Each epoch visits the points in a seeded random
/// order; for point i the leave-one-out neighborhood is recomputed, the
/// neighbor gradients are evaluated with that membership frozen, each
/// neighbor's lambda takes a step of size learning_rate and is renormalized
/// to sum(lambda^2) = n. A step that zeroes a metric resets it to identity.
inline std::pair<LannModel, TrainReport> fit(const LabeledDataset& dataset, const Hyperparams& hyper) {
    hyper.validate();
    if (hyper.k + 1 > dataset.size()) {
        throw Error(ErrorKind::InsufficientPoints, "training needs more than k = " + std::to_string(hyper.k) +
                                                       " points, got " + std::to_string(dataset.size()));
    }
    auto [scaled, scaler] = zscore_fit_transform(dataset);
    const std::size_t m = scaled.size(), n = scaled.dim();
    LannModel model{std::move(scaled), std::vector<DiagonalMetric>(m, identity_metric(n)), hyper, std::move(scaler)};

    TrainReport report;
    report.seed = hyper.seed;
    report.epochs = hyper.epochs;

    Rng rng(hyper.seed);
    std::vector<std::size_t> order(m);
    std::vector<double> step(n);
    for (std::size_t epoch = 0; epoch < hyper.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        rng.shuffle(std::span(order));
        double loss_sum = 0.0;
        for (std::size_t i : order) {
            const auto nb = training_neighborhood(model, i);
            loss_sum += sample_loss(model, i, nb);
            for (const auto& g : sample_gradients(model, i, nb)) {
                const auto& current = model.metrics[g.neighbor];
                for (std::size_t l = 0; l < n; ++l) step[l] = current[l] - hyper.learning_rate * g.gradient[l];
                if (std::all_of(step.begin(), step.end(), [](double v) { return v == 0.0; })) {
                    model.metrics[g.neighbor] = identity_metric(n);
                    ++report.metric_resets;
                } else {
                    model.metrics[g.neighbor] = normalize_metric(step);
                }
            }
        }
        report.epoch_losses.push_back(loss_sum / static_cast<double>(m));
    }
    report.final_loss = report.epoch_losses.empty() ? 0.0 : report.epoch_losses.back();
    return {std::move(model), std::move(report)};
}

// ---------------------------------------------------------------------------
// Gradient checking
// ---------------------------------------------------------------------------

struct GradientCheckReport {
    double max_relative_error = 0.0;
    std::size_t trials = 0;
    std::size_t components_compared = 0;
    std::size_t components_skipped = 0;  // perturbation would change membership
    double tolerance = 0.0;
    bool passed = false;
};

struct GradientCheckOptions {
    std::size_t trials = 100;
    double tolerance = 1e-4;
    double step = 1e-5;
    std::uint64_t seed = 42;
    // Instance shapes are drawn uniformly from these closed ranges.
    std::size_t min_points = 20, max_points = 100;
    std::size_t min_dim = 2, max_dim = 10;
    std::size_t min_classes = 2, max_classes = 4;
    /// Floor on the denominator of the relative error; components whose
    /// analytic and numeric values are both below it are compared absolutely.
    double scale_floor = 1e-7;
    /// The difference quotient carries roughly loss_ulps * eps * |loss| / step
    /// of rounding noise. Components too small for that noise to sit below
    /// `tolerance` are compared against the noise level instead.
    double loss_ulps = 4.0;
};

namespace detail {

/// Sample loss for point i with the neighborhood `indices` held fixed and
/// neighbor `j`'s weights replaced by `weights_j` (not renormalized).
inline double frozen_loss(const LannModel& model, std::size_t i, std::span<const std::size_t> indices,
                          std::size_t j, std::span<const double> weights_j) {
    const auto& data = model.dataset;
    std::vector<double> s(data.num_classes(), 0.0);
    for (std::size_t idx : indices) {
        const double d = idx == j ? local_distance(weights_j, data.point(idx), data.point(i))
                                  : local_distance(model.metrics[idx], data.point(idx), data.point(i));
        s[data.label(idx)] += 1.0 / std::max(d, model.hyper.epsilon);
    }
    return negative_log_probability(SupportVector{std::move(s)}, model.hyper.beta, data.label(i));
}

inline LabeledDataset random_dataset(Rng& rng, std::size_t m, std::size_t n, std::size_t classes) {
    Matrix pts(m, n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t l = 0; l < n; ++l) pts(i, l) = rng.normal();
    }
    std::vector<Label> labels(m);
    for (std::size_t i = 0; i < m; ++i) labels[i] = i % classes;
    rng.shuffle(std::span(labels));
    return LabeledDataset(std::move(pts), std::move(labels), classes);
}

inline std::size_t draw_between(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
}

}  // namespace detail

/// Random model for testing: normal data and random normalized metrics.
inline LannModel random_model(Rng& rng, std::size_t m, std::size_t n, std::size_t classes, const Hyperparams& hyper) {
    auto data = detail::random_dataset(rng, m, n, classes);
    std::vector<DiagonalMetric> metrics;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < m; ++i) {
        for (double& v : w) v = rng.uniform(0.2, 2.0);
        metrics.push_back(normalize_metric(w));
    }
    Scaler identity{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
    return LannModel{std::move(data), std::move(metrics), hyper, std::move(identity)};
}

/// Compares the analytic gradient of one sample's loss with central finite
/// differences for every neighbor weight. The neighborhood is frozen at the
/// unperturbed metrics; a component whose +/- step would move the neighbor
/// past the first non-neighbor is skipped, since the frozen loss no longer
/// matches the true one there. Updates `report` in place.
inline void check_sample_gradients(const LannModel& model, std::size_t i, const GradientCheckOptions& opt,
                                   GradientCheckReport& report) {
    const auto& data = model.dataset;
    const auto all = brute_force_neighbors(model, data.point(i), data.size() - 1, i);
    const std::size_t k = model.hyper.k;
    const std::span<const std::size_t> members(all.indices.data(), k);
    const bool has_outsider = all.size() > k;
    const double boundary = has_outsider ? all.distances[k] : 0.0;

    Neighborhood nb;
    nb.indices.assign(all.indices.begin(), all.indices.begin() + static_cast<std::ptrdiff_t>(k));
    nb.distances.assign(all.distances.begin(), all.distances.begin() + static_cast<std::ptrdiff_t>(k));
    const auto grads = sample_gradients(model, i, nb);

    for (const auto& g : grads) {
        const std::size_t j = g.neighbor;
        std::vector<double> w(model.metrics[j].weights().begin(), model.metrics[j].weights().end());
        for (std::size_t l = 0; l < data.dim(); ++l) {
            const double orig = w[l];
            w[l] = orig + opt.step;
            const double plus = detail::frozen_loss(model, i, members, j, w);
            const double d_plus = local_distance(std::span<const double>(w), data.point(j), data.point(i));
            w[l] = orig - opt.step;
            const double minus = detail::frozen_loss(model, i, members, j, w);
            w[l] = orig;

            if (has_outsider && d_plus >= boundary) {
                ++report.components_skipped;
                continue;
            }
            const double numeric = (plus - minus) / (2.0 * opt.step);
            const double analytic = g.gradient[l];
            const double noise = opt.loss_ulps * std::numeric_limits<double>::epsilon() *
                                 std::max(std::abs(plus), std::abs(minus)) / (2.0 * opt.step);
            const double floor = std::max(opt.scale_floor, noise / opt.tolerance);
            const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
            report.max_relative_error = std::max(report.max_relative_error, std::abs(analytic - numeric) / scale);
            ++report.components_compared;
        }
    }
}

/// Runs `trials` random instances (shape ranges from `opt`, metric weights in
/// [0.2, 2] before normalization, beta in [0.5, 2]) and reports the largest
/// relative error between analytic and finite-difference gradients.
inline GradientCheckReport check_gradients(const GradientCheckOptions& opt, const Hyperparams& base = {}) {
    if (opt.trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
    Rng rng(opt.seed);
    GradientCheckReport report;
    report.tolerance = opt.tolerance;
    for (std::size_t t = 0; t < opt.trials; ++t) {
        const std::size_t m = detail::draw_between(rng, opt.min_points, opt.max_points);
        const std::size_t n = detail::draw_between(rng, opt.min_dim, opt.max_dim);
        const std::size_t classes = detail::draw_between(rng, opt.min_classes, opt.max_classes);
        Hyperparams hyper = base;
        hyper.k = std::min(hyper.k, m - 1);
        hyper.beta = rng.uniform(0.5, 2.0);
        const auto model = random_model(rng, m, n, classes, hyper);
        const auto i = static_cast<std::size_t>(rng.below(m));
        check_sample_gradients(model, i, opt, report);
        ++report.trials;
    }
    report.passed = report.max_relative_error <= opt.tolerance;
    return report;
}

/// Gradient check on a given dataset: `trials` random (training point,
/// random metrics) instances drawn from the z-scored data.
inline GradientCheckReport check_gradients(const LabeledDataset& dataset, const Hyperparams& hyper,
                                           const GradientCheckOptions& opt) {
    if (opt.trials < 1) throw Error(ErrorKind::InvalidArgument, "need at least one trial");
    hyper.validate();
    if (hyper.k + 1 > dataset.size()) throw Error(ErrorKind::InsufficientPoints, "dataset too small for k");
    auto [scaled, scaler] = zscore_fit_transform(dataset);
    Rng rng(opt.seed);
    GradientCheckReport report;
    report.tolerance = opt.tolerance;
    const std::size_t m = scaled.size(), n = scaled.dim();
    LannModel model{std::move(scaled), std::vector<DiagonalMetric>(m, identity_metric(n)), hyper, std::move(scaler)};
    std::vector<double> w(n);
    for (std::size_t t = 0; t < opt.trials; ++t) {
        for (auto& metric : model.metrics) {
            for (double& v : w) v = rng.uniform(0.2, 2.0);
            metric = normalize_metric(w);
        }
        check_sample_gradients(model, static_cast<std::size_t>(rng.below(m)), opt, report);
        ++report.trials;
    }
    report.passed = report.max_relative_error <= opt.tolerance;
    return report;
}

}  // namespace lann
