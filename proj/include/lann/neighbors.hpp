#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <queue>
#include <span>
#include <vector>

#include "lann/core.hpp"

namespace lann {

/// The k nearest training points, ordered by (distance, index).
struct Neighborhood {
    std::vector<std::size_t> indices;
    std::vector<double> distances;

    std::size_t size() const noexcept { return indices.size(); }
    bool contains(std::size_t i) const {
        return std::find(indices.begin(), indices.end(), i) != indices.end();
    }
    friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

/// sum_l lambda_l^2 (anchor_l - query_l)^2 for arbitrary (unnormalized) weights.
inline double local_distance(std::span<const double> weights, std::span<const double> anchor,
                             std::span<const double> query) {
    if (anchor.size() != weights.size() || query.size() != weights.size()) {
        throw Error(ErrorKind::InvalidDimension, "local_distance: dimension mismatch");
    }
    double d = 0.0;
    for (std::size_t l = 0; l < anchor.size(); ++l) {
        const double diff = anchor[l] - query[l];
        const double w = weights[l];
        d += (w * w) * (diff * diff);
    }
    return d;
}

inline double local_distance(const DiagonalMetric& metric, std::span<const double> anchor,
                             std::span<const double> query) {
    return local_distance(metric.weights(), anchor, query);
}

namespace detail {

inline void check_neighbor_request(const LannModel& model, std::span<const double> query, std::size_t k,
                                   std::optional<std::size_t> exclude) {
    if (query.size() != model.dataset.dim()) {
        throw Error(ErrorKind::InvalidDimension, "query dimension does not match model");
    }
    const std::size_t m = model.dataset.size();
    const std::size_t available = (exclude && *exclude < m) ? m - 1 : m;
    if (k == 0 || k > available) {
        throw Error(ErrorKind::InsufficientPoints,
                    "cannot select " + std::to_string(k) + " neighbors from " + std::to_string(available) +
                        " candidate points");
    }
}

struct Candidate {
    double distance;
    std::size_t index;
    bool operator<(const Candidate& o) const {
        return distance < o.distance || (distance == o.distance && index < o.index);
    }
};

}  // namespace detail

/// k nearest training points to `query` (already in the model's z-scored
/// space), each candidate i scored under its own metric. Ties go to the
/// smaller index. A bounded max-heap keeps the scan at O(m n + m log k).
inline Neighborhood find_neighbors(const LannModel& model, std::span<const double> query, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) {
    detail::check_neighbor_request(model, query, k, exclude);
    const auto& data = model.dataset;

    std::priority_queue<detail::Candidate> worst_on_top;
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (exclude && *exclude == i) continue;
        const detail::Candidate c{local_distance(model.metrics[i], data.point(i), query), i};
        if (worst_on_top.size() < k) {
            worst_on_top.push(c);
        } else if (c < worst_on_top.top()) {
            worst_on_top.pop();
            worst_on_top.push(c);
        }
    }

    Neighborhood out;
    out.indices.resize(k);
    out.distances.resize(k);
    for (std::size_t r = k; r-- > 0;) {
        out.indices[r] = worst_on_top.top().index;
        out.distances[r] = worst_on_top.top().distance;
        worst_on_top.pop();
    }
    return out;
}

/// Reference implementation: score every candidate, stable-sort, truncate.
inline Neighborhood brute_force_neighbors(const LannModel& model, std::span<const double> query, std::size_t k,
                                          std::optional<std::size_t> exclude = std::nullopt) {
    detail::check_neighbor_request(model, query, k, exclude);
    const auto& data = model.dataset;

    std::vector<std::size_t> order;
    std::vector<double> dist(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        dist[i] = local_distance(model.metrics[i], data.point(i), query);
        if (!(exclude && *exclude == i)) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });

    Neighborhood out;
    for (std::size_t r = 0; r < k; ++r) {
        out.indices.push_back(order[r]);
        out.distances.push_back(dist[order[r]]);
    }
    return out;
}

}  // namespace lann
