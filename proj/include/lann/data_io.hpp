#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lann/core.hpp"
#include "lann/random.hpp"
#include "lann/text.hpp"

namespace lann {

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

/// Label column given by header name or zero-based index; default is the last column.
using LabelColumn = std::variant<std::monostate, std::string, std::size_t>;

/// Reads a headered, comma-separated file. Every non-label column must be a
/// decimal number. Labels are mapped to class ids in order of first
/// appearance, except that a column already holding exactly the integers
/// 0..L-1 keeps those ids (so written datasets read back unchanged).
inline LabeledDataset read_csv(std::istream& in, const LabelColumn& label_column = {},
                               const std::string& source = "<stream>") {
    std::string line;
    if (!std::getline(in, line) || text::trim(line).empty()) {
        throw Error(ErrorKind::Parse, source + ": file is empty");
    }
    std::vector<std::string> header;
    for (auto cell : text::split(line)) header.emplace_back(text::trim(cell));
    if (header.size() < 2) throw Error(ErrorKind::Parse, source + ": need at least one feature and a label column");

    std::size_t label_idx = header.size() - 1;
    if (auto* name = std::get_if<std::string>(&label_column)) {
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw Error(ErrorKind::Parse, source + ": no column named '" + *name + "'");
        label_idx = static_cast<std::size_t>(it - header.begin());
    } else if (auto* idx = std::get_if<std::size_t>(&label_column)) {
        if (*idx >= header.size()) {
            throw Error(ErrorKind::Parse, source + ": label column " + std::to_string(*idx) + " out of range");
        }
        label_idx = *idx;
    }

    std::vector<std::string> feature_names;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c != label_idx) feature_names.push_back(header[c]);
    }
    const std::size_t n = feature_names.size();

    std::vector<double> values;
    std::vector<std::string> raw_labels;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (text::trim(line).empty()) continue;
        const auto cells = text::split(line);
        if (cells.size() != header.size()) {
            throw Error(ErrorKind::Parse, source + ": row " + std::to_string(row) + " has " +
                                              std::to_string(cells.size()) + " cells, expected " +
                                              std::to_string(header.size()));
        }
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c == label_idx) {
                raw_labels.emplace_back(text::trim(cells[c]));
                continue;
            }
            auto v = text::parse_double(cells[c]);
            if (!v || !std::isfinite(*v)) {
                throw Error(ErrorKind::Parse, source + ": cannot parse '" + std::string(text::trim(cells[c])) +
                                                  "' at row " + std::to_string(row) + ", column " +
                                                  std::to_string(c + 1) + " (" + header[c] + ")");
            }
            values.push_back(*v);
        }
    }
    if (raw_labels.empty()) throw Error(ErrorKind::Parse, source + ": file has a header but no data rows");

    // Integer labels that already form 0..L-1 are kept as is.
    std::vector<Label> labels;
    std::vector<std::string> class_names;
    std::size_t num_classes = 0;
    bool numeric = true;
    std::size_t max_label = 0;
    for (const auto& s : raw_labels) {
        auto v = text::parse_index(s);
        if (!v) {
            numeric = false;
            break;
        }
        max_label = std::max(max_label, *v);
    }
    if (numeric && max_label < raw_labels.size()) {
        std::vector<bool> seen(max_label + 1, false);
        for (const auto& s : raw_labels) seen[*text::parse_index(s)] = true;
        numeric = std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
    } else {
        numeric = false;
    }
    if (numeric) {
        for (const auto& s : raw_labels) labels.push_back(*text::parse_index(s));
        num_classes = max_label + 1;
    } else {
        std::map<std::string, Label> ids;
        for (const auto& s : raw_labels) {
            auto [it, inserted] = ids.emplace(s, class_names.size());
            if (inserted) class_names.push_back(s);
            labels.push_back(it->second);
        }
        num_classes = class_names.size();
    }
    if (num_classes < 2) throw Error(ErrorKind::InvalidDataset, source + ": file contains a single class");

    Matrix points(raw_labels.size(), n, std::move(values));
    return LabeledDataset(std::move(points), std::move(labels), num_classes, std::move(feature_names),
                          std::move(class_names));
}

inline LabeledDataset load_csv(const std::string& path, const LabelColumn& label_column = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return read_csv(in, label_column, path);
}

/// Writes features followed by a "class" column (class name when known, else the id).
inline void write_csv(std::ostream& out, const LabeledDataset& data) {
    for (std::size_t l = 0; l < data.dim(); ++l) {
        out << (data.feature_names().empty() ? "f" + std::to_string(l) : data.feature_names()[l]) << ',';
    }
    out << "class\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
        out << text::join_numbers(data.point(i)) << ',';
        if (data.class_names().empty()) {
            out << data.label(i);
        } else {
            out << data.class_names()[data.label(i)];
        }
        out << '\n';
    }
}

inline void write_csv(const std::string& path, const LabeledDataset& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    write_csv(out, data);
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// z-scoring
// ---------------------------------------------------------------------------

/// Population (1/m) mean and stddev per feature. Constant features get
/// stddev 1, which maps them to all zeros.
inline Scaler zscore_fit(const LabeledDataset& train) {
    const std::size_t m = train.size(), n = train.dim();
    Scaler s{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
    for (std::size_t l = 0; l < n; ++l) {
        double sum = 0.0;
        bool constant = true;
        const double first = train.points()(0, l);
        for (std::size_t i = 0; i < m; ++i) {
            const double v = train.points()(i, l);
            sum += v;
            constant = constant && v == first;
        }
        if (constant) {
            s.mean[l] = first;
            continue;
        }
        const double mean = sum / static_cast<double>(m);
        double sq = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double d = train.points()(i, l) - mean;
            sq += d * d;
        }
        s.mean[l] = mean;
        s.stddev[l] = std::sqrt(sq / static_cast<double>(m));
    }
    return s;
}

inline LabeledDataset zscore_apply(const Scaler& scaler, const LabeledDataset& data) {
    if (scaler.dim() != data.dim()) throw Error(ErrorKind::InvalidDimension, "scaler dimension mismatch");
    Matrix pts(data.size(), data.dim());
    for (std::size_t i = 0; i < data.size(); ++i) {
        auto row = scaler.apply(data.point(i));
        std::copy(row.begin(), row.end(), pts.row(i).begin());
    }
    return data.with_points(std::move(pts));
}

inline std::pair<LabeledDataset, Scaler> zscore_fit_transform(const LabeledDataset& train) {
    auto scaler = zscore_fit(train);
    auto scaled = zscore_apply(scaler, train);
    return {std::move(scaled), std::move(scaler)};
}

// ---------------------------------------------------------------------------
// Stratified folds
// ---------------------------------------------------------------------------

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

struct FoldPlan {
    std::vector<Fold> folds;
    std::uint64_t seed = 0;
};

/// Shuffles each class with the seed and deals its members round-robin to
/// the folds. The dealing position carries over between classes so fold
/// sizes differ by at most one.
inline FoldPlan make_stratified_folds(const LabeledDataset& data, std::size_t folds, std::uint64_t seed) {
    if (folds < 2) throw Error(ErrorKind::InvalidArgument, "need at least two folds");
    std::vector<std::vector<std::size_t>> by_class(data.num_classes());
    for (std::size_t i = 0; i < data.size(); ++i) by_class[data.label(i)].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < folds) {
            throw Error(ErrorKind::InsufficientPoints, "class " + std::to_string(c) + " has " +
                                                           std::to_string(by_class[c].size()) +
                                                           " members, fewer than " + std::to_string(folds) +
                                                           " folds");
        }
    }

    Rng rng(seed);
    std::vector<std::size_t> fold_of(data.size());
    std::size_t next = 0;
    for (auto& members : by_class) {
        rng.shuffle(std::span(members));
        for (std::size_t i : members) {
            fold_of[i] = next;
            next = (next + 1) % folds;
        }
    }

    FoldPlan plan{std::vector<Fold>(folds), seed};
    for (std::size_t i = 0; i < data.size(); ++i) {
        for (std::size_t f = 0; f < folds; ++f) {
            (fold_of[i] == f ? plan.folds[f].test : plan.folds[f].train).push_back(i);
        }
    }
    return plan;
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct ClassificationParams {
    std::size_t samples = 2000;
    std::size_t features = 20;
    std::size_t informative = 2;
    std::size_t weak = 2;
    std::size_t redundant = 2;
    std::size_t classes = 2;
    std::uint64_t seed = 42;
};

/// Feature layout: [strong | weak | redundant | noise].
///  - strong: class c is centred on hypercube vertex (bit_d(c) - 1/2), unit noise
///  - weak: same centring, noise with stddev 4
///  - redundant: random linear combinations of the strong and weak features
///  - noise: standard normal, independent of the label
inline LabeledDataset generate_classification(const ClassificationParams& p) {
    if (p.classes < 2) throw Error(ErrorKind::InvalidArgument, "need at least two classes");
    if (p.informative < 1) throw Error(ErrorKind::InvalidArgument, "need at least one informative feature");
    if (p.informative + p.weak + p.redundant > p.features) {
        throw Error(ErrorKind::InvalidArgument, "informative + weak + redundant exceeds feature count");
    }
    if (p.informative < 63 && p.classes > (std::size_t{1} << p.informative)) {
        throw Error(ErrorKind::InvalidArgument, "too many classes for the informative subspace");
    }
    if (p.samples < p.classes) throw Error(ErrorKind::InvalidArgument, "fewer samples than classes");

    Rng rng(p.seed);
    const std::size_t relevant = p.informative + p.weak;
    Matrix mix(p.redundant, relevant);
    for (std::size_t r = 0; r < p.redundant; ++r) {
        for (std::size_t c = 0; c < relevant; ++c) mix(r, c) = rng.uniform(-1.0, 1.0);
    }

    Matrix pts(p.samples, p.features);
    std::vector<Label> labels(p.samples);
    for (std::size_t i = 0; i < p.samples; ++i) {
        const Label y = i % p.classes;
        labels[i] = y;
        auto row = pts.row(i);
        for (std::size_t d = 0; d < p.informative; ++d) {
            const double centre = (d < 64 && ((y >> d) & 1U)) ? 0.5 : -0.5;
            row[d] = centre + rng.normal();
        }
        for (std::size_t d = 0; d < p.weak; ++d) {
            const double centre = (d < 64 && ((y >> d) & 1U)) ? 0.5 : -0.5;
            row[p.informative + d] = centre + 4.0 * rng.normal();
        }
        for (std::size_t r = 0; r < p.redundant; ++r) {
            double v = 0.0;
            for (std::size_t c = 0; c < relevant; ++c) v += mix(r, c) * row[c];
            row[relevant + r] = v;
        }
        for (std::size_t d = relevant + p.redundant; d < p.features; ++d) row[d] = rng.normal();
    }

    std::vector<std::string> names;
    for (std::size_t l = 0; l < p.features; ++l) names.push_back("f" + std::to_string(l));
    return LabeledDataset(std::move(pts), std::move(labels), p.classes, std::move(names));
}

struct LicoriceParams {
    std::size_t cylinders = 5;
    std::size_t inside_per_cylinder = 200;
    std::size_t outside_per_cylinder = 200;
    double radius = 1.0;
    double length = 4.0;
    std::uint64_t seed = 42;
};

/// Geometry of one generated cylinder.
struct Cylinder {
    std::array<double, 3> centre;
    std::array<double, 3> axis;  // unit vector
};

namespace detail {

inline std::array<double, 3> random_unit(Rng& rng) {
    while (true) {
        std::array<double, 3> v{rng.normal(), rng.normal(), rng.normal()};
        const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (norm > 1e-12) return {v[0] / norm, v[1] / norm, v[2] / norm};
    }
}

inline std::array<double, 3> cross(const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double norm(const std::array<double, 3>& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

}  // namespace detail

/// Cylinder layout used by generate_licorice (exposed for tests).
/// Centres are drawn by rejection so the enclosing spheres of any two outer
/// shells are at least 4 radii apart.
inline std::vector<Cylinder> licorice_layout(const LicoriceParams& p) {
    Rng rng(p.seed);
    const double bound = std::hypot(p.length / 2.0, 2.0 * p.radius);
    const double min_gap = 2.0 * bound + 4.0 * p.radius;
    const double box = min_gap * std::cbrt(static_cast<double>(p.cylinders)) * 1.5;

    std::vector<Cylinder> out;
    while (out.size() < p.cylinders) {
        const std::array<double, 3> c{rng.uniform(0.0, box), rng.uniform(0.0, box), rng.uniform(0.0, box)};
        const bool clear = std::all_of(out.begin(), out.end(), [&](const Cylinder& o) {
            return detail::norm({c[0] - o.centre[0], c[1] - o.centre[1], c[2] - o.centre[2]}) >= min_gap;
        });
        if (!clear) continue;
        out.push_back({c, detail::random_unit(rng)});
    }
    return out;
}

/// Points inside (label 1) and in a shell around (label 0) randomly oriented cylinders.
inline LabeledDataset generate_licorice(const LicoriceParams& p) {
    if (p.cylinders < 1 || p.inside_per_cylinder < 1 || p.outside_per_cylinder < 1) {
        throw Error(ErrorKind::InvalidArgument, "licorice counts must be at least 1");
    }
    if (!(p.radius > 0.0) || !(p.length > 0.0)) {
        throw Error(ErrorKind::InvalidArgument, "licorice radius and length must be positive");
    }
    const auto layout = licorice_layout(p);
    // Point draws use a stream independent of the layout draws.
    Rng rng(p.seed ^ 0x9E3779B97F4A7C15ULL);

    const std::size_t per = p.inside_per_cylinder + p.outside_per_cylinder;
    Matrix pts(p.cylinders * per, 3);
    std::vector<Label> labels(pts.rows());
    std::size_t r = 0;
    for (const auto& cyl : layout) {
        // Orthonormal frame (u, v) perpendicular to the axis.
        const std::array<double, 3> helper = std::abs(cyl.axis[0]) < 0.9 ? std::array<double, 3>{1, 0, 0}
                                                                           : std::array<double, 3>{0, 1, 0};
        auto u = detail::cross(cyl.axis, helper);
        const double un = detail::norm(u);
        for (double& x : u) x /= un;
        const auto v = detail::cross(cyl.axis, u);

        for (std::size_t s = 0; s < per; ++s, ++r) {
            const bool inside = s < p.inside_per_cylinder;
            // Area-uniform radius in [0, R) or [R, 2R).
            const double r_lo = inside ? 0.0 : p.radius;
            const double r_hi = inside ? p.radius : 2.0 * p.radius;
            double rad = std::sqrt(rng.uniform(r_lo * r_lo, r_hi * r_hi));
            if (inside && rad >= p.radius) rad = std::nextafter(p.radius, 0.0);
            const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
            const double t = rng.uniform(-p.length / 2.0, p.length / 2.0);
            for (std::size_t d = 0; d < 3; ++d) {
                pts(r, d) = cyl.centre[d] + t * cyl.axis[d] + rad * (std::cos(phi) * u[d] + std::sin(phi) * v[d]);
            }
            labels[r] = inside ? 1 : 0;
        }
    }
    return LabeledDataset(std::move(pts), std::move(labels), 2, {"x", "y", "z"});
}

}  // namespace lann
