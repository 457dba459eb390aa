#pragma once

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "lann/core.hpp"
#include "lann/text.hpp"

// Model file, line oriented:
//
//   LANN1
//   dims,<m>,<n>,<classes>
//   hyper,<k>,<beta>,<learning_rate>,<epochs>,<epsilon>,<seed>
//   features,<name_1>,...,<name_n>
//   classes,<name_0>,...          (only when labels had names)
//   mean,<mu_1>,...,<mu_n>
//   stddev,<s_1>,...,<s_n>
//   <label>,<x_1>,...,<x_n>,<lambda_1>,...,<lambda_n>    (m lines)
//
// Numbers are written in shortest round-trip form, so save/load is exact.
namespace lann {

inline constexpr std::string_view kModelMagic = "LANN1";

inline void save_model(std::ostream& out, const LannModel& model) {
    const auto& d = model.dataset;
    const auto& h = model.hyper;
    out << kModelMagic << '\n';
    out << "dims," << d.size() << ',' << d.dim() << ',' << d.num_classes() << '\n';
    out << "hyper," << h.k << ',' << text::format_double(h.beta) << ',' << text::format_double(h.learning_rate) << ','
        << h.epochs << ',' << text::format_double(h.epsilon) << ',' << h.seed << '\n';
    out << "features";
    for (std::size_t l = 0; l < d.dim(); ++l) {
        out << ',' << (d.feature_names().empty() ? "f" + std::to_string(l) : d.feature_names()[l]);
    }
    out << '\n';
    if (!d.class_names().empty()) {
        out << "classes";
        for (const auto& c : d.class_names()) out << ',' << c;
        out << '\n';
    }
    out << "mean," << text::join_numbers(model.scaler.mean) << '\n';
    out << "stddev," << text::join_numbers(model.scaler.stddev) << '\n';
    for (std::size_t i = 0; i < d.size(); ++i) {
        out << d.label(i) << ',' << text::join_numbers(d.point(i)) << ',' << text::join_numbers(model.metrics[i].weights())
            << '\n';
    }
}

inline void save_model(const std::string& path, const LannModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
    save_model(out, model);
    if (!out) throw Error(ErrorKind::Io, "failed writing '" + path + "'");
}

namespace detail {

struct ModelReader {
    std::istream& in;
    std::string source;
    std::size_t line_no = 0;
    std::string line;

    [[noreturn]] void fail(const std::string& what) const {
        throw Error(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + what);
    }

    std::vector<std::string_view> next(std::string_view tag) {
        if (!std::getline(in, line)) fail("unexpected end of file, expected '" + std::string(tag) + "'");
        ++line_no;
        auto cells = text::split(text::trim(line));
        if (!tag.empty() && cells.front() != tag) fail("expected '" + std::string(tag) + "' line");
        return cells;
    }

    double number(std::string_view cell) const {
        auto v = text::parse_double(cell);
        if (!v) fail("bad number '" + std::string(cell) + "'");
        return *v;
    }

    std::size_t count(std::string_view cell) const {
        auto v = text::parse_index(cell);
        if (!v) fail("bad integer '" + std::string(cell) + "'");
        return *v;
    }

    std::vector<double> numbers(const std::vector<std::string_view>& cells, std::size_t from, std::size_t n) const {
        if (cells.size() != from + n) fail("expected " + std::to_string(n) + " values");
        std::vector<double> out;
        for (std::size_t c = from; c < cells.size(); ++c) out.push_back(number(cells[c]));
        return out;
    }
};

}  // namespace detail

inline LannModel load_model(std::istream& in, const std::string& source = "<stream>") {
    detail::ModelReader r{in, source, 0, {}};
    if (r.next("").front() != kModelMagic) r.fail("not a LANN1 model file");

    auto dims = r.next("dims");
    if (dims.size() != 4) r.fail("dims line needs m, n and class count");
    const std::size_t m = r.count(dims[1]), n = r.count(dims[2]), classes = r.count(dims[3]);

    auto hyper_cells = r.next("hyper");
    if (hyper_cells.size() != 7) r.fail("hyper line needs 6 values");
    Hyperparams h;
    h.k = r.count(hyper_cells[1]);
    h.beta = r.number(hyper_cells[2]);
    h.learning_rate = r.number(hyper_cells[3]);
    h.epochs = r.count(hyper_cells[4]);
    h.epsilon = r.number(hyper_cells[5]);
    auto seed = text::trim(hyper_cells[6]);
    if (std::from_chars(seed.data(), seed.data() + seed.size(), h.seed).ec != std::errc{}) r.fail("bad seed");

    auto feat = r.next("features");
    if (feat.size() != n + 1) r.fail("features line needs " + std::to_string(n) + " names");
    std::vector<std::string> feature_names(feat.begin() + 1, feat.end());

    auto cells = r.next("");
    std::vector<std::string> class_names;
    if (cells.front() == "classes") {
        if (cells.size() != classes + 1) r.fail("classes line needs " + std::to_string(classes) + " names");
        class_names.assign(cells.begin() + 1, cells.end());
        cells = r.next("mean");
    } else if (cells.front() != "mean") {
        r.fail("expected 'mean' line");
    }
    Scaler scaler{r.numbers(cells, 1, n), r.numbers(r.next("stddev"), 1, n)};

    Matrix points(m, n);
    std::vector<Label> labels(m);
    std::vector<DiagonalMetric> metrics;
    metrics.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        auto row = r.next("");
        if (row.size() != 1 + 2 * n) r.fail("point line needs a label, " + std::to_string(n) + " features and " +
                                            std::to_string(n) + " weights");
        labels[i] = r.count(row[0]);
        for (std::size_t l = 0; l < n; ++l) points(i, l) = r.number(row[1 + l]);
        std::vector<double> w(n);
        for (std::size_t l = 0; l < n; ++l) w[l] = r.number(row[1 + n + l]);
        try {
            metrics.push_back(DiagonalMetric::from_normalized(std::move(w)));
        } catch (const Error& e) {
            r.fail(e.what());
        }
    }

    LannModel model{LabeledDataset(std::move(points), std::move(labels), classes, std::move(feature_names),
                                   std::move(class_names)),
                    std::move(metrics), h, std::move(scaler)};
    model.validate();
    h.validate();
    return model;
}

inline LannModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return load_model(in, path);
}

}  // namespace lann
