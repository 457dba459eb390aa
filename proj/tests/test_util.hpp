#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lann/lann.hpp"

namespace lann::testing {

inline std::string data_path(const std::string& name) { return std::string(LANN_DATA_DIR) + "/" + name; }

inline LabeledDataset make_dataset(std::vector<std::vector<double>> rows, std::vector<Label> labels,
                                   std::size_t classes) {
    const std::size_t n = rows.front().size();
    Matrix pts(rows.size(), n);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t l = 0; l < n; ++l) pts(i, l) = rows[i][l];
    }
    return LabeledDataset(std::move(pts), std::move(labels), classes);
}

/// Model over `data` with identity metrics and an identity scaler.
inline LannModel identity_model(const LabeledDataset& data, Hyperparams hyper = {}) {
    const std::size_t n = data.dim();
    return LannModel{data, std::vector<DiagonalMetric>(data.size(), identity_metric(n)), hyper,
                     Scaler{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)}};
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("lann_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace lann::testing
