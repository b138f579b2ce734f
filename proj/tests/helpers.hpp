#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "valp/core.hpp"
#include "valp/dataset.hpp"
#include "valp/rng.hpp"

namespace test {

using valp::Matrix;

inline Matrix mat(std::initializer_list<std::initializer_list<double>> rows) {
    const auto r = static_cast<Eigen::Index>(rows.size());
    const auto c = static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(r, c);
    Eigen::Index i = 0;
    for (const auto& row : rows) {
        Eigen::Index j = 0;
        for (double v : row) m(i, j++) = v;
        ++i;
    }
    return m;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, valp::Rng& rng, double lo = -1.0, double hi = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
    return m;
}

/// Central differences of f with respect to every entry of x.
inline Matrix numeric_gradient(const std::function<double()>& f, Matrix& x, double h = 1e-5) {
    Matrix g(x.rows(), x.cols());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x.data()[i];
        x.data()[i] = keep + h;
        const double up = f();
        x.data()[i] = keep - h;
        const double down = f();
        x.data()[i] = keep;
        g.data()[i] = (up - down) / (2.0 * h);
    }
    return g;
}

/// ||a - b|| / max(||a||, ||b||, floor).
inline double relative_error(const Matrix& a, const Matrix& b, double floor = 1e-10) {
    const double scale = std::max({a.norm(), b.norm(), floor});
    return (a - b).norm() / scale;
}

inline std::vector<int> iota(int n) {
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 0);
    return v;
}

inline valp::PrimaryNetworkSpec net(const std::string& id, valp::NetworkType type, std::vector<int> hidden, int out,
                                    valp::DataType dtype, valp::CombinerKind combiner = valp::CombinerKind::Concat,
                                    const std::string& act = "tanh") {
    std::vector<std::string> init, acts;
    for (std::size_t i = 0; i < hidden.size(); ++i) acts.push_back(act);
    hidden.push_back(out);
    acts.emplace_back(valp::final_activation(type));
    init.assign(hidden.size(), "xavier_uniform");
    return valp::PrimaryNetworkSpec(id, type, valp::NetworkParams(init, acts, hidden), combiner,
                                    valp::DataUnitSpec(out, dtype));
}

/// Small smooth model touching every combiner path: a decoder fed by two
/// MLPs, an Add-combined regressor, a Concat-combined classifier.
inline valp::ModelGraph tiny_graph() {
    using namespace valp;
    ModelGraph g;
    g.inputs = {{"i0", DataUnitSpec(4, DataType::Numeric)}};
    g.networks = {
        net("n0", NetworkType::GenericMLP, {5}, 4, DataType::Numeric),
        net("n1", NetworkType::GenericMLP, {3}, 6, DataType::Numeric),
        net("n2", NetworkType::Decoder, {5}, 3, DataType::Samples),
        net("n3", NetworkType::GenericMLP, {4}, 2, DataType::Numeric, CombinerKind::Add),
        net("n4", NetworkType::Discretizer, {4}, 3, DataType::Discrete),
    };
    g.outputs = {
        {"o0", DataUnitSpec(3, DataType::Samples), CombinerKind::Add},
        {"o1", DataUnitSpec(2, DataType::Numeric), CombinerKind::Add},
        {"o2", DataUnitSpec(3, DataType::Discrete), CombinerKind::Add},
    };
    g.connections = {
        Connection(0, "i0", "n0", {0, 1, 2, 3}),
        Connection(1, "i0", "n1", {1, 3}),
        Connection(2, "n0", "n2", {0, 1, 2, 3}),
        Connection(3, "n1", "n2", {0, 2, 4, 5}),
        Connection(4, "n0", "n3", {1, 2, 3}),
        Connection(5, "i0", "n3", {0, 1, 2, 3}),
        Connection(6, "n0", "n4", {0, 3}),
        Connection(7, "n1", "n4", {1, 2, 3}),
        Connection(8, "n2", "o0", {0, 1, 2}),
        Connection(9, "n3", "o1", {0, 1}),
        Connection(10, "n4", "o2", {0, 1, 2}),
    };
    g.losses = {
        {"L0", LossKind::SampleNll, "o0", "S", 0.7},
        {"L1", LossKind::Mse, "o1", "R", 1.3},
        {"L2", LossKind::CrossEntropy, "o2", "C", 0.9},
        {"L3", LossKind::KlToStdNormal, "n0", std::string(kStdNormal), 0.5},
        {"L4", LossKind::KlToStdNormal, "n1", std::string(kStdNormal), 0.25},
    };
    g.hyper.max_n = 5;
    g.deleted_at_inference = {2};
    return g;
}

inline valp::DataSplit tiny_split(int rows, valp::Rng& rng) {
    valp::DataSplit s;
    s.groups["X"] = random_matrix(rows, 4, rng);
    s.groups["S"] = random_matrix(rows, 3, rng, 0.0, 1.0);
    s.groups["R"] = random_matrix(rows, 2, rng);
    for (int r = 0; r < rows; ++r) s.labels.push_back(static_cast<int>(rng.below(3)));
    s.groups["C"] = valp::one_hot(s.labels, 3);
    return s;
}

/// Fashion-shaped data (784 pixels, 10 classes) whose class is written into
/// a bright band of rows, so it is learnable in a few steps.
inline valp::MultitaskDataset fake_fashion(int train_rows, int test_rows, std::uint64_t seed, int bins = 32) {
    valp::Rng rng(seed);
    auto split = [&](int rows) {
        Matrix x(rows, 784);
        std::vector<int> labels;
        for (int r = 0; r < rows; ++r) {
            const int label = r % 10;
            labels.push_back(label);
            for (int p = 0; p < 784; ++p) {
                const int band = (p / 28) / 3;
                x(r, p) = band == label ? 0.6 + 0.4 * rng.uniform() : 0.2 * rng.uniform();
            }
        }
        return valp::build_multitask(x, labels, bins);
    };
    valp::MultitaskDataset d;
    d.train = split(train_rows);
    d.test = split(test_rows);
    return d;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::filesystem::path temp_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("valp_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace test

namespace test {

/// Compares `text` with a recorded golden file, recording it when absent.
inline bool matches_golden(const std::string& name, const std::string& text) {
    const std::filesystem::path path = std::filesystem::path(VALP_GOLDEN_DIR) / name;
    if (!std::filesystem::exists(path)) {
        std::ofstream(path, std::ios::binary) << text;
        return true;
    }
    return read_file(path) == text;
}

}  // namespace test
