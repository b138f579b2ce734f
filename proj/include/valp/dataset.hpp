#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "valp/core.hpp"
#include "valp/rng.hpp"

namespace valp {

struct IdxData {
    Matrix images;  ///< one row per image, pixels / 255
    std::vector<int> labels;
    int image_rows = 0;
    int image_cols = 0;
};

/// Big-endian IDX readers. Throws Io, BadMagic, TruncatedFile.
Matrix read_idx_images(const std::filesystem::path& path, int* image_rows = nullptr, int* image_cols = nullptr);
std::vector<int> read_idx_labels(const std::filesystem::path& path);

/// Both files of one split. Throws DimMismatch when the counts differ.
IdxData load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);

/// Named column groups of one split plus the raw integer labels.
struct DataSplit {
    std::map<std::string, Matrix> groups;
    std::vector<int> labels;

    Eigen::Index rows() const { return static_cast<Eigen::Index>(labels.size()); }
    bool has(const std::string& name) const { return groups.count(name) > 0; }
    /// Throws MissingColumn.
    const Matrix& group(const std::string& name) const;
    /// Rows `index` in the given order.
    DataSplit take(const std::vector<int>& index) const;
    DataSplit head(Eigen::Index n) const;
};

struct MultitaskDataset {
    DataSplit train;
    DataSplit test;
    int classes = 10;
};

/// Per-row histogram of values in [0, 1] over `bins` equal-width bins, as
/// frequencies. The value 1.0 falls in the last bin.
Matrix histogram_rows(const Matrix& x, int bins);

Matrix one_hot(const std::vector<int>& labels, int classes);

/// X, S = X, R = histogram rows, C = one-hot labels. Throws InvalidSpec for
/// bins < 2.
DataSplit build_multitask(const Matrix& x, const std::vector<int>& labels, int bins, int classes = 10);

/// The fashion-MNIST IDX files under `dir`, truncated to the first
/// `train_size` / `test_size` rows.
MultitaskDataset load_fashion(const std::filesystem::path& dir, int train_size, int test_size, int bins = 32);

/// VALP_DATA_DIR when set and non-empty.
std::optional<std::filesystem::path> data_dir_from_env();

/// Small learnable problem for the worked example: 10 features in [0, 1],
/// S = the first 5 features, R = their mean, C = the argmax over three
/// feature blocks.
MultitaskDataset synthetic_example_dataset(int train_rows, int test_rows, std::uint64_t seed, int classes = 3);

}  // namespace valp
