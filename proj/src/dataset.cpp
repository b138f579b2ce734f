#include "valp/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>

namespace valp {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t be32(const std::vector<unsigned char>& b, std::size_t at, const std::filesystem::path& path) {
    if (b.size() < at + 4) throw Error(ErrorKind::TruncatedFile, path.string() + ": header cut short");
    return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) | (std::uint32_t{b[at + 2]} << 8) |
           std::uint32_t{b[at + 3]};
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
    if (got != want) {
        char buf[64];
        std::snprintf(buf, sizeof buf, ": magic 0x%08x, expected 0x%08x", got, want);
        throw Error(ErrorKind::BadMagic, path.string() + buf);
    }
}

}  // namespace

Matrix read_idx_images(const std::filesystem::path& path, int* image_rows, int* image_cols) {
    const auto bytes = read_all(path);
    check_magic(be32(bytes, 0, path), kImageMagic, path);
    const std::uint64_t n = be32(bytes, 4, path);
    const std::uint64_t r = be32(bytes, 8, path);
    const std::uint64_t c = be32(bytes, 12, path);
    const std::uint64_t need = 16 + n * r * c;
    if (bytes.size() < need) {
        throw Error(ErrorKind::TruncatedFile, path.string() + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                                                  std::to_string(need));
    }
    Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r * c));
    for (std::uint64_t i = 0; i < n * r * c; ++i) x.data()[i] = bytes[16 + i] / 255.0;
    if (image_rows) *image_rows = static_cast<int>(r);
    if (image_cols) *image_cols = static_cast<int>(c);
    return x;
}

std::vector<int> read_idx_labels(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    check_magic(be32(bytes, 0, path), kLabelMagic, path);
    const std::uint64_t n = be32(bytes, 4, path);
    if (bytes.size() < 8 + n) {
        throw Error(ErrorKind::TruncatedFile, path.string() + ": " + std::to_string(bytes.size()) + " bytes, expected " +
                                                  std::to_string(8 + n));
    }
    return {bytes.begin() + 8, bytes.begin() + 8 + static_cast<std::ptrdiff_t>(n)};
}

IdxData load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    IdxData d;
    d.images = read_idx_images(images_path, &d.image_rows, &d.image_cols);
    d.labels = read_idx_labels(labels_path);
    if (static_cast<Eigen::Index>(d.labels.size()) != d.images.rows()) {
        throw Error(ErrorKind::DimMismatch, std::to_string(d.images.rows()) + " images but " +
                                                std::to_string(d.labels.size()) + " labels");
    }
    return d;
}

const Matrix& DataSplit::group(const std::string& name) const {
    const auto it = groups.find(name);
    if (it == groups.end()) throw Error(ErrorKind::MissingColumn, "dataset has no column group '" + name + "'");
    return it->second;
}

DataSplit DataSplit::take(const std::vector<int>& index) const {
    DataSplit out;
    for (const auto& [name, m] : groups) {
        Matrix sub(static_cast<Eigen::Index>(index.size()), m.cols());
        for (std::size_t i = 0; i < index.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = m.row(index[i]);
        out.groups.emplace(name, std::move(sub));
    }
    out.labels.reserve(index.size());
    for (int i : index) out.labels.push_back(labels[static_cast<std::size_t>(i)]);
    return out;
}

DataSplit DataSplit::head(Eigen::Index n) const {
    std::vector<int> index(static_cast<std::size_t>(std::min(n, rows())));
    for (std::size_t i = 0; i < index.size(); ++i) index[i] = static_cast<int>(i);
    return take(index);
}

Matrix histogram_rows(const Matrix& x, int bins) {
    if (bins < 2) throw Error(ErrorKind::InvalidSpec, "histogram needs at least 2 bins");
    Matrix h = Matrix::Zero(x.rows(), bins);
    if (x.cols() == 0) return h;
    const double unit = 1.0 / static_cast<double>(x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        for (Eigen::Index c = 0; c < x.cols(); ++c) {
            const double v = std::clamp(x(r, c), 0.0, 1.0);
            const int b = std::min(bins - 1, static_cast<int>(v * bins));
            h(r, b) += unit;
        }
    }
    return h;
}

Matrix one_hot(const std::vector<int>& labels, int classes) {
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] >= classes) {
            throw Error(ErrorKind::DomainError, "label " + std::to_string(labels[i]) + " outside [0, " +
                                                    std::to_string(classes) + ")");
        }
        m(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    }
    return m;
}

DataSplit build_multitask(const Matrix& x, const std::vector<int>& labels, int bins, int classes) {
    if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
        throw Error(ErrorKind::DimMismatch, "row count differs from label count");
    }
    DataSplit s;
    s.groups["X"] = x;
    s.groups["S"] = x;
    s.groups["R"] = histogram_rows(x, bins);
    s.groups["C"] = one_hot(labels, classes);
    s.labels = labels;
    return s;
}

MultitaskDataset load_fashion(const std::filesystem::path& dir, int train_size, int test_size, int bins) {
    MultitaskDataset d;
    const IdxData train = load_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
    const IdxData test = load_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
    const auto ntr = std::min<Eigen::Index>(train_size, train.images.rows());
    const auto nte = std::min<Eigen::Index>(test_size, test.images.rows());
    d.train = build_multitask(train.images.topRows(ntr),
                              std::vector<int>(train.labels.begin(), train.labels.begin() + ntr), bins);
    d.test = build_multitask(test.images.topRows(nte), std::vector<int>(test.labels.begin(), test.labels.begin() + nte),
                             bins);
    return d;
}

std::optional<std::filesystem::path> data_dir_from_env() {
    const char* v = std::getenv("VALP_DATA_DIR");
    if (!v || !*v) return std::nullopt;
    return std::filesystem::path(v);
}

namespace {

DataSplit synthetic_split(int rows, int classes, Rng& rng) {
    Matrix x(rows, 10);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform();
    std::vector<int> labels(static_cast<std::size_t>(rows));
    const int block = std::max(1, 10 / classes);
    for (int r = 0; r < rows; ++r) {
        int best = 0;
        double best_sum = -1.0;
        for (int k = 0; k < classes; ++k) {
            double s = 0.0;
            for (int c = k * block; c < std::min(10, (k + 1) * block); ++c) s += x(r, c);
            if (s > best_sum) {
                best_sum = s;
                best = k;
            }
        }
        labels[static_cast<std::size_t>(r)] = best;
    }
    DataSplit s;
    s.groups["X"] = x;
    s.groups["S"] = x.leftCols(5);
    s.groups["R"] = x.leftCols(5).rowwise().mean();
    s.groups["C"] = one_hot(labels, classes);
    s.labels = std::move(labels);
    return s;
}

}  // namespace

MultitaskDataset synthetic_example_dataset(int train_rows, int test_rows, std::uint64_t seed, int classes) {
    Rng rng(seed);
    MultitaskDataset d;
    d.classes = classes;
    d.train = synthetic_split(train_rows, classes, rng);
    d.test = synthetic_split(test_rows, classes, rng);
    return d;
}

}  // namespace valp
