#include "valp/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include <nlohmann/json.hpp>

#include "valp/graph_io.hpp"

namespace valp {

namespace {

std::string_view activation_name(Activation a) {
    switch (a) {
        case Activation::Identity: return "identity";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softmax: return "softmax";
    }
    return "identity";
}

void put(std::vector<unsigned char>& out, const double* data, Eigen::Index count) {
    for (Eigen::Index i = 0; i < count; ++i) {
        auto bits = std::bit_cast<std::uint64_t>(data[i]);
        for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>(bits >> (8 * b)));
    }
}

void get(const std::vector<unsigned char>& in, std::size_t offset, double* data, Eigen::Index count) {
    if (offset + static_cast<std::size_t>(count) * 8 > in.size()) {
        throw Error(ErrorKind::TruncatedFile, "weights blob is shorter than its index");
    }
    for (Eigen::Index i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b) bits |= std::uint64_t{in[offset + 8 * static_cast<std::size_t>(i) + b]} << (8 * b);
        data[i] = std::bit_cast<double>(bits);
    }
}

std::filesystem::path blob_path(const std::filesystem::path& path) { return path.string() + ".bin"; }

}  // namespace

void save_weights(const WeightMap& weights, const std::filesystem::path& path) {
    nlohmann::json index;
    index["format"] = "valp-weights-1";
    index["blob"] = blob_path(path).filename().string();
    std::vector<unsigned char> blob;
    for (const auto& [id, w] : weights) {
        nlohmann::json layers = nlohmann::json::array();
        for (const auto& l : w.layers) {
            nlohmann::json j{{"rows", l.weights.rows()},
                             {"cols", l.weights.cols()},
                             {"activation", activation_name(l.activation)},
                             {"weights_offset", blob.size()}};
            put(blob, l.weights.data(), l.weights.size());
            j["biases_offset"] = blob.size();
            put(blob, l.biases.data(), l.biases.size());
            layers.push_back(j);
        }
        index["networks"][id] = layers;
    }
    write_text_file(path, index.dump(2) + "\n");
    std::ofstream out(blob_path(path), std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + blob_path(path).string());
    out.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
}

WeightMap load_weights(const std::filesystem::path& path) {
    const nlohmann::json index = read_json_file(path);
    std::ifstream in(blob_path(path), std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + blob_path(path).string());
    const std::vector<unsigned char> blob{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    WeightMap out;
    try {
        for (const auto& [id, layers] : index.at("networks").items()) {
            NetworkWeights w;
            for (const auto& j : layers) {
                const auto rows = j.at("rows").get<Eigen::Index>();
                const auto cols = j.at("cols").get<Eigen::Index>();
                LayerParams l{Matrix(rows, cols), Vector(cols), parse_activation(j.at("activation").get<std::string>())};
                get(blob, j.at("weights_offset").get<std::size_t>(), l.weights.data(), l.weights.size());
                get(blob, j.at("biases_offset").get<std::size_t>(), l.biases.data(), l.biases.size());
                w.layers.push_back(std::move(l));
            }
            out.emplace(id, std::move(w));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
    return out;
}

}  // namespace valp
