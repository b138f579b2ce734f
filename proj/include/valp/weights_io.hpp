#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "valp/nnet.hpp"

namespace valp {

using WeightMap = std::map<std::string, NetworkWeights>;

/// Writes `path` (a JSON index of shapes, activations and byte offsets keyed
/// by network id and layer) and the sibling `path` + ".bin" holding every
/// matrix as little-endian float64, row-major, weights before biases.
void save_weights(const WeightMap& weights, const std::filesystem::path& path);

/// Throws Io, Parse or TruncatedFile.
WeightMap load_weights(const std::filesystem::path& path);

}  // namespace valp
