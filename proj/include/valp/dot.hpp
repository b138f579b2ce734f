#pragma once

#include <string>

#include "valp/core.hpp"

namespace valp {

/// Graphviz digraph: inputs as circles, networks as triangles, outputs as
/// squares; edges labelled with their subset width, inference-deleted edges
/// dotted.
std::string export_dot(const ModelGraph& graph);

}  // namespace valp
