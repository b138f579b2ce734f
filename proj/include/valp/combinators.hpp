#pragma once

#include <map>
#include <span>
#include <string>

#include "valp/core.hpp"

namespace valp {

/// Result type of merging two data units: Samples absorbs everything,
/// Numeric absorbs Discrete, Discrete only survives with Discrete.
DataType combine_type(DataType a, DataType b);

/// Row-wise concatenation (a's columns then b's).
DataBatch concat(const DataBatch& a, const DataBatch& b);

/// Element-wise sum over the first min(a.width, b.width) columns.
DataBatch add(const DataBatch& a, const DataBatch& b);

/// Left fold of concat/add over `parts`; a single part is returned as is.
DataBatch combine(CombinerKind kind, std::span<const DataBatch> parts);

/// Width produced by folding parts of the given widths.
int combined_width(CombinerKind kind, std::span<const int> widths);

/// Inferred output type of every input and network.
using TypeReport = std::map<std::string, DataType>;

/// Output type a network of type `ntype` produces from input of type `in`.
DataType network_output_type(NetworkType ntype, DataType in);

/// Propagates types through the graph in topological order. Throws
/// CycleDetected, or MissingInput for a network with no incoming connection.
TypeReport infer_types(const ModelGraph& graph);

/// Like infer_types, but a network without inputs is typed as if it had a
/// Numeric input. Used on graphs still under construction.
TypeReport infer_types_partial(const ModelGraph& graph);

/// Combined type arriving at `target` (network input or model output), or
/// nullopt when nothing feeds it.
std::optional<DataType> incoming_type(const ModelGraph& graph, const TypeReport& types, std::string_view target);

}  // namespace valp
