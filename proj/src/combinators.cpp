#include "valp/combinators.hpp"

#include <algorithm>
#include <numeric>

namespace valp {

DataType combine_type(DataType a, DataType b) {
    if (a == DataType::Samples || b == DataType::Samples) return DataType::Samples;
    if (a == DataType::Numeric || b == DataType::Numeric) return DataType::Numeric;
    return DataType::Discrete;
}

namespace {

void require_rows(const DataBatch& a, const DataBatch& b) {
    if (a.rows() != b.rows()) {
        throw Error(ErrorKind::RowMismatch,
                    "rows " + std::to_string(a.rows()) + " vs " + std::to_string(b.rows()));
    }
}

}  // namespace

DataBatch concat(const DataBatch& a, const DataBatch& b) {
    require_rows(a, b);
    DataBatch out;
    out.dtype = combine_type(a.dtype, b.dtype);
    out.values.resize(a.rows(), a.width() + b.width());
    out.values.leftCols(a.width()) = a.values;
    out.values.rightCols(b.width()) = b.values;
    return out;
}

DataBatch add(const DataBatch& a, const DataBatch& b) {
    require_rows(a, b);
    const Eigen::Index n = std::min(a.width(), b.width());
    DataBatch out;
    out.dtype = combine_type(a.dtype, b.dtype);
    out.values = a.values.leftCols(n) + b.values.leftCols(n);
    return out;
}

DataBatch combine(CombinerKind kind, std::span<const DataBatch> parts) {
    if (parts.empty()) throw Error(ErrorKind::EmptyInput, "nothing to combine");
    DataBatch acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        acc = kind == CombinerKind::Concat ? concat(acc, parts[i]) : add(acc, parts[i]);
    }
    return acc;
}

int combined_width(CombinerKind kind, std::span<const int> widths) {
    if (widths.empty()) return 0;
    if (kind == CombinerKind::Concat) return std::accumulate(widths.begin(), widths.end(), 0);
    return *std::min_element(widths.begin(), widths.end());
}

DataType network_output_type(NetworkType ntype, DataType in) {
    switch (ntype) {
        case NetworkType::GenericMLP: return in == DataType::Samples ? DataType::Samples : DataType::Numeric;
        case NetworkType::Discretizer: return DataType::Discrete;
        case NetworkType::Decoder: return DataType::Samples;
    }
    return DataType::Numeric;
}

std::optional<DataType> incoming_type(const ModelGraph& graph, const TypeReport& types, std::string_view target) {
    std::optional<DataType> acc;
    for (const Connection* c : graph.incoming(target)) {
        const auto it = types.find(c->source());
        if (it == types.end()) continue;
        acc = acc ? combine_type(*acc, it->second) : it->second;
    }
    return acc;
}

namespace {

TypeReport infer(const ModelGraph& graph, bool allow_missing) {
    TypeReport report;
    for (const auto& id : topological_order(graph)) {
        if (const auto* in = graph.find_input(id)) {
            report[id] = in->spec.dtype();
        } else if (const auto* net = graph.find_network(id)) {
            auto in_type = incoming_type(graph, report, id);
            if (!in_type) {
                if (!allow_missing) throw Error(ErrorKind::MissingInput, "network '" + id + "' has no input");
                in_type = DataType::Numeric;
            }
            report[id] = network_output_type(net->ntype(), *in_type);
        }
    }
    return report;
}

}  // namespace

TypeReport infer_types(const ModelGraph& graph) { return infer(graph, false); }

TypeReport infer_types_partial(const ModelGraph& graph) { return infer(graph, true); }

}  // namespace valp
