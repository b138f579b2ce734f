#include "valp/core.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <queue>
#include <unordered_map>

namespace valp {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::CycleDetected: return "CycleDetected";
        case ErrorKind::UnknownId: return "UnknownId";
        case ErrorKind::InvalidSpec: return "InvalidSpec";
        case ErrorKind::RowMismatch: return "RowMismatch";
        case ErrorKind::EmptyInput: return "EmptyInput";
        case ErrorKind::MissingInput: return "MissingInput";
        case ErrorKind::InfeasibleBudget: return "InfeasibleBudget";
        case ErrorKind::NoEligibleInput: return "NoEligibleInput";
        case ErrorKind::DtypeMismatch: return "DtypeMismatch";
        case ErrorKind::UnknownInitializer: return "UnknownInitializer";
        case ErrorKind::UnknownActivation: return "UnknownActivation";
        case ErrorKind::ShapeMismatch: return "ShapeMismatch";
        case ErrorKind::DomainError: return "DomainError";
        case ErrorKind::OddWidth: return "OddWidth";
        case ErrorKind::InvalidGraph: return "InvalidGraph";
        case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
        case ErrorKind::Unconditioned: return "Unconditioned";
        case ErrorKind::LengthMismatch: return "LengthMismatch";
        case ErrorKind::EmptyLabels: return "EmptyLabels";
        case ErrorKind::FloorNotMet: return "FloorNotMet";
        case ErrorKind::BadMagic: return "BadMagic";
        case ErrorKind::TruncatedFile: return "TruncatedFile";
        case ErrorKind::DimMismatch: return "DimMismatch";
        case ErrorKind::MissingColumn: return "MissingColumn";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Parse: return "Parse";
    }
    return "Unknown";
}

std::string_view to_string(DataType t) {
    switch (t) {
        case DataType::Numeric: return "numeric";
        case DataType::Discrete: return "discrete";
        case DataType::Samples: return "samples";
    }
    return "?";
}

std::string_view to_string(NetworkType t) {
    switch (t) {
        case NetworkType::GenericMLP: return "generic_mlp";
        case NetworkType::Discretizer: return "discretizer";
        case NetworkType::Decoder: return "decoder";
    }
    return "?";
}

std::string_view to_string(CombinerKind c) {
    return c == CombinerKind::Concat ? "concat" : "add";
}

std::string_view to_string(LossKind k) {
    switch (k) {
        case LossKind::Mse: return "mse";
        case LossKind::CrossEntropy: return "cross_entropy";
        case LossKind::SampleNll: return "sample_nll";
        case LossKind::KlToStdNormal: return "kl_std_normal";
    }
    return "?";
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const E (&values)[N], const char* what) {
    for (E v : values) {
        if (to_string(v) == s) return v;
    }
    throw Error(ErrorKind::Parse, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

}  // namespace

DataType parse_data_type(std::string_view s) {
    static constexpr DataType all[] = {DataType::Numeric, DataType::Discrete, DataType::Samples};
    return parse_enum(s, all, "data type");
}

NetworkType parse_network_type(std::string_view s) {
    static constexpr NetworkType all[] = {NetworkType::GenericMLP, NetworkType::Discretizer,
                                          NetworkType::Decoder};
    return parse_enum(s, all, "network type");
}

CombinerKind parse_combiner(std::string_view s) {
    static constexpr CombinerKind all[] = {CombinerKind::Concat, CombinerKind::Add};
    return parse_enum(s, all, "combiner");
}

LossKind parse_loss_kind(std::string_view s) {
    static constexpr LossKind all[] = {LossKind::Mse, LossKind::CrossEntropy, LossKind::SampleNll,
                                       LossKind::KlToStdNormal};
    return parse_enum(s, all, "loss kind");
}

DataUnitSpec::DataUnitSpec(int width, DataType dtype) : width_(width), dtype_(dtype) {
    if (width < 1) throw Error(ErrorKind::InvalidSpec, "data unit width must be >= 1");
}

void check_batch(const DataBatch& batch, double tolerance) {
    if (!batch.values.allFinite()) throw Error(ErrorKind::DomainError, "batch has non-finite values");
    if (batch.dtype != DataType::Discrete) return;
    for (Eigen::Index r = 0; r < batch.rows(); ++r) {
        const auto row = batch.values.row(r);
        if (row.minCoeff() < -tolerance || std::abs(row.sum() - 1.0) > tolerance) {
            throw Error(ErrorKind::DomainError,
                        "discrete row " + std::to_string(r) + " is not a probability vector");
        }
    }
}

NetworkParams::NetworkParams(std::vector<std::string> init, std::vector<std::string> act, std::vector<int> ns)
    : init_(std::move(init)), act_(std::move(act)), ns_(std::move(ns)) {
    if (ns_.empty()) throw Error(ErrorKind::InvalidSpec, "network needs at least one layer");
    if (init_.size() != ns_.size() || act_.size() != ns_.size()) {
        throw Error(ErrorKind::InvalidSpec, "init, act and ns must have equal length");
    }
    for (int n : ns_) {
        if (n < 1) throw Error(ErrorKind::InvalidSpec, "layer width must be >= 1");
    }
}

std::string_view final_activation(NetworkType t) {
    switch (t) {
        case NetworkType::GenericMLP: return "identity";
        case NetworkType::Discretizer: return "softmax";
        case NetworkType::Decoder: return "sigmoid";
    }
    return "identity";
}

PrimaryNetworkSpec::PrimaryNetworkSpec(std::string id, NetworkType ntype, NetworkParams params,
                                       CombinerKind combiner, DataUnitSpec out_spec)
    : id_(std::move(id)), ntype_(ntype), params_(std::move(params)), combiner_(combiner), out_spec_(out_spec) {
    if (params_.layers() == 0) throw Error(ErrorKind::InvalidSpec, id_ + ": missing parametrization");
    if (params_.ns().back() != out_spec_.width()) {
        throw Error(ErrorKind::InvalidSpec, id_ + ": output width must equal the last layer width");
    }
    if (params_.act().back() != final_activation(ntype_)) {
        throw Error(ErrorKind::InvalidSpec, id_ + ": last activation of a " + std::string(to_string(ntype_)) +
                                                " must be " + std::string(final_activation(ntype_)));
    }
    set_out_dtype(out_spec_.dtype());
}

void PrimaryNetworkSpec::set_out_dtype(DataType t) {
    const bool ok = (ntype_ == NetworkType::Discretizer && t == DataType::Discrete) ||
                    (ntype_ == NetworkType::Decoder && t == DataType::Samples) ||
                    (ntype_ == NetworkType::GenericMLP && t != DataType::Discrete);
    if (!ok) {
        throw Error(ErrorKind::InvalidSpec, id_ + ": a " + std::string(to_string(ntype_)) + " cannot produce " +
                                                std::string(to_string(t)) + " data");
    }
    out_spec_ = DataUnitSpec(out_spec_.width(), t);
}

Connection::Connection(ConnectionId id, std::string source, std::string target, std::vector<int> subset)
    : id_(id), source_(std::move(source)), target_(std::move(target)), subset_(std::move(subset)) {
    const std::string name = "c" + std::to_string(id_);
    if (subset_.empty()) throw Error(ErrorKind::InvalidSpec, name + ": empty variable subset");
    if (subset_.front() < 0) throw Error(ErrorKind::InvalidSpec, name + ": negative variable index");
    if (!std::is_sorted(subset_.begin(), subset_.end()) ||
        std::adjacent_find(subset_.begin(), subset_.end()) != subset_.end()) {
        throw Error(ErrorKind::InvalidSpec, name + ": subset must be strictly increasing");
    }
    if (source_ == target_) throw Error(ErrorKind::InvalidSpec, name + ": self connection");
}

const ModelInputSpec* ModelGraph::find_input(std::string_view id) const {
    for (const auto& i : inputs) {
        if (i.id == id) return &i;
    }
    return nullptr;
}

const PrimaryNetworkSpec* ModelGraph::find_network(std::string_view id) const {
    for (const auto& n : networks) {
        if (n.id() == id) return &n;
    }
    return nullptr;
}

PrimaryNetworkSpec* ModelGraph::find_network(std::string_view id) {
    for (auto& n : networks) {
        if (n.id() == id) return &n;
    }
    return nullptr;
}

const ModelOutputSpec* ModelGraph::find_output(std::string_view id) const {
    for (const auto& o : outputs) {
        if (o.id == id) return &o;
    }
    return nullptr;
}

const Connection* ModelGraph::find_connection(ConnectionId id) const {
    for (const auto& c : connections) {
        if (c.id() == id) return &c;
    }
    return nullptr;
}

std::optional<ComponentKind> ModelGraph::kind_of(std::string_view id) const {
    if (find_input(id)) return ComponentKind::Input;
    if (find_network(id)) return ComponentKind::Network;
    if (find_output(id)) return ComponentKind::Output;
    return std::nullopt;
}

std::vector<const Connection*> ModelGraph::incoming(std::string_view target) const {
    std::vector<const Connection*> out;
    for (const auto& c : connections) {
        if (c.target() == target) out.push_back(&c);
    }
    std::sort(out.begin(), out.end(), [](const Connection* a, const Connection* b) { return a->id() < b->id(); });
    return out;
}

std::vector<const Connection*> ModelGraph::outgoing(std::string_view source) const {
    std::vector<const Connection*> out;
    for (const auto& c : connections) {
        if (c.source() == source) out.push_back(&c);
    }
    std::sort(out.begin(), out.end(), [](const Connection* a, const Connection* b) { return a->id() < b->id(); });
    return out;
}

bool ModelGraph::has_edge(std::string_view source, std::string_view target) const {
    return std::any_of(connections.begin(), connections.end(),
                       [&](const Connection& c) { return c.source() == source && c.target() == target; });
}

ConnectionId ModelGraph::next_connection_id() const {
    ConnectionId next = 0;
    for (const auto& c : connections) next = std::max(next, c.id() + 1);
    return next;
}

std::vector<std::string> topological_order(const ModelGraph& graph) {
    std::map<std::string, int> indegree;
    for (const auto& i : graph.inputs) indegree[i.id] = 0;
    for (const auto& n : graph.networks) indegree[n.id()] = 0;
    for (const auto& o : graph.outputs) indegree[o.id] = 0;

    std::unordered_map<std::string, std::vector<std::string>> succ;
    for (const auto& c : graph.connections) {
        if (!indegree.count(c.source()) || !indegree.count(c.target())) {
            throw Error(ErrorKind::UnknownId, "connection c" + std::to_string(c.id()) + " references an unknown component");
        }
        ++indegree[c.target()];
        succ[c.source()].push_back(c.target());
    }

    std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
    for (const auto& [id, deg] : indegree) {
        if (deg == 0) ready.push(id);
    }
    std::vector<std::string> order;
    order.reserve(indegree.size());
    while (!ready.empty()) {
        std::string id = ready.top();
        ready.pop();
        for (const auto& next : succ[id]) {
            if (--indegree[next] == 0) ready.push(next);
        }
        order.push_back(std::move(id));
    }
    if (order.size() != indegree.size()) {
        // Every unprocessed node has an unprocessed predecessor; walking
        // predecessors must revisit a node, and that node is on a cycle.
        std::string cur;
        for (const auto& [id, deg] : indegree) {
            if (deg > 0) {
                cur = id;
                break;
            }
        }
        std::set<std::string> visited;
        while (visited.insert(cur).second) {
            for (const auto& c : graph.connections) {
                if (c.target() == cur && indegree[c.source()] > 0) {
                    cur = c.source();
                    break;
                }
            }
        }
        throw Error(ErrorKind::CycleDetected, "component '" + cur + "' lies on a cycle");
    }
    return order;
}

int component_width(const ModelGraph& graph, std::string_view id) {
    if (const auto* i = graph.find_input(id)) return i->spec.width();
    if (const auto* n = graph.find_network(id)) return n->out_spec().width();
    if (const auto* o = graph.find_output(id)) return o->spec.width();
    throw Error(ErrorKind::UnknownId, "no component '" + std::string(id) + "'");
}

bool reachable(const ModelGraph& graph, std::string_view from, std::string_view to) {
    if (from == to) return true;
    std::vector<std::string> stack{std::string(from)};
    std::set<std::string> seen{std::string(from)};
    while (!stack.empty()) {
        const std::string cur = std::move(stack.back());
        stack.pop_back();
        for (const auto& c : graph.connections) {
            if (c.source() != cur) continue;
            if (c.target() == to) return true;
            if (seen.insert(c.target()).second) stack.push_back(c.target());
        }
    }
    return false;
}

}  // namespace valp
