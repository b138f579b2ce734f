#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "valp/error.hpp"

namespace valp {

/// Row-major so that one batch example is one contiguous row.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class DataType { Numeric, Discrete, Samples };
enum class NetworkType { GenericMLP, Discretizer, Decoder };
enum class CombinerKind { Concat, Add };
enum class LossKind { Mse, CrossEntropy, SampleNll, KlToStdNormal };
enum class ComponentKind { Input, Network, Output };

std::string_view to_string(DataType t);
std::string_view to_string(NetworkType t);
std::string_view to_string(CombinerKind c);
std::string_view to_string(LossKind k);

DataType parse_data_type(std::string_view s);
NetworkType parse_network_type(std::string_view s);
CombinerKind parse_combiner(std::string_view s);
LossKind parse_loss_kind(std::string_view s);

/// Schema of a data unit: how many variables and how to interpret them.
class DataUnitSpec {
public:
    DataUnitSpec() = default;
    DataUnitSpec(int width, DataType dtype);

    int width() const { return width_; }
    DataType dtype() const { return dtype_; }

    friend bool operator==(const DataUnitSpec&, const DataUnitSpec&) = default;

private:
    int width_ = 1;
    DataType dtype_ = DataType::Numeric;
};

/// A runtime data unit: one row per example.
struct DataBatch {
    Matrix values;
    DataType dtype = DataType::Numeric;

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index width() const { return values.cols(); }
};

/// Throws DomainError unless every entry is finite and, for Discrete
/// batches, every row lies on the probability simplex (or is one-hot).
void check_batch(const DataBatch& batch, double tolerance = 1e-6);

struct ModelInputSpec {
    std::string id;
    DataUnitSpec spec;

    friend bool operator==(const ModelInputSpec&, const ModelInputSpec&) = default;
};

/// Per-layer initializer, activation and width of a dense network. The
/// input layer is implicit.
class NetworkParams {
public:
    NetworkParams() = default;
    NetworkParams(std::vector<std::string> init, std::vector<std::string> act, std::vector<int> ns);

    const std::vector<std::string>& init() const { return init_; }
    const std::vector<std::string>& act() const { return act_; }
    const std::vector<int>& ns() const { return ns_; }
    std::size_t layers() const { return ns_.size(); }

    friend bool operator==(const NetworkParams&, const NetworkParams&) = default;

private:
    std::vector<std::string> init_;
    std::vector<std::string> act_;
    std::vector<int> ns_;
};

/// Output activation every network of the given type must end with.
std::string_view final_activation(NetworkType t);

class PrimaryNetworkSpec {
public:
    PrimaryNetworkSpec() = default;
    PrimaryNetworkSpec(std::string id, NetworkType ntype, NetworkParams params, CombinerKind combiner,
                       DataUnitSpec out_spec);

    const std::string& id() const { return id_; }
    NetworkType ntype() const { return ntype_; }
    const NetworkParams& params() const { return params_; }
    CombinerKind combiner() const { return combiner_; }
    const DataUnitSpec& out_spec() const { return out_spec_; }

    /// GenericMLP outputs follow their inputs' type (Numeric or Samples);
    /// the other network types have a fixed output type.
    void set_out_dtype(DataType t);

    friend bool operator==(const PrimaryNetworkSpec&, const PrimaryNetworkSpec&) = default;

private:
    std::string id_;
    NetworkType ntype_ = NetworkType::GenericMLP;
    NetworkParams params_;
    CombinerKind combiner_ = CombinerKind::Concat;
    DataUnitSpec out_spec_;
};

struct ModelOutputSpec {
    std::string id;
    DataUnitSpec spec;
    CombinerKind combiner = CombinerKind::Add;

    friend bool operator==(const ModelOutputSpec&, const ModelOutputSpec&) = default;
};

using ConnectionId = std::uint32_t;

/// Directed edge carrying the source variables listed in `subset`.
class Connection {
public:
    Connection() = default;
    Connection(ConnectionId id, std::string source, std::string target, std::vector<int> subset);

    ConnectionId id() const { return id_; }
    const std::string& source() const { return source_; }
    const std::string& target() const { return target_; }
    const std::vector<int>& subset() const { return subset_; }
    int width() const { return static_cast<int>(subset_.size()); }

    friend bool operator==(const Connection&, const Connection&) = default;

private:
    ConnectionId id_ = 0;
    std::string source_;
    std::string target_;
    std::vector<int> subset_;
};

inline constexpr std::string_view kStdNormal = "StdNormal";

struct LossBinding {
    std::string id;
    LossKind kind = LossKind::Mse;
    std::string prediction_site;
    std::string truth_ref;
    double beta = 1.0;

    friend bool operator==(const LossBinding&, const LossBinding&) = default;
};

struct Hyperparams {
    double alpha = 0.5;
    int max_n = 11;
    double phi = 0.3;
    double learning_rate = 1e-3;
    int batch_size = 50;
    /// Training steps (minibatch updates).
    int epochs = 2000;

    friend bool operator==(const Hyperparams&, const Hyperparams&) = default;
};

/// Inputs, networks, outputs, connections, loss bindings and
/// hyperparameters of one model. Containers keep insertion order.
struct ModelGraph {
    std::vector<ModelInputSpec> inputs;
    std::vector<PrimaryNetworkSpec> networks;
    std::vector<ModelOutputSpec> outputs;
    std::vector<Connection> connections;
    std::vector<LossBinding> losses;
    Hyperparams hyper;
    std::set<ConnectionId> deleted_at_inference;

    const ModelInputSpec* find_input(std::string_view id) const;
    const PrimaryNetworkSpec* find_network(std::string_view id) const;
    PrimaryNetworkSpec* find_network(std::string_view id);
    const ModelOutputSpec* find_output(std::string_view id) const;
    const Connection* find_connection(ConnectionId id) const;

    std::optional<ComponentKind> kind_of(std::string_view id) const;
    bool contains(std::string_view id) const { return kind_of(id).has_value(); }

    /// Connections into `target`, ascending connection id.
    std::vector<const Connection*> incoming(std::string_view target) const;
    std::vector<const Connection*> outgoing(std::string_view source) const;
    bool has_edge(std::string_view source, std::string_view target) const;

    /// Smallest id not yet used by any connection.
    ConnectionId next_connection_id() const;

    friend bool operator==(const ModelGraph&, const ModelGraph&) = default;
};

/// Every component id exactly once, sources before targets. Ties are broken
/// by lexicographic id. Throws CycleDetected naming a component on a cycle.
std::vector<std::string> topological_order(const ModelGraph& graph);

/// Declared width of an input, network output or model output.
int component_width(const ModelGraph& graph, std::string_view id);

/// True when `to` can be reached from `from` along connections.
bool reachable(const ModelGraph& graph, std::string_view from, std::string_view to);

}  // namespace valp
