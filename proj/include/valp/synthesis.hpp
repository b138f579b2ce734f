#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "valp/core.hpp"
#include "valp/rng.hpp"

namespace valp {

struct IntRange {
    int lo = 1;
    int hi = 1;

    friend bool operator==(const IntRange&, const IntRange&) = default;
};

/// β weight for each loss kind.
struct LossBetas {
    double mse = 1.0;
    double cross_entropy = 1.0;
    double sample_nll = 1.0;
    double kl = 1e-4;

    double of(LossKind kind) const;

    friend bool operator==(const LossBetas&, const LossBetas&) = default;
};

struct SynthesisConfig {
    double alpha = 0.5;
    int max_n = 11;
    double phi = 0.3;
    IntRange hidden_layer_range{1, 3};
    IntRange neuron_range{5, 50};
    IntRange internal_width_range{5, 30};
    std::vector<std::string> activation_pool{"relu", "tanh", "sigmoid"};
    std::vector<std::string> init_pool{"xavier_uniform", "scaled_normal"};
    std::uint64_t seed = 0;

    LossBetas betas;
    /// Ground-truth column group per output id; outputs not listed use
    /// "S", "R" or "C" according to their type.
    std::map<std::string, std::string> truth_refs;

    double learning_rate = 1e-3;
    int batch_size = 50;
    int steps = 2000;

    /// Throws InvalidSpec on empty ranges/pools or out-of-range probabilities.
    void check() const;

    friend bool operator==(const SynthesisConfig&, const SynthesisConfig&) = default;
};

struct TaskBinding {
    LossKind kind = LossKind::Mse;
    std::string truth_ref;
};

/// Default ground-truth group for an output type: Samples "S", Numeric "R",
/// Discrete "C".
std::string default_truth_ref(DataType t);

/// Loss kind scoring an output of the given type.
LossKind task_loss_kind(DataType t);

/// Random back-to-front structure generation followed by completion, loss
/// attachment and decoder-input deletion. The result always validates.
/// Throws InfeasibleBudget when max_n cannot serve the outputs.
ModelGraph initialize(const std::vector<ModelInputSpec>& inputs, const std::vector<ModelOutputSpec>& outputs,
                      const SynthesisConfig& cfg);

/// Gives every component in `act_cmp` an input, reusing type-feasible
/// components first and creating bridge networks otherwise.
ModelGraph complete_model(ModelGraph graph, std::vector<std::string> act_cmp, Rng& rng, const SynthesisConfig& cfg);

/// Uniform pick among `candidates` that can feed `target` without breaking
/// typing, widths or acyclicity and without duplicating an edge.
std::pair<bool, std::string> random_component(const std::vector<std::string>& candidates, const std::string& target,
                                              const ModelGraph& graph, Rng& rng);

/// Nonempty sorted subset of {0..width-1} of uniformly drawn size.
std::vector<int> random_subset(int width, Rng& rng);

/// New network able to feed `target`; its type is drawn uniformly among the
/// feasible ones. Throws InvalidSpec when no type can feed the target.
PrimaryNetworkSpec create_rand_network(const std::string& target, const ModelGraph& graph,
                                       const SynthesisConfig& cfg, Rng& rng);

/// True when a connection source -> target keeps the graph type-feasible,
/// acyclic, width-compatible and free of duplicate edges.
bool can_feed(const ModelGraph& graph, const std::string& source, const std::string& target);

/// Variable subset for a new source -> target connection, or empty when no
/// admissible subset exists (e.g. an odd-only choice into a decoder).
std::vector<int> connection_subset(const ModelGraph& graph, const std::string& source, const std::string& target,
                                   Rng& rng);

/// Marks decoder inputs replaced by N(0, I) at inference: one eligible input
/// per decoder always, every other eligible input with probability 1 - phi.
ModelGraph finalize_decoder_wiring(ModelGraph graph, double phi, Rng& rng);

/// Replaces the loss set: one binding per model output plus one KL binding
/// per GenericMLP feeding a decoder. Throws DtypeMismatch when a task loss
/// does not fit its output type.
ModelGraph attach_losses(ModelGraph graph, const std::map<std::string, TaskBinding>& task_bindings,
                         const LossBetas& betas);

/// Rewrites GenericMLP output types to match type inference.
void sync_network_types(ModelGraph& graph);

}  // namespace valp
