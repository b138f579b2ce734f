#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "valp/core.hpp"
#include "valp/dataset.hpp"
#include "valp/nnet.hpp"
#include "valp/rng.hpp"

namespace valp {

enum class Mode { Train, Infer };

struct ExecutableModel {
    ModelGraph graph;
    std::vector<std::string> order;
    std::map<std::string, NetworkWeights> weights;
    Mode mode = Mode::Train;
};

using BatchMap = std::map<std::string, DataBatch>;

/// Initializes weights in network declaration order. Throws InvalidGraph
/// (with the first violation) unless the graph validates.
ExecutableModel compile(const ModelGraph& graph, Rng& rng);

/// Width a network receives after combining its incoming connections. A
/// decoder receives half of each connection (the reparameterized sample).
int network_input_width(const ModelGraph& graph, const std::string& network);

/// Connections that carry their source's data in the given mode; the rest
/// feed standard-normal noise.
std::set<ConnectionId> live_connections(const ModelGraph& graph, Mode mode);

struct LossTrace {
    std::vector<std::string> binding_ids;
    std::vector<long> steps;
    std::vector<double> composite;
    std::vector<std::vector<double>> values;  ///< per step, one entry per binding
    long steps_per_epoch = 0;

    std::size_t size() const { return steps.size(); }
    /// Header `step,composite,<binding ids...>`.
    std::string to_csv() const;
};

struct TrainOptions {
    OptimizerConfig optimizer;
    /// Called after each step with the step index and composite loss.
    std::function<void(long, double)> on_step;
};

/// Model inputs read the column group named after the input id when it
/// exists and "X" otherwise. Runs `hyper.epochs` minibatch steps, reshuffling
/// at each epoch boundary. Throws MissingColumn before the first step when a
/// group is absent, NonFiniteLoss naming the step and binding.
LossTrace train(ExecutableModel& model, const DataSplit& data, const Hyperparams& hyper, Rng& rng,
                const TrainOptions& options = {});

/// Input batches for every model input taken from `data`.
BatchMap input_batches(const ModelGraph& graph, const DataSplit& data);

struct Evaluation {
    double composite = 0.0;
    std::vector<double> values;  ///< one per loss binding
    std::map<std::string, GradientSet> grads;
};

/// One training-mode forward pass over `batch`; with `with_gradients` also
/// the gradient of the composite loss w.r.t. every parameter.
Evaluation evaluate(const ExecutableModel& model, const DataSplit& batch, Rng& rng, bool with_gradients = true);

/// Runs the schedule with the model's current mode and returns one batch
/// per model output. Throws MissingInput.
BatchMap infer(const ExecutableModel& model, const BatchMap& inputs, Rng& rng);

/// Every conditioning row repeated `n` times (row-major: all copies of row 0
/// first), fresh noise per copy; returns the first Samples output. Throws
/// Unconditioned when no decoder keeps a live input at inference.
DataBatch conditioned_sample(const ExecutableModel& model, const BatchMap& conditioning, int n, Rng& rng);

/// True when some decoder has a connection not deleted at inference.
bool has_conditioning_path(const ModelGraph& graph);

}  // namespace valp
