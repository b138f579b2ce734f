#include "valp/models.hpp"

#include <numeric>

namespace valp {

namespace {

std::vector<int> all_indices(int width) {
    std::vector<int> v(width);
    std::iota(v.begin(), v.end(), 0);
    return v;
}

PrimaryNetworkSpec dense(const std::string& id, NetworkType type, std::vector<int> hidden, int out, DataType dtype,
                         const std::string& hidden_act = "relu") {
    std::vector<std::string> init, act;
    std::vector<int> ns = std::move(hidden);
    for (std::size_t i = 0; i < ns.size(); ++i) act.push_back(hidden_act);
    ns.push_back(out);
    act.emplace_back(final_activation(type));
    init.assign(ns.size(), "xavier_uniform");
    return PrimaryNetworkSpec(id, type, NetworkParams(init, act, ns), CombinerKind::Concat, DataUnitSpec(out, dtype));
}

}  // namespace

ModelGraph worked_example_model(int classes) {
    ModelGraph g;
    g.inputs = {{"i0", DataUnitSpec(10, DataType::Numeric)}};
    g.networks = {
        dense("n0", NetworkType::GenericMLP, {12}, 7, DataType::Numeric),
        dense("n1", NetworkType::GenericMLP, {12}, 8, DataType::Numeric),
        dense("n2", NetworkType::Discretizer, {8}, classes, DataType::Discrete),
        dense("n3", NetworkType::GenericMLP, {8}, 1, DataType::Numeric),
        dense("n4", NetworkType::Decoder, {8}, 5, DataType::Samples),
    };
    g.outputs = {
        {"o0", DataUnitSpec(5, DataType::Samples), CombinerKind::Add},
        {"o1", DataUnitSpec(1, DataType::Numeric), CombinerKind::Add},
        {"o2", DataUnitSpec(classes, DataType::Discrete), CombinerKind::Add},
    };
    g.connections = {
        Connection(0, "i0", "n0", {0, 2, 5, 6, 7}),
        Connection(1, "i0", "n1", all_indices(10)),
        Connection(2, "n0", "n1", all_indices(7)),
        Connection(3, "n0", "n4", {0, 1, 2, 3, 4, 5}),
        Connection(4, "n1", "n3", all_indices(8)),
        Connection(5, "n3", "n2", {0}),
        Connection(6, "n4", "o0", all_indices(5)),
        Connection(7, "n3", "o1", {0}),
        Connection(8, "n2", "o2", all_indices(classes)),
    };
    g.losses = {
        {"L0", LossKind::SampleNll, "o0", "S", 0.8},
        {"L1", LossKind::Mse, "o1", "R", 0.9},
        {"L2", LossKind::CrossEntropy, "o2", "C", 1.0},
        {"L3", LossKind::KlToStdNormal, "n0", std::string(kStdNormal), 0.5},
    };
    g.hyper.max_n = 5;
    g.deleted_at_inference = {3};
    return g;
}

ModelGraph fashion_example_model(int bins, int latent) {
    ModelGraph g;
    g.inputs = fashion_inputs();
    g.networks = {
        dense("n0", NetworkType::GenericMLP, {256}, 2 * latent, DataType::Numeric),
        dense("n1", NetworkType::GenericMLP, {128}, 64, DataType::Numeric),
        dense("n2", NetworkType::Discretizer, {64}, 10, DataType::Discrete),
        dense("n3", NetworkType::GenericMLP, {64}, bins, DataType::Numeric),
        dense("n4", NetworkType::Decoder, {256}, 784, DataType::Samples),
    };
    g.outputs = fashion_outputs(bins);
    g.connections = {
        Connection(0, "i0", "n0", all_indices(784)),
        Connection(1, "i0", "n1", all_indices(784)),
        Connection(2, "n0", "n1", all_indices(2 * latent)),
        Connection(3, "n0", "n4", all_indices(2 * latent)),
        Connection(4, "n1", "n3", all_indices(64)),
        Connection(5, "n3", "n2", all_indices(bins)),
        Connection(6, "n4", "o2", all_indices(784)),
        Connection(7, "n3", "o0", all_indices(bins)),
        Connection(8, "n2", "o1", all_indices(10)),
        Connection(9, "n1", "n2", all_indices(64)),
    };
    g.losses = {
        {"L0", LossKind::Mse, "o0", "R", 1000.0},
        {"L1", LossKind::CrossEntropy, "o1", "C", 1.0},
        {"L2", LossKind::SampleNll, "o2", "S", 1.0},
        {"L3", LossKind::KlToStdNormal, "n0", std::string(kStdNormal), 1e-4},
    };
    g.hyper.max_n = 11;
    g.deleted_at_inference = {3};
    return g;
}

std::vector<ModelInputSpec> fashion_inputs() { return {{"i0", DataUnitSpec(784, DataType::Numeric)}}; }

std::vector<ModelOutputSpec> fashion_outputs(int bins) {
    return {
        {"o0", DataUnitSpec(bins, DataType::Numeric), CombinerKind::Add},
        {"o1", DataUnitSpec(10, DataType::Discrete), CombinerKind::Add},
        {"o2", DataUnitSpec(784, DataType::Samples), CombinerKind::Add},
    };
}

}  // namespace valp
