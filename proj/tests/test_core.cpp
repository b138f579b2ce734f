#include <doctest.h>

#include <algorithm>
#include <map>

#include "helpers.hpp"
#include "valp/graph_io.hpp"
#include "valp/models.hpp"
#include "valp/synthesis.hpp"

using namespace valp;

namespace {

template <class F>
ErrorKind kind_of_error(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

bool respects_edges(const ModelGraph& g, const std::vector<std::string>& order) {
    std::map<std::string, std::size_t> pos;
    for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
    for (const auto& c : g.connections) {
        if (pos.at(c.source()) >= pos.at(c.target())) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("data unit and parameter invariants are enforced at construction") {
    CHECK_NOTHROW(DataUnitSpec(1, DataType::Numeric));
    CHECK(kind_of_error([] { DataUnitSpec(0, DataType::Numeric); }) == ErrorKind::InvalidSpec);
    CHECK(kind_of_error([] { NetworkParams({"xavier_uniform"}, {"relu", "identity"}, {3, 2}); }) ==
          ErrorKind::InvalidSpec);
    CHECK(kind_of_error([] { NetworkParams({}, {}, {}); }) == ErrorKind::InvalidSpec);
    CHECK(kind_of_error([] { NetworkParams({"xavier_uniform"}, {"identity"}, {0}); }) == ErrorKind::InvalidSpec);
}

TEST_CASE("network specs tie the head activation and output type to the network type") {
    const NetworkParams mlp({"xavier_uniform", "xavier_uniform"}, {"relu", "identity"}, {4, 3});
    CHECK_NOTHROW(PrimaryNetworkSpec("n0", NetworkType::GenericMLP, mlp, CombinerKind::Concat,
                                     DataUnitSpec(3, DataType::Numeric)));
    // Width must equal the last layer.
    CHECK_THROWS_AS(PrimaryNetworkSpec("n0", NetworkType::GenericMLP, mlp, CombinerKind::Concat,
                                       DataUnitSpec(4, DataType::Numeric)),
                    Error);
    // A Discretizer needs a softmax head and Discrete output.
    CHECK_THROWS_AS(PrimaryNetworkSpec("n1", NetworkType::Discretizer, mlp, CombinerKind::Concat,
                                       DataUnitSpec(3, DataType::Discrete)),
                    Error);
    const NetworkParams soft({"xavier_uniform"}, {"softmax"}, {3});
    CHECK_THROWS_AS(
        PrimaryNetworkSpec("n1", NetworkType::Discretizer, soft, CombinerKind::Concat, DataUnitSpec(3, DataType::Numeric)),
        Error);
    CHECK(final_activation(NetworkType::GenericMLP) == "identity");
    CHECK(final_activation(NetworkType::Discretizer) == "softmax");
    CHECK(final_activation(NetworkType::Decoder) == "sigmoid");

    PrimaryNetworkSpec g("n2", NetworkType::GenericMLP, mlp, CombinerKind::Add, DataUnitSpec(3, DataType::Numeric));
    g.set_out_dtype(DataType::Samples);
    CHECK(g.out_spec().dtype() == DataType::Samples);
    CHECK_THROWS_AS(g.set_out_dtype(DataType::Discrete), Error);
}

TEST_CASE("connections reject empty, unsorted and self-loop subsets") {
    CHECK_NOTHROW(Connection(0, "i0", "n0", {0, 2}));
    CHECK_THROWS_AS(Connection(0, "i0", "n0", {}), Error);
    CHECK_THROWS_AS(Connection(0, "i0", "n0", {2, 1}), Error);
    CHECK_THROWS_AS(Connection(0, "i0", "n0", {1, 1}), Error);
    CHECK_THROWS_AS(Connection(0, "i0", "n0", {-1}), Error);
    CHECK_THROWS_AS(Connection(0, "n0", "n0", {0}), Error);
    CHECK(Connection(3, "a", "b", {0, 4, 9}).width() == 3);
}

TEST_CASE("discrete batches must be simplex rows") {
    CHECK_NOTHROW(check_batch({test::mat({{0.2, 0.8}, {1.0, 0.0}}), DataType::Discrete}));
    CHECK(kind_of_error([] { check_batch({test::mat({{0.2, 0.7}}), DataType::Discrete}); }) == ErrorKind::DomainError);
    CHECK(kind_of_error([] { check_batch({test::mat({{-0.2, 1.2}}), DataType::Discrete}); }) == ErrorKind::DomainError);
    CHECK(kind_of_error([] { check_batch({test::mat({{NAN}}), DataType::Numeric}); }) == ErrorKind::DomainError);
}

TEST_CASE("topological order of the worked example respects all nine connections") {
    const ModelGraph g = worked_example_model();
    const auto order = topological_order(g);
    CHECK(order.size() == 9);
    CHECK(respects_edges(g, order));
    // Lexicographic tie-breaking makes the order unique.
    CHECK(order == std::vector<std::string>{"i0", "n0", "n1", "n3", "n2", "n4", "o0", "o1", "o2"});
}

TEST_CASE("topological order edge cases") {
    ModelGraph g;
    g.inputs = {{"i0", DataUnitSpec(2, DataType::Numeric)}};
    CHECK(topological_order(g) == std::vector<std::string>{"i0"});

    ModelGraph cyc = test::tiny_graph();
    cyc.connections.emplace_back(20, "n2", "n0", std::vector<int>{0});
    try {
        topological_order(cyc);
        FAIL("cycle not detected");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::CycleDetected);
        const std::string msg = e.what();
        CHECK((msg.find("n0") != std::string::npos || msg.find("n2") != std::string::npos));
    }

    ModelGraph two;
    two.networks = {test::net("n0", NetworkType::GenericMLP, {}, 2, DataType::Numeric),
                    test::net("n1", NetworkType::GenericMLP, {}, 2, DataType::Numeric)};
    two.connections = {Connection(0, "n0", "n1", {0}), Connection(1, "n1", "n0", {0})};
    CHECK(kind_of_error([&] { topological_order(two); }) == ErrorKind::CycleDetected);
}

TEST_CASE("component widths come from the declarations") {
    const ModelGraph g = worked_example_model();
    CHECK(component_width(g, "i0") == 10);
    CHECK(component_width(g, "n0") == 7);
    CHECK(component_width(g, "o0") == 5);
    CHECK(kind_of_error([&] { component_width(g, "zz"); }) == ErrorKind::UnknownId);
}

TEST_CASE("graph queries") {
    const ModelGraph g = worked_example_model();
    CHECK(g.kind_of("i0") == ComponentKind::Input);
    CHECK(g.kind_of("n4") == ComponentKind::Network);
    CHECK(g.kind_of("o2") == ComponentKind::Output);
    CHECK_FALSE(g.kind_of("q").has_value());
    CHECK(g.incoming("n1").size() == 2);
    CHECK(g.outgoing("n0").size() == 2);
    CHECK(g.has_edge("n3", "n2"));
    CHECK_FALSE(g.has_edge("n2", "n3"));
    CHECK(g.next_connection_id() == 9);
    CHECK(reachable(g, "i0", "o2"));
    CHECK_FALSE(reachable(g, "n4", "o1"));
}

TEST_CASE("graph JSON round-trips field by field") {
    for (const ModelGraph& g : {worked_example_model(), fashion_example_model(), test::tiny_graph()}) {
        const std::string text = dump_graph(g);
        const ModelGraph back = parse_graph(text);
        CHECK(back == g);
        CHECK(dump_graph(back) == text);
    }
    SynthesisConfig cfg;
    cfg.seed = 42;
    cfg.alpha = 0.3;
    cfg.truth_refs = {{"o0", "R2"}};
    const ModelGraph s = initialize(fashion_inputs(), fashion_outputs(), cfg);
    CHECK(parse_graph(dump_graph(s)) == s);

    nlohmann::json doc = graph_to_json(s);
    doc["synthesis"] = synthesis_config_to_json(cfg);
    CHECK(synthesis_config_from_json(doc) == cfg);
    CHECK(synthesis_config_from_json(graph_to_json(s)) == SynthesisConfig{});
}

TEST_CASE("graph JSON uses lowercase enumeration names") {
    const auto doc = graph_to_json(worked_example_model());
    CHECK(doc.at("networks").at(0).at("type") == "generic_mlp");
    CHECK(doc.at("networks").at(4).at("type") == "decoder");
    CHECK(doc.at("networks").at(0).at("combiner") == "concat");
    CHECK(doc.at("outputs").at(0).at("dtype") == "samples");
    CHECK(doc.at("losses").at(2).at("kind") == "cross_entropy");
    CHECK(doc.at("deleted_at_inference") == nlohmann::json::array({3}));
    CHECK_THROWS_AS(parse_graph("{"), Error);
    CHECK_THROWS_AS(parse_graph("{\"inputs\": []}"), Error);
}
