#include <doctest.h>

#include <algorithm>
#include <set>

#include "helpers.hpp"
#include "valp/combinators.hpp"
#include "valp/graph_io.hpp"
#include "valp/models.hpp"
#include "valp/synthesis.hpp"
#include "valp/validator.hpp"

using namespace valp;

namespace {

std::vector<ModelInputSpec> small_inputs() { return {{"i0", DataUnitSpec(10, DataType::Numeric)}}; }

std::vector<ModelOutputSpec> small_outputs() {
    return {{"o0", DataUnitSpec(5, DataType::Samples), CombinerKind::Add},
            {"o1", DataUnitSpec(1, DataType::Numeric), CombinerKind::Add},
            {"o2", DataUnitSpec(10, DataType::Discrete), CombinerKind::Add}};
}

int count_type(const ModelGraph& g, NetworkType t) {
    return static_cast<int>(std::count_if(g.networks.begin(), g.networks.end(),
                                          [&](const PrimaryNetworkSpec& n) { return n.ntype() == t; }));
}

std::string violations_text(const ValidationReport& r) {
    std::string s;
    for (const auto& v : r.violations) s += v.check + " " + v.component + " " + v.message + "\n";
    return s;
}

}  // namespace

TEST_CASE("synthesized graphs always validate, stay acyclic and respect the soft cap") {
    SynthesisConfig cfg;
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        cfg.seed = seed;
        const auto outputs = seed % 2 ? small_outputs() : fashion_outputs();
        const auto inputs = seed % 2 ? small_inputs() : fashion_inputs();
        const ModelGraph g = initialize(inputs, outputs, cfg);
        const ValidationReport r = validate(g);
        INFO("seed " << seed << "\n" << violations_text(r));
        REQUIRE(r.ok);
        const int decoders = count_type(g, NetworkType::Decoder);
        CHECK(static_cast<int>(g.networks.size()) <= cfg.max_n + decoders);
        std::set<std::pair<std::string, std::string>> edges;
        for (const auto& c : g.connections) {
            CHECK(c.source() != c.target());
            CHECK(edges.insert({c.source(), c.target()}).second);
        }
        for (const auto& n : g.networks) {
            if (n.ntype() != NetworkType::Decoder) continue;
            bool mlp = false;
            for (const Connection* c : g.incoming(n.id())) {
                const auto* s = g.find_network(c->source());
                mlp = mlp || (s && s->ntype() == NetworkType::GenericMLP);
            }
            CHECK(mlp);
        }
    }
}

TEST_CASE("synthesis is deterministic in its seed") {
    SynthesisConfig cfg;
    cfg.seed = 1234;
    const std::string a = dump_graph(initialize(fashion_inputs(), fashion_outputs(), cfg));
    const std::string b = dump_graph(initialize(fashion_inputs(), fashion_outputs(), cfg));
    CHECK(a == b);
    cfg.seed = 1235;
    CHECK(dump_graph(initialize(fashion_inputs(), fashion_outputs(), cfg)) != a);
}

TEST_CASE("synthesized graph for a fixed seed matches its golden file") {
    SynthesisConfig cfg;
    cfg.seed = 7;
    const ModelGraph g = initialize(small_inputs(), small_outputs(), cfg);
    CHECK(validate(g).ok);
    CHECK(test::matches_golden("synth_seed7.json", dump_graph(g)));
}

TEST_CASE("degenerate and infeasible budgets") {
    SynthesisConfig cfg;
    const ModelGraph empty = initialize(small_inputs(), {}, cfg);
    CHECK(empty.networks.empty());
    CHECK(empty.connections.empty());

    cfg.max_n = 3;
    try {
        initialize(small_inputs(), small_outputs(), cfg);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::InfeasibleBudget);
    }
    cfg.max_n = 4;
    for (std::uint64_t s = 0; s < 50; ++s) {
        cfg.seed = s;
        CHECK(validate(initialize(small_inputs(), small_outputs(), cfg)).ok);
    }
}

TEST_CASE("random_subset returns sorted distinct in-range indices") {
    Rng rng(3);
    CHECK(random_subset(1, rng) == std::vector<int>{0});
    for (int i = 0; i < 200; ++i) {
        const int w = 1 + static_cast<int>(rng.below(20));
        const auto s = random_subset(w, rng);
        REQUIRE_FALSE(s.empty());
        CHECK(std::is_sorted(s.begin(), s.end()));
        CHECK(std::adjacent_find(s.begin(), s.end()) == s.end());
        CHECK(s.back() < w);
        CHECK(s.front() >= 0);
    }
    Rng fixed(10);
    const auto golden = random_subset(10, fixed);
    std::string text;
    for (int v : golden) text += std::to_string(v) + "\n";
    CHECK(test::matches_golden("random_subset_w10_seed10.txt", text));
}

TEST_CASE("random_component only offers type-feasible providers") {
    ModelGraph g;
    g.inputs = small_inputs();
    g.outputs = small_outputs();
    g.networks = {test::net("n0", NetworkType::GenericMLP, {}, 12, DataType::Numeric),
                  test::net("n1", NetworkType::Discretizer, {}, 10, DataType::Discrete)};
    g.connections = {Connection(0, "i0", "n0", test::iota(10)), Connection(1, "i0", "n1", test::iota(10))};
    Rng rng(0);
    for (int i = 0; i < 20; ++i) {
        const auto [found, id] = random_component({"n0", "n1"}, "o2", g, rng);
        CHECK(found);
        CHECK(id == "n1");
    }
    CHECK_FALSE(random_component({}, "o2", g, rng).first);

    // n2 is Samples-typed; feeding it into the Numeric-fed n3 would flip o1 to Samples.
    g.networks.push_back(test::net("n2", NetworkType::Decoder, {}, 5, DataType::Samples));
    g.networks.push_back(test::net("n3", NetworkType::GenericMLP, {}, 3, DataType::Numeric));
    g.connections.emplace_back(2, "n0", "n2", std::vector<int>{0, 1});
    g.connections.emplace_back(3, "i0", "n3", std::vector<int>{0});
    g.connections.emplace_back(4, "n3", "o1", std::vector<int>{0});
    for (int i = 0; i < 20; ++i) {
        const auto [found, id] = random_component({"n2"}, "n3", g, rng);
        CHECK_FALSE(found);
    }
    CHECK_FALSE(can_feed(g, "n3", "i0"));
    CHECK_FALSE(can_feed(g, "n3", "n3"));
    CHECK_FALSE(can_feed(g, "i0", "n3"));  // duplicate edge
}

TEST_CASE("create_rand_network fits the target") {
    ModelGraph g;
    g.inputs = fashion_inputs();
    g.outputs = fashion_outputs(32);
    SynthesisConfig cfg;
    Rng rng(5);
    for (int i = 0; i < 20; ++i) {
        const PrimaryNetworkSpec num = create_rand_network("o0", g, cfg, rng);
        CHECK(num.ntype() == NetworkType::GenericMLP);
        CHECK(num.params().ns().back() == 32);
        CHECK(num.params().act().back() == "identity");
        const PrimaryNetworkSpec cls = create_rand_network("o1", g, cfg, rng);
        CHECK(cls.ntype() == NetworkType::Discretizer);
        CHECK(cls.params().act().back() == "softmax");
        const PrimaryNetworkSpec dec = create_rand_network("o2", g, cfg, rng);
        CHECK(dec.ntype() == NetworkType::Decoder);
        CHECK(dec.params().ns().back() == 784);
        const auto hidden = static_cast<int>(num.params().layers()) - 1;
        CHECK(hidden >= cfg.hidden_layer_range.lo);
        CHECK(hidden <= cfg.hidden_layer_range.hi);
        for (std::size_t l = 0; l + 1 < num.params().layers(); ++l) {
            CHECK(num.params().ns()[l] >= cfg.neuron_range.lo);
            CHECK(num.params().ns()[l] <= cfg.neuron_range.hi);
        }
    }
}

TEST_CASE("complete_model bridges unfed components") {
    SynthesisConfig cfg;
    SUBCASE("discrete output next to a GenericMLP gets a Discretizer bridge") {
        ModelGraph g;
        g.inputs = small_inputs();
        g.outputs = {small_outputs()[2]};
        g.networks = {test::net("n0", NetworkType::GenericMLP, {}, 6, DataType::Numeric)};
        g.connections = {Connection(0, "i0", "n0", test::iota(10))};
        Rng rng(1);
        const ModelGraph done = complete_model(g, {"o2"}, rng, cfg);
        const auto in = done.incoming("o2");
        REQUIRE(in.size() == 1);
        const auto* bridge = done.find_network(in[0]->source());
        REQUIRE(bridge);
        CHECK(bridge->ntype() == NetworkType::Discretizer);
        CHECK(infer_types(done).at(bridge->id()) == DataType::Discrete);
        CHECK_FALSE(done.incoming(bridge->id()).empty());
    }
    SUBCASE("empty act_cmp leaves the graph alone") {
        const ModelGraph g = worked_example_model();
        Rng rng(1);
        CHECK(complete_model(g, {}, rng, cfg) == g);
    }
    SUBCASE("samples output gets a Decoder plus a GenericMLP") {
        ModelGraph g;
        g.inputs = small_inputs();
        g.outputs = {small_outputs()[0]};
        Rng rng(2);
        const ModelGraph done = complete_model(g, {"o0"}, rng, cfg);
        const auto in = done.incoming("o0");
        REQUIRE(in.size() == 1);
        const auto* dec = done.find_network(in[0]->source());
        REQUIRE(dec);
        CHECK(dec->ntype() == NetworkType::Decoder);
        bool mlp = false;
        for (const Connection* c : done.incoming(dec->id())) {
            const auto* s = done.find_network(c->source());
            mlp = mlp || (s && s->ntype() == NetworkType::GenericMLP);
        }
        CHECK(mlp);
    }
}

TEST_CASE("finalize_decoder_wiring deletes at least one input per decoder") {
    ModelGraph one = worked_example_model();
    Rng rng(0);
    for (double phi : {0.0, 0.5, 1.0}) {
        CHECK(finalize_decoder_wiring(one, phi, rng).deleted_at_inference == std::set<ConnectionId>{3});
    }

    const ModelGraph two = test::tiny_graph();  // decoder n2 fed by c2 and c3
    for (int i = 0; i < 20; ++i) {
        const auto kept = finalize_decoder_wiring(two, 1.0, rng).deleted_at_inference;
        CHECK(kept.size() == 1);
        CHECK((kept.count(2) + kept.count(3)) == 1);
        CHECK(finalize_decoder_wiring(two, 0.0, rng).deleted_at_inference == std::set<ConnectionId>{2, 3});
    }

    ModelGraph no_kl = worked_example_model();
    no_kl.losses.pop_back();
    try {
        finalize_decoder_wiring(no_kl, 0.5, rng);
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::NoEligibleInput);
    }
}

TEST_CASE("attach_losses reproduces the worked example bindings") {
    ModelGraph g = worked_example_model();
    g.losses.clear();
    const std::map<std::string, TaskBinding> tasks{{"o0", {LossKind::SampleNll, "S"}},
                                                   {"o1", {LossKind::Mse, "R"}},
                                                   {"o2", {LossKind::CrossEntropy, "C"}}};
    const ModelGraph a = attach_losses(g, tasks, {0.9, 1.0, 0.8, 0.5});
    REQUIRE(a.losses.size() == 4);
    std::map<LossKind, std::pair<std::string, double>> seen;
    for (const auto& l : a.losses) seen[l.kind] = {l.prediction_site, l.beta};
    CHECK(seen[LossKind::KlToStdNormal] == std::make_pair(std::string("n0"), 0.5));
    CHECK(seen[LossKind::SampleNll] == std::make_pair(std::string("o0"), 0.8));
    CHECK(seen[LossKind::Mse] == std::make_pair(std::string("o1"), 0.9));
    CHECK(seen[LossKind::CrossEntropy] == std::make_pair(std::string("o2"), 1.0));
    CHECK(validate(a).ok);

    ModelGraph t = test::tiny_graph();
    const std::map<std::string, TaskBinding> ttasks{{"o0", {LossKind::SampleNll, "S"}},
                                                    {"o1", {LossKind::Mse, "R"}},
                                                    {"o2", {LossKind::CrossEntropy, "C"}}};
    const ModelGraph b = attach_losses(t, ttasks, {});
    CHECK(std::count_if(b.losses.begin(), b.losses.end(),
                        [](const LossBinding& l) { return l.kind == LossKind::KlToStdNormal; }) == 2);

    auto bad = tasks;
    bad["o0"] = {LossKind::Mse, "S"};
    try {
        attach_losses(g, bad, {});
        FAIL("no error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DtypeMismatch);
    }
}

TEST_CASE("synthesis config validation") {
    SynthesisConfig cfg;
    CHECK_NOTHROW(cfg.check());
    cfg.alpha = 1.5;
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = {};
    cfg.activation_pool.clear();
    CHECK_THROWS_AS(cfg.check(), Error);
    cfg = {};
    cfg.neuron_range = {10, 5};
    CHECK_THROWS_AS(cfg.check(), Error);
}
