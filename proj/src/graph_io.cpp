#include "valp/graph_io.hpp"

#include <fstream>
#include <sstream>

#include "valp/synthesis.hpp"

namespace valp {

using nlohmann::json;

namespace {

json unit_json(const DataUnitSpec& s) { return {{"width", s.width()}, {"dtype", to_string(s.dtype())}}; }

DataUnitSpec unit_from(const json& j) {
    return DataUnitSpec(j.at("width").get<int>(), parse_data_type(j.at("dtype").get<std::string>()));
}

}  // namespace

json graph_to_json(const ModelGraph& g) {
    json doc;
    doc["inputs"] = json::array();
    for (const auto& i : g.inputs) {
        json j = unit_json(i.spec);
        j["id"] = i.id;
        doc["inputs"].push_back(j);
    }
    doc["networks"] = json::array();
    for (const auto& n : g.networks) {
        doc["networks"].push_back({{"id", n.id()},
                                   {"type", to_string(n.ntype())},
                                   {"combiner", to_string(n.combiner())},
                                   {"out", unit_json(n.out_spec())},
                                   {"init", n.params().init()},
                                   {"act", n.params().act()},
                                   {"ns", n.params().ns()}});
    }
    doc["outputs"] = json::array();
    for (const auto& o : g.outputs) {
        json j = unit_json(o.spec);
        j["id"] = o.id;
        j["combiner"] = to_string(o.combiner);
        doc["outputs"].push_back(j);
    }
    doc["connections"] = json::array();
    for (const auto& c : g.connections) {
        doc["connections"].push_back(
            {{"id", c.id()}, {"source", c.source()}, {"target", c.target()}, {"subset", c.subset()}});
    }
    doc["losses"] = json::array();
    for (const auto& l : g.losses) {
        doc["losses"].push_back({{"id", l.id},
                                 {"kind", to_string(l.kind)},
                                 {"site", l.prediction_site},
                                 {"truth", l.truth_ref},
                                 {"beta", l.beta}});
    }
    doc["hyper"] = {{"alpha", g.hyper.alpha},
                    {"max_n", g.hyper.max_n},
                    {"phi", g.hyper.phi},
                    {"learning_rate", g.hyper.learning_rate},
                    {"batch_size", g.hyper.batch_size},
                    {"epochs", g.hyper.epochs}};
    doc["deleted_at_inference"] = json::array();
    for (ConnectionId id : g.deleted_at_inference) doc["deleted_at_inference"].push_back(id);
    return doc;
}

ModelGraph graph_from_json(const json& doc) {
    try {
        ModelGraph g;
        for (const auto& j : doc.at("inputs")) g.inputs.push_back({j.at("id").get<std::string>(), unit_from(j)});
        for (const auto& j : doc.at("networks")) {
            g.networks.emplace_back(j.at("id").get<std::string>(), parse_network_type(j.at("type").get<std::string>()),
                                    NetworkParams(j.at("init").get<std::vector<std::string>>(),
                                                  j.at("act").get<std::vector<std::string>>(),
                                                  j.at("ns").get<std::vector<int>>()),
                                    parse_combiner(j.at("combiner").get<std::string>()), unit_from(j.at("out")));
        }
        for (const auto& j : doc.at("outputs")) {
            g.outputs.push_back({j.at("id").get<std::string>(), unit_from(j),
                                 parse_combiner(j.at("combiner").get<std::string>())});
        }
        for (const auto& j : doc.at("connections")) {
            g.connections.emplace_back(j.at("id").get<ConnectionId>(), j.at("source").get<std::string>(),
                                       j.at("target").get<std::string>(), j.at("subset").get<std::vector<int>>());
        }
        for (const auto& j : doc.at("losses")) {
            g.losses.push_back({j.at("id").get<std::string>(), parse_loss_kind(j.at("kind").get<std::string>()),
                                j.at("site").get<std::string>(), j.at("truth").get<std::string>(),
                                j.at("beta").get<double>()});
        }
        const json& h = doc.at("hyper");
        g.hyper.alpha = h.at("alpha").get<double>();
        g.hyper.max_n = h.at("max_n").get<int>();
        g.hyper.phi = h.at("phi").get<double>();
        g.hyper.learning_rate = h.at("learning_rate").get<double>();
        g.hyper.batch_size = h.at("batch_size").get<int>();
        g.hyper.epochs = h.at("epochs").get<int>();
        for (const auto& id : doc.at("deleted_at_inference")) g.deleted_at_inference.insert(id.get<ConnectionId>());
        return g;
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

json synthesis_config_to_json(const SynthesisConfig& cfg) {
    return {{"alpha", cfg.alpha},
            {"max_n", cfg.max_n},
            {"phi", cfg.phi},
            {"hidden_layer_range", {cfg.hidden_layer_range.lo, cfg.hidden_layer_range.hi}},
            {"neuron_range", {cfg.neuron_range.lo, cfg.neuron_range.hi}},
            {"internal_width_range", {cfg.internal_width_range.lo, cfg.internal_width_range.hi}},
            {"activation_pool", cfg.activation_pool},
            {"init_pool", cfg.init_pool},
            {"seed", cfg.seed},
            {"betas",
             {{"mse", cfg.betas.mse},
              {"cross_entropy", cfg.betas.cross_entropy},
              {"sample_nll", cfg.betas.sample_nll},
              {"kl", cfg.betas.kl}}},
            {"truth_refs", cfg.truth_refs},
            {"learning_rate", cfg.learning_rate},
            {"batch_size", cfg.batch_size},
            {"steps", cfg.steps}};
}

SynthesisConfig synthesis_config_from_json(const json& doc) {
    SynthesisConfig cfg;
    if (!doc.contains("synthesis")) return cfg;
    try {
        const json& s = doc.at("synthesis");
        auto range = [&](const char* key, IntRange& r) {
            if (s.contains(key)) r = {s.at(key).at(0).get<int>(), s.at(key).at(1).get<int>()};
        };
        cfg.alpha = s.value("alpha", cfg.alpha);
        cfg.max_n = s.value("max_n", cfg.max_n);
        cfg.phi = s.value("phi", cfg.phi);
        range("hidden_layer_range", cfg.hidden_layer_range);
        range("neuron_range", cfg.neuron_range);
        range("internal_width_range", cfg.internal_width_range);
        cfg.activation_pool = s.value("activation_pool", cfg.activation_pool);
        cfg.init_pool = s.value("init_pool", cfg.init_pool);
        cfg.seed = s.value("seed", cfg.seed);
        if (s.contains("betas")) {
            const json& b = s.at("betas");
            cfg.betas.mse = b.value("mse", cfg.betas.mse);
            cfg.betas.cross_entropy = b.value("cross_entropy", cfg.betas.cross_entropy);
            cfg.betas.sample_nll = b.value("sample_nll", cfg.betas.sample_nll);
            cfg.betas.kl = b.value("kl", cfg.betas.kl);
        }
        cfg.truth_refs = s.value("truth_refs", cfg.truth_refs);
        cfg.learning_rate = s.value("learning_rate", cfg.learning_rate);
        cfg.batch_size = s.value("batch_size", cfg.batch_size);
        cfg.steps = s.value("steps", cfg.steps);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    cfg.check();
    return cfg;
}

std::string dump_graph(const ModelGraph& graph) { return graph_to_json(graph).dump(2) + "\n"; }

ModelGraph parse_graph(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, e.what());
    }
    return graph_from_json(doc);
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::Io, "cannot write " + path.string());
    out << text;
}

void save_graph(const ModelGraph& graph, const std::filesystem::path& path) {
    write_text_file(path, dump_graph(graph));
}

ModelGraph load_graph(const std::filesystem::path& path) { return graph_from_json(read_json_file(path)); }

}  // namespace valp
