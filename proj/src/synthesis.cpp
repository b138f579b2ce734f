#include "valp/synthesis.hpp"

#include <algorithm>
#include <numeric>

#include "valp/combinators.hpp"
#include "valp/validator.hpp"

namespace valp {

double LossBetas::of(LossKind kind) const {
    switch (kind) {
        case LossKind::Mse: return mse;
        case LossKind::CrossEntropy: return cross_entropy;
        case LossKind::SampleNll: return sample_nll;
        case LossKind::KlToStdNormal: return kl;
    }
    return 0.0;
}

void SynthesisConfig::check() const {
    auto range_ok = [](const IntRange& r) { return r.lo >= 1 && r.lo <= r.hi; };
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::InvalidSpec, "alpha must lie in [0, 1]");
    if (!(phi >= 0.0 && phi <= 1.0)) throw Error(ErrorKind::InvalidSpec, "phi must lie in [0, 1]");
    if (max_n < 0) throw Error(ErrorKind::InvalidSpec, "max_n must be nonnegative");
    if (!range_ok(hidden_layer_range) || !range_ok(neuron_range) || !range_ok(internal_width_range)) {
        throw Error(ErrorKind::InvalidSpec, "synthesis ranges must be nonempty and positive");
    }
    if (activation_pool.empty() || init_pool.empty()) {
        throw Error(ErrorKind::InvalidSpec, "activation and initializer pools must be nonempty");
    }
}

std::string default_truth_ref(DataType t) {
    switch (t) {
        case DataType::Samples: return "S";
        case DataType::Numeric: return "R";
        case DataType::Discrete: return "C";
    }
    return "R";
}

LossKind task_loss_kind(DataType t) {
    switch (t) {
        case DataType::Samples: return LossKind::SampleNll;
        case DataType::Numeric: return LossKind::Mse;
        case DataType::Discrete: return LossKind::CrossEntropy;
    }
    return LossKind::Mse;
}

namespace {

std::vector<int> sample_indices(int width, int count, Rng& rng) {
    std::vector<int> pool(width);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < count; ++i) {
        const auto j = i + static_cast<int>(rng.below(static_cast<std::uint64_t>(width - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

bool has_mlp_provider(const ModelGraph& g, const std::string& decoder) {
    for (const Connection* c : g.incoming(decoder)) {
        const auto* src = g.find_network(c->source());
        if (src && src->ntype() == NetworkType::GenericMLP) return true;
    }
    return false;
}

/// A component stays active until it has an input; decoders additionally
/// need a GenericMLP among their inputs.
bool still_active(const ModelGraph& g, const std::string& id) {
    if (g.incoming(id).empty()) return true;
    const auto* net = g.find_network(id);
    return net && net->ntype() == NetworkType::Decoder && !has_mlp_provider(g, id);
}

std::string fresh_network_id(const ModelGraph& g) {
    for (std::size_t k = g.networks.size();; ++k) {
        std::string id = "n" + std::to_string(k);
        if (!g.contains(id)) return id;
    }
}

DataType provisional_type(NetworkType t) {
    return network_output_type(t, DataType::Numeric);
}

PrimaryNetworkSpec make_network(const std::string& id, NetworkType type, int width, const SynthesisConfig& cfg,
                                Rng& rng) {
    const int hidden = static_cast<int>(rng.between(cfg.hidden_layer_range.lo, cfg.hidden_layer_range.hi));
    std::vector<std::string> init, act;
    std::vector<int> ns;
    for (int l = 0; l < hidden; ++l) {
        ns.push_back(static_cast<int>(rng.between(cfg.neuron_range.lo, cfg.neuron_range.hi)));
        act.push_back(cfg.activation_pool[rng.below(cfg.activation_pool.size())]);
    }
    ns.push_back(width);
    act.emplace_back(final_activation(type));
    for (int l = 0; l <= hidden; ++l) init.push_back(cfg.init_pool[rng.below(cfg.init_pool.size())]);
    const auto combiner = rng.bernoulli(0.5) ? CombinerKind::Concat : CombinerKind::Add;
    return PrimaryNetworkSpec(id, type, NetworkParams(std::move(init), std::move(act), std::move(ns)), combiner,
                              DataUnitSpec(width, provisional_type(type)));
}

void connect(ModelGraph& g, const std::string& source, const std::string& target, std::vector<int> subset) {
    g.connections.emplace_back(g.next_connection_id(), source, target, std::move(subset));
    sync_network_types(g);
}

void erase_value(std::vector<std::string>& v, const std::string& id) {
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
}

std::vector<std::string> provider_pool(const ModelGraph& g) {
    std::vector<std::string> pool;
    for (const auto& i : g.inputs) pool.push_back(i.id);
    for (const auto& n : g.networks) pool.push_back(n.id());
    return pool;
}

}  // namespace

void sync_network_types(ModelGraph& graph) {
    const TypeReport types = infer_types_partial(graph);
    for (auto& n : graph.networks) n.set_out_dtype(types.at(n.id()));
}

bool can_feed(const ModelGraph& g, const std::string& source, const std::string& target) {
    const auto sk = g.kind_of(source);
    const auto tk = g.kind_of(target);
    if (!sk || !tk || source == target) return false;
    if (*sk == ComponentKind::Output || *tk == ComponentKind::Input) return false;
    if (*tk == ComponentKind::Output && *sk != ComponentKind::Network) return false;
    if (g.has_edge(source, target) || reachable(g, target, source)) return false;

    const int sw = component_width(g, source);
    if (const auto* o = g.find_output(target)) {
        if (sw < o->spec.width()) return false;
        // Concat outputs and non-Numeric outputs take exactly one provider.
        if (!g.incoming(target).empty() &&
            (o->combiner == CombinerKind::Concat || o->spec.dtype() != DataType::Numeric)) {
            return false;
        }
        // Bernoulli NLL needs [0, 1] predictions, which only a sigmoid head guarantees.
        const auto* snet = g.find_network(source);
        if (o->spec.dtype() == DataType::Samples && (!snet || snet->ntype() != NetworkType::Decoder)) return false;
    }
    const auto* tnet = g.find_network(target);
    if (tnet && tnet->ntype() == NetworkType::Decoder && sw < 2) return false;

    ModelGraph h = g;
    h.connections.emplace_back(h.next_connection_id(), source, target, std::vector<int>{0});
    const TypeReport types = infer_types_partial(h);
    for (const auto& o : h.outputs) {
        const auto t = incoming_type(h, types, o.id);
        if (t && *t != o.spec.dtype()) return false;
    }
    for (const auto& n : h.networks) {
        if (n.ntype() != NetworkType::Decoder) continue;
        const auto t = incoming_type(h, types, n.id());
        if (t && *t != DataType::Numeric) return false;
    }
    return true;
}

std::vector<int> random_subset(int width, Rng& rng) {
    const int count = static_cast<int>(rng.between(1, width));
    return sample_indices(width, count, rng);
}

std::vector<int> connection_subset(const ModelGraph& g, const std::string& source, const std::string& target,
                                   Rng& rng) {
    const int sw = component_width(g, source);
    if (const auto* o = g.find_output(target)) {
        if (sw < o->spec.width()) return {};
        return sample_indices(sw, o->spec.width(), rng);
    }
    std::vector<int> subset = random_subset(sw, rng);
    const auto* tnet = g.find_network(target);
    if (tnet && tnet->ntype() == NetworkType::Decoder && subset.size() % 2 != 0) {
        // Decoder inputs split into (mu, logvar) halves, so keep the count even.
        if (static_cast<int>(subset.size()) < sw) {
            std::vector<int> unused;
            for (int i = 0; i < sw; ++i) {
                if (!std::binary_search(subset.begin(), subset.end(), i)) unused.push_back(i);
            }
            subset.push_back(unused[rng.below(unused.size())]);
            std::sort(subset.begin(), subset.end());
        } else if (subset.size() > 1) {
            subset.erase(subset.begin() + static_cast<std::ptrdiff_t>(rng.below(subset.size())));
        } else {
            return {};
        }
    }
    return subset;
}

std::pair<bool, std::string> random_component(const std::vector<std::string>& candidates, const std::string& target,
                                              const ModelGraph& graph, Rng& rng) {
    std::vector<std::string> feasible;
    for (const auto& c : candidates) {
        if (can_feed(graph, c, target)) feasible.push_back(c);
    }
    if (feasible.empty()) return {false, {}};
    return {true, feasible[rng.below(feasible.size())]};
}

PrimaryNetworkSpec create_rand_network(const std::string& target, const ModelGraph& graph,
                                       const SynthesisConfig& cfg, Rng& rng) {
    const std::string id = fresh_network_id(graph);
    int width;
    if (const auto* o = graph.find_output(target)) {
        width = o->spec.width();
    } else if (graph.find_network(target)) {
        width = static_cast<int>(rng.between(cfg.internal_width_range.lo, cfg.internal_width_range.hi));
    } else {
        throw Error(ErrorKind::UnknownId, "cannot create a provider for '" + target + "'");
    }

    std::vector<NetworkType> feasible;
    for (NetworkType t : {NetworkType::GenericMLP, NetworkType::Discretizer, NetworkType::Decoder}) {
        ModelGraph h = graph;
        h.networks.emplace_back(id, t, NetworkParams({"xavier_uniform"}, {std::string(final_activation(t))}, {width}),
                                CombinerKind::Concat, DataUnitSpec(width, provisional_type(t)));
        if (can_feed(h, id, target)) feasible.push_back(t);
    }
    if (feasible.empty()) throw Error(ErrorKind::InvalidSpec, "no network type can feed '" + target + "'");
    const NetworkType type = feasible[rng.below(feasible.size())];
    return make_network(id, type, width, cfg, rng);
}

ModelGraph complete_model(ModelGraph graph, std::vector<std::string> act_cmp, Rng& rng, const SynthesisConfig& cfg) {
    // Each pass either satisfies the head of act_cmp or adds a new network
    // that is itself appended; the guard only trips on malformed inputs.
    for (int guard = 0; !act_cmp.empty(); ++guard) {
        if (guard > 10000) throw Error(ErrorKind::InvalidSpec, "model completion did not converge");
        const std::string target = act_cmp.front();
        if (!still_active(graph, target)) {
            act_cmp.erase(act_cmp.begin());
            continue;
        }
        const auto* tnet = graph.find_network(target);
        const bool needs_mlp = tnet && tnet->ntype() == NetworkType::Decoder;

        std::vector<std::string> pool;
        for (const auto& id : provider_pool(graph)) {
            const auto* n = graph.find_network(id);
            if (!needs_mlp || (n && n->ntype() == NetworkType::GenericMLP)) pool.push_back(id);
        }
        auto [found, source] = random_component(pool, target, graph, rng);
        std::vector<int> subset;
        if (found) subset = connection_subset(graph, source, target, rng);
        if (!found || subset.empty()) {
            PrimaryNetworkSpec bridge =
                needs_mlp ? make_network(fresh_network_id(graph), NetworkType::GenericMLP,
                                         static_cast<int>(rng.between(std::max(2, cfg.internal_width_range.lo),
                                                                      std::max(2, cfg.internal_width_range.hi))),
                                         cfg, rng)
                          : create_rand_network(target, graph, cfg, rng);
            source = bridge.id();
            graph.networks.push_back(std::move(bridge));
            act_cmp.push_back(source);
            subset = connection_subset(graph, source, target, rng);
        }
        connect(graph, source, target, std::move(subset));
        if (!still_active(graph, target)) erase_value(act_cmp, target);
    }
    return graph;
}

ModelGraph initialize(const std::vector<ModelInputSpec>& inputs, const std::vector<ModelOutputSpec>& outputs,
                      const SynthesisConfig& cfg) {
    cfg.check();
    const int needed = minimum_network_count(outputs);
    if (cfg.max_n < needed) {
        throw Error(ErrorKind::InfeasibleBudget,
                    "max_n " + std::to_string(cfg.max_n) + " below the minimum " + std::to_string(needed));
    }
    Rng rng(cfg.seed);
    ModelGraph g;
    g.inputs = inputs;
    g.outputs = outputs;
    g.hyper = {cfg.alpha, cfg.max_n, cfg.phi, cfg.learning_rate, cfg.batch_size, cfg.steps};

    std::vector<std::string> act_cmp;
    for (const auto& o : outputs) act_cmp.push_back(o.id);

    auto unfed_outputs = [&] {
        return static_cast<int>(std::count_if(act_cmp.begin(), act_cmp.end(),
                                              [&](const std::string& id) { return g.find_output(id) != nullptr; }));
    };

    for (int guard = 0; guard < 100 * (cfg.max_n + 1); ++guard) {
        if (cfg.max_n - static_cast<int>(g.networks.size()) == unfed_outputs()) break;

        std::vector<std::string> targets;
        for (const auto& o : g.outputs) targets.push_back(o.id);
        for (const auto& n : g.networks) targets.push_back(n.id());
        if (targets.empty()) break;
        const std::string con_out = targets[rng.below(targets.size())];

        auto [found, con_in] = random_component(provider_pool(g), con_out, g, rng);
        const bool create = rng.uniform() < cfg.alpha || !found;
        if (create) {
            try {
                PrimaryNetworkSpec net = create_rand_network(con_out, g, cfg, rng);
                con_in = net.id();
                g.networks.push_back(std::move(net));
                act_cmp.push_back(con_in);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::InvalidSpec || !found) continue;
            }
        }
        std::vector<int> subset = connection_subset(g, con_in, con_out, rng);
        if (subset.empty()) {
            // Only a one-variable source into a decoder lands here; a freshly
            // created network is then left for complete_model to wire up.
            continue;
        }
        connect(g, con_in, con_out, std::move(subset));
        if (!still_active(g, con_out)) erase_value(act_cmp, con_out);
    }

    g = complete_model(std::move(g), std::move(act_cmp), rng, cfg);

    std::map<std::string, TaskBinding> tasks;
    for (const auto& o : g.outputs) {
        const auto it = cfg.truth_refs.find(o.id);
        tasks[o.id] = {task_loss_kind(o.spec.dtype()),
                       it != cfg.truth_refs.end() ? it->second : default_truth_ref(o.spec.dtype())};
    }
    g = attach_losses(std::move(g), tasks, cfg.betas);
    g = finalize_decoder_wiring(std::move(g), cfg.phi, rng);
    return g;
}

ModelGraph finalize_decoder_wiring(ModelGraph graph, double phi, Rng& rng) {
    std::set<std::string> kl_bound;
    for (const auto& l : graph.losses) {
        if (l.kind == LossKind::KlToStdNormal) kl_bound.insert(l.prediction_site);
    }
    graph.deleted_at_inference.clear();
    for (const auto& n : graph.networks) {
        if (n.ntype() != NetworkType::Decoder) continue;
        std::vector<ConnectionId> eligible;
        for (const Connection* c : graph.incoming(n.id())) {
            const auto* src = graph.find_network(c->source());
            if (src && src->ntype() == NetworkType::GenericMLP && kl_bound.count(src->id())) {
                eligible.push_back(c->id());
            }
        }
        if (eligible.empty()) {
            throw Error(ErrorKind::NoEligibleInput, "decoder '" + n.id() + "' has no KL-bound GenericMLP input");
        }
        const ConnectionId always = eligible[rng.below(eligible.size())];
        for (ConnectionId id : eligible) {
            if (id == always || !rng.bernoulli(phi)) graph.deleted_at_inference.insert(id);
        }
    }
    return graph;
}

ModelGraph attach_losses(ModelGraph graph, const std::map<std::string, TaskBinding>& task_bindings,
                         const LossBetas& betas) {
    graph.losses.clear();
    int next = 0;
    for (const auto& o : graph.outputs) {
        const auto it = task_bindings.find(o.id);
        if (it == task_bindings.end()) throw Error(ErrorKind::InvalidSpec, "no task binding for output '" + o.id + "'");
        const TaskBinding& task = it->second;
        if (task.kind == LossKind::KlToStdNormal || task.kind != task_loss_kind(o.spec.dtype())) {
            throw Error(ErrorKind::DtypeMismatch, std::string(to_string(task.kind)) + " cannot score " +
                                                      std::string(to_string(o.spec.dtype())) + " output '" + o.id +
                                                      "'");
        }
        graph.losses.push_back({"L" + std::to_string(next++), task.kind, o.id, task.truth_ref, betas.of(task.kind)});
    }
    for (const auto& n : graph.networks) {
        if (n.ntype() != NetworkType::GenericMLP) continue;
        const bool feeds_decoder = std::any_of(graph.connections.begin(), graph.connections.end(), [&](const Connection& c) {
            const auto* t = graph.find_network(c.target());
            return c.source() == n.id() && t && t->ntype() == NetworkType::Decoder;
        });
        if (!feeds_decoder) continue;
        graph.losses.push_back({"L" + std::to_string(next++), LossKind::KlToStdNormal, n.id(), std::string(kStdNormal),
                                betas.kl});
    }
    return graph;
}

}  // namespace valp
