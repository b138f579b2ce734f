#include "valp/validator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "valp/combinators.hpp"

namespace valp {

int minimum_network_count(const std::vector<ModelOutputSpec>& outputs) {
    int n = 0;
    for (const auto& o : outputs) n += o.spec.dtype() == DataType::Samples ? 2 : 1;
    return n;
}

namespace {

std::string conn_name(const Connection& c) { return "c" + std::to_string(c.id()); }

int check_number(const std::string& check) { return std::stoi(check.substr(1)); }

class Collector {
public:
    void add(std::string check, std::string component, std::string message) {
        violations_.push_back({std::move(check), std::move(component), std::move(message)});
    }

    ValidationReport finish() && {
        std::stable_sort(violations_.begin(), violations_.end(), [](const Violation& a, const Violation& b) {
            const int ca = check_number(a.check), cb = check_number(b.check);
            if (ca != cb) return ca < cb;
            return a.component < b.component;
        });
        return {violations_.empty(), std::move(violations_)};
    }

private:
    std::vector<Violation> violations_;
};

DataType loss_dtype(LossKind kind) {
    switch (kind) {
        case LossKind::Mse: return DataType::Numeric;
        case LossKind::CrossEntropy: return DataType::Discrete;
        case LossKind::SampleNll: return DataType::Samples;
        case LossKind::KlToStdNormal: return DataType::Numeric;
    }
    return DataType::Numeric;
}

/// V0: ids and connection endpoints. Returns false when later checks
/// cannot safely run.
bool check_well_formed(const ModelGraph& g, Collector& out) {
    bool ok = true;
    std::set<std::string> ids;
    auto claim = [&](const std::string& id) {
        if (id.empty() || !ids.insert(id).second) {
            out.add("V0", id, "component id is empty or not unique");
            ok = false;
        }
    };
    for (const auto& i : g.inputs) claim(i.id);
    for (const auto& n : g.networks) claim(n.id());
    for (const auto& o : g.outputs) claim(o.id);

    std::set<ConnectionId> conn_ids;
    for (const auto& c : g.connections) {
        if (!conn_ids.insert(c.id()).second) {
            out.add("V0", conn_name(c), "duplicate connection id");
            ok = false;
        }
        const auto src = g.kind_of(c.source());
        const auto dst = g.kind_of(c.target());
        if (!src || !dst) {
            out.add("V0", conn_name(c), "endpoint does not exist");
            ok = false;
            continue;
        }
        if (*src == ComponentKind::Output) {
            out.add("V0", conn_name(c), "a model output cannot be a source");
            ok = false;
        }
        if (*dst == ComponentKind::Input) {
            out.add("V0", conn_name(c), "a model input cannot be a target");
            ok = false;
        }
    }
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& c : g.connections) {
        if (!pairs.insert({c.source(), c.target()}).second) {
            out.add("V0", conn_name(c), "duplicate edge " + c.source() + "->" + c.target());
        }
    }
    return ok;
}

}  // namespace

ValidationReport validate(const ModelGraph& g) {
    Collector out;
    if (!check_well_formed(g, out)) return std::move(out).finish();

    // V1
    bool acyclic = true;
    try {
        topological_order(g);
    } catch (const Error& e) {
        acyclic = false;
        out.add("V1", "", e.what());
    }

    // V2
    for (const auto& n : g.networks) {
        if (g.incoming(n.id()).empty()) out.add("V2", n.id(), "network has no incoming connection");
        if (g.outgoing(n.id()).empty()) out.add("V2", n.id(), "network output is never consumed");
    }
    for (const auto& o : g.outputs) {
        if (g.incoming(o.id).empty()) out.add("V2", o.id, "model output has no incoming connection");
    }

    // V5
    for (const auto& c : g.connections) {
        const int w = component_width(g, c.source());
        if (c.subset().back() >= w) {
            out.add("V5", conn_name(c),
                    "index " + std::to_string(c.subset().back()) + " outside source width " + std::to_string(w));
        }
    }

    // V6
    for (const auto& o : g.outputs) {
        std::vector<int> widths;
        for (const Connection* c : g.incoming(o.id)) widths.push_back(c->width());
        if (widths.empty()) continue;
        const int w = combined_width(o.combiner, widths);
        if (w != o.spec.width()) {
            out.add("V6", o.id,
                    "combined width " + std::to_string(w) + " differs from declared " +
                        std::to_string(o.spec.width()));
        }
    }

    // V7
    for (const auto& n : g.networks) {
        if (n.ntype() != NetworkType::Decoder) continue;
        for (const Connection* c : g.incoming(n.id())) {
            if (c->width() % 2 != 0) {
                out.add("V7", n.id(), conn_name(*c) + " carries an odd number of variables into a decoder");
            }
        }
    }

    TypeReport types;
    if (acyclic) types = infer_types_partial(g);

    auto feeds_decoder = [&](const std::string& id) {
        return std::any_of(g.connections.begin(), g.connections.end(), [&](const Connection& c) {
            const auto* t = g.find_network(c.target());
            return c.source() == id && t && t->ntype() == NetworkType::Decoder;
        });
    };

    if (acyclic) {
        // V3
        for (const auto& o : g.outputs) {
            const auto t = incoming_type(g, types, o.id);
            if (t && *t != o.spec.dtype()) {
                out.add("V3", o.id,
                        "inferred " + std::string(to_string(*t)) + ", declared " +
                            std::string(to_string(o.spec.dtype())));
            }
        }
        for (const auto& n : g.networks) {
            if (types.at(n.id()) != n.out_spec().dtype()) {
                out.add("V3", n.id(),
                        "inferred " + std::string(to_string(types.at(n.id()))) + ", declared " +
                            std::string(to_string(n.out_spec().dtype())));
            }
        }

        // V4
        for (const auto& n : g.networks) {
            if (n.ntype() != NetworkType::Decoder) continue;
            bool has_mlp = false;
            for (const Connection* c : g.incoming(n.id())) {
                const auto* src = g.find_network(c->source());
                if (src && src->ntype() == NetworkType::GenericMLP && types.at(src->id()) == DataType::Numeric) {
                    has_mlp = true;
                }
            }
            if (!has_mlp) out.add("V4", n.id(), "decoder has no Numeric GenericMLP input");
            const auto t = incoming_type(g, types, n.id());
            if (t && *t != DataType::Numeric) {
                out.add("V4", n.id(), "decoder input is " + std::string(to_string(*t)) + ", expected numeric");
            }
        }
    }

    // V8
    std::map<std::string, int> kl_count;
    for (const auto& l : g.losses) {
        if (!(l.beta >= 0.0) || !std::isfinite(l.beta)) out.add("V8", l.id, "beta must be finite and >= 0");
        const auto kind = g.kind_of(l.prediction_site);
        if (!kind || *kind == ComponentKind::Input) {
            out.add("V8", l.id, "prediction site '" + l.prediction_site + "' is not a network or output");
            continue;
        }
        if (l.kind == LossKind::KlToStdNormal) {
            const auto* net = g.find_network(l.prediction_site);
            if (!net || net->ntype() != NetworkType::GenericMLP || !feeds_decoder(net->id())) {
                out.add("V8", l.id, "KL binding must target a GenericMLP feeding a decoder");
            }
            if (l.truth_ref != kStdNormal) out.add("V8", l.id, "KL binding truth must be StdNormal");
            ++kl_count[l.prediction_site];
            continue;
        }
        if (l.truth_ref.empty()) out.add("V8", l.id, "missing ground-truth reference");
        DataType site_type;
        if (const auto* o = g.find_output(l.prediction_site)) {
            site_type = o->spec.dtype();
        } else {
            site_type = g.find_network(l.prediction_site)->out_spec().dtype();
        }
        if (site_type != loss_dtype(l.kind)) {
            out.add("V8", l.id,
                    std::string(to_string(l.kind)) + " cannot score " + std::string(to_string(site_type)) + " data");
        }
    }
    for (const auto& n : g.networks) {
        if (n.ntype() != NetworkType::GenericMLP || !feeds_decoder(n.id())) continue;
        const int k = kl_count[n.id()];
        if (k != 1) out.add("V8", n.id(), "decoder-feeding GenericMLP has " + std::to_string(k) + " KL bindings");
    }

    // V9
    std::set<std::string> decoders_with_deletion;
    for (ConnectionId id : g.deleted_at_inference) {
        const auto* c = g.find_connection(id);
        const auto* t = c ? g.find_network(c->target()) : nullptr;
        if (!t || t->ntype() != NetworkType::Decoder) {
            out.add("V9", "c" + std::to_string(id), "deleted connection does not target a decoder");
            continue;
        }
        decoders_with_deletion.insert(t->id());
    }
    for (const auto& n : g.networks) {
        if (n.ntype() == NetworkType::Decoder && !decoders_with_deletion.count(n.id())) {
            out.add("V9", n.id(), "decoder keeps every input at inference");
        }
    }

    // V10
    const int needed = minimum_network_count(g.outputs);
    if (g.hyper.max_n < needed) {
        out.add("V10", "", "max_n " + std::to_string(g.hyper.max_n) + " below the minimum " + std::to_string(needed));
    }

    return std::move(out).finish();
}

std::string report_to_json_lines(const ValidationReport& report) {
    std::string text;
    for (const auto& v : report.violations) {
        nlohmann::json line = {{"check", v.check}, {"component", v.component}, {"message", v.message}};
        text += line.dump() + "\n";
    }
    return text;
}

}  // namespace valp
