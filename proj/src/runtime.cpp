#include "valp/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "valp/combinators.hpp"
#include "valp/validator.hpp"

namespace valp {

namespace {

bool is_decoder(const ModelGraph& g, const std::string& id) {
    const auto* n = g.find_network(id);
    return n && n->ntype() == NetworkType::Decoder;
}

CombinerKind combiner_of(const ModelGraph& g, const std::string& id) {
    if (const auto* n = g.find_network(id)) return n->combiner();
    return g.find_output(id)->combiner;
}

Matrix combine_parts(CombinerKind kind, const std::vector<Matrix>& parts) {
    if (parts.size() == 1) return parts.front();
    const Eigen::Index rows = parts.front().rows();
    if (kind == CombinerKind::Concat) {
        Eigen::Index width = 0;
        for (const auto& p : parts) width += p.cols();
        Matrix out(rows, width);
        Eigen::Index at = 0;
        for (const auto& p : parts) {
            out.middleCols(at, p.cols()) = p;
            at += p.cols();
        }
        return out;
    }
    Eigen::Index width = parts.front().cols();
    for (const auto& p : parts) width = std::min(width, p.cols());
    Matrix out = Matrix::Zero(rows, width);
    for (const auto& p : parts) out += p.leftCols(width);
    return out;
}

/// Gradient of each part given the gradient of the combined value.
std::vector<Matrix> split_gradient(CombinerKind kind, const Matrix& grad, const std::vector<Eigen::Index>& widths) {
    std::vector<Matrix> out;
    out.reserve(widths.size());
    if (kind == CombinerKind::Concat || widths.size() == 1) {
        Eigen::Index at = 0;
        for (auto w : widths) {
            out.emplace_back(grad.middleCols(at, w));
            if (kind == CombinerKind::Concat) at += w;
        }
        return out;
    }
    for (auto w : widths) {
        Matrix g = Matrix::Zero(grad.rows(), w);
        g.leftCols(grad.cols()) = grad;
        out.push_back(std::move(g));
    }
    return out;
}

Matrix gather(const Matrix& src, const std::vector<int>& subset) {
    if (static_cast<Eigen::Index>(subset.size()) == src.cols() && subset.back() == static_cast<int>(src.cols()) - 1) {
        return src;
    }
    Matrix out(src.rows(), static_cast<Eigen::Index>(subset.size()));
    for (std::size_t k = 0; k < subset.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = src.col(subset[k]);
    return out;
}

void scatter_add(Matrix& dst, const Matrix& part, const std::vector<int>& subset) {
    if (static_cast<Eigen::Index>(subset.size()) == dst.cols() && subset.back() == static_cast<int>(dst.cols()) - 1) {
        dst += part;
        return;
    }
    for (std::size_t k = 0; k < subset.size(); ++k) dst.col(subset[k]) += part.col(static_cast<Eigen::Index>(k));
}

struct ConnValue {
    Matrix part;
    std::optional<Reparameterized> rep;
    bool noise = false;
};

struct Pass {
    std::map<std::string, Matrix> values;
    std::map<ConnectionId, ConnValue> conns;
    std::map<std::string, ForwardCache> caches;
};

Pass run_forward(const ExecutableModel& m, const BatchMap& inputs, Mode mode, Rng& rng, bool keep_cache) {
    const ModelGraph& g = m.graph;
    Pass p;
    Eigen::Index rows = -1;
    for (const auto& i : g.inputs) {
        const auto it = inputs.find(i.id);
        if (it == inputs.end()) throw Error(ErrorKind::MissingInput, "no batch for model input '" + i.id + "'");
        if (it->second.width() != i.spec.width()) {
            throw Error(ErrorKind::ShapeMismatch, "input '" + i.id + "' has width " +
                                                      std::to_string(it->second.width()) + ", declared " +
                                                      std::to_string(i.spec.width()));
        }
        if (rows >= 0 && it->second.rows() != rows) throw Error(ErrorKind::RowMismatch, "input batches differ in rows");
        rows = it->second.rows();
    }
    for (const auto& [id, batch] : inputs) {
        if (!g.find_input(id)) throw Error(ErrorKind::MissingInput, "'" + id + "' is not a model input");
    }
    if (rows < 0) rows = 1;

    for (const auto& id : m.order) {
        const auto kind = *g.kind_of(id);
        if (kind == ComponentKind::Input) {
            p.values[id] = inputs.at(id).values;
            continue;
        }
        const bool decoder = is_decoder(g, id);
        std::vector<Matrix> parts;
        for (const Connection* c : g.incoming(id)) {
            ConnValue cv;
            if (decoder) {
                if (mode == Mode::Infer && g.deleted_at_inference.count(c->id())) {
                    cv.noise = true;
                    cv.part = standard_normal(rows, c->width() / 2, rng);
                } else {
                    cv.rep = reparameterize(gather(p.values.at(c->source()), c->subset()), rng);
                    cv.part = cv.rep->z;
                }
            } else {
                cv.part = gather(p.values.at(c->source()), c->subset());
            }
            parts.push_back(cv.part);
            p.conns.emplace(c->id(), std::move(cv));
        }
        Matrix combined = combine_parts(combiner_of(g, id), parts);
        if (kind == ComponentKind::Network) {
            ForwardCache cache;
            p.values[id] = forward_values(m.weights.at(id), combined, keep_cache ? &cache : nullptr);
            if (keep_cache) p.caches.emplace(id, std::move(cache));
        } else {
            p.values[id] = std::move(combined);
        }
    }
    return p;
}

struct LossEval {
    double composite = 0.0;
    std::vector<double> values;
    std::map<std::string, Matrix> site_grads;
    std::map<ConnectionId, std::pair<Matrix, Matrix>> kl_grads;  ///< (d mu, d logvar), β applied
};

LossEval evaluate_losses(const ModelGraph& g, const Pass& p, const DataSplit& data, long step) {
    LossEval e;
    for (const auto& b : g.losses) {
        double value = 0.0;
        if (b.kind == LossKind::KlToStdNormal) {
            for (const Connection* c : g.outgoing(b.prediction_site)) {
                const auto it = p.conns.find(c->id());
                if (it == p.conns.end() || !it->second.rep) continue;
                const auto& rep = *it->second.rep;
                KlResult kl = loss_kl_std_normal(rep.mu, rep.logvar);
                value += kl.value;
                e.kl_grads.emplace(c->id(), std::make_pair(Matrix(b.beta * kl.grad_mu), Matrix(b.beta * kl.grad_logvar)));
            }
        } else {
            const Matrix& pred = p.values.at(b.prediction_site);
            const Matrix& truth = data.group(b.truth_ref);
            LossResult r;
            switch (b.kind) {
                case LossKind::Mse: r = loss_mse(pred, truth); break;
                case LossKind::CrossEntropy: r = loss_cross_entropy_wrt_pred(pred, truth); break;
                case LossKind::SampleNll: r = loss_sample_nll(pred, truth); break;
                case LossKind::KlToStdNormal: break;
            }
            value = r.value;
            auto [it, fresh] = e.site_grads.try_emplace(b.prediction_site, b.beta * r.grad);
            if (!fresh) it->second += b.beta * r.grad;
        }
        if (!std::isfinite(value)) {
            throw Error(ErrorKind::NonFiniteLoss,
                        "loss '" + b.id + "' is not finite at step " + std::to_string(step));
        }
        e.values.push_back(value);
        e.composite += b.beta * value;
    }
    return e;
}

std::map<std::string, GradientSet> run_backward(const ExecutableModel& m, const Pass& p, LossEval& e) {
    const ModelGraph& g = m.graph;
    std::map<std::string, Matrix> grads = std::move(e.site_grads);
    std::map<std::string, GradientSet> out;
    auto grad_of = [&](const std::string& id) -> Matrix& {
        auto it = grads.find(id);
        if (it == grads.end()) {
            const Matrix& v = p.values.at(id);
            it = grads.emplace(id, Matrix::Zero(v.rows(), v.cols())).first;
        }
        return it->second;
    };
    for (auto it = m.order.rbegin(); it != m.order.rend(); ++it) {
        const std::string& id = *it;
        const auto kind = *g.kind_of(id);
        if (kind == ComponentKind::Input) continue;
        Matrix gin;
        if (kind == ComponentKind::Network) {
            out.emplace(id, backward(m.weights.at(id), p.caches.at(id), grad_of(id), &gin));
        } else {
            gin = grad_of(id);
        }
        const auto incoming = g.incoming(id);
        std::vector<Eigen::Index> widths;
        for (const Connection* c : incoming) widths.push_back(p.conns.at(c->id()).part.cols());
        const auto parts = split_gradient(combiner_of(g, id), gin, widths);
        for (std::size_t k = 0; k < incoming.size(); ++k) {
            const Connection* c = incoming[k];
            const ConnValue& cv = p.conns.at(c->id());
            if (cv.noise) continue;
            if (cv.rep) {
                const auto kl = e.kl_grads.find(c->id());
                const Matrix* gmu = kl == e.kl_grads.end() ? nullptr : &kl->second.first;
                const Matrix* glv = kl == e.kl_grads.end() ? nullptr : &kl->second.second;
                scatter_add(grad_of(c->source()), reparameterize_backward(*cv.rep, parts[k], gmu, glv), c->subset());
            } else if (g.find_network(c->source()) || g.find_output(c->source())) {
                scatter_add(grad_of(c->source()), parts[k], c->subset());
            }
        }
    }
    return out;
}

}  // namespace

int network_input_width(const ModelGraph& g, const std::string& network) {
    const auto* n = g.find_network(network);
    if (!n) throw Error(ErrorKind::UnknownId, "no network '" + network + "'");
    const bool decoder = n->ntype() == NetworkType::Decoder;
    std::vector<int> widths;
    for (const Connection* c : g.incoming(network)) widths.push_back(decoder ? c->width() / 2 : c->width());
    if (widths.empty()) throw Error(ErrorKind::MissingInput, "network '" + network + "' has no input");
    return combined_width(n->combiner(), widths);
}

ExecutableModel compile(const ModelGraph& graph, Rng& rng) {
    const ValidationReport report = validate(graph);
    if (!report.ok) {
        const Violation& v = report.violations.front();
        throw Error(ErrorKind::InvalidGraph, v.check + " " + v.component + ": " + v.message);
    }
    ExecutableModel m;
    m.graph = graph;
    m.order = topological_order(graph);
    for (const auto& n : graph.networks) {
        m.weights.emplace(n.id(), init_weights(n.params(), network_input_width(graph, n.id()), rng));
    }
    return m;
}

std::set<ConnectionId> live_connections(const ModelGraph& graph, Mode mode) {
    std::set<ConnectionId> live;
    for (const auto& c : graph.connections) {
        if (mode == Mode::Infer && graph.deleted_at_inference.count(c.id()) && is_decoder(graph, c.target())) continue;
        live.insert(c.id());
    }
    return live;
}

std::string LossTrace::to_csv() const {
    std::ostringstream os;
    os.precision(17);
    os << "step,composite";
    for (const auto& id : binding_ids) os << ',' << id;
    os << '\n';
    for (std::size_t i = 0; i < steps.size(); ++i) {
        os << steps[i] << ',' << composite[i];
        for (double v : values[i]) os << ',' << v;
        os << '\n';
    }
    return os.str();
}

BatchMap input_batches(const ModelGraph& graph, const DataSplit& data) {
    BatchMap in;
    for (const auto& i : graph.inputs) {
        const std::string group = data.has(i.id) ? i.id : "X";
        in[i.id] = DataBatch{data.group(group), i.spec.dtype()};
    }
    return in;
}

Evaluation evaluate(const ExecutableModel& model, const DataSplit& batch, Rng& rng, bool with_gradients) {
    const Pass p = run_forward(model, input_batches(model.graph, batch), Mode::Train, rng, with_gradients);
    LossEval e = evaluate_losses(model.graph, p, batch, 0);
    Evaluation out;
    out.composite = e.composite;
    out.values = e.values;
    if (with_gradients) out.grads = run_backward(model, p, e);
    return out;
}

LossTrace train(ExecutableModel& model, const DataSplit& data, const Hyperparams& hyper, Rng& rng,
                const TrainOptions& options) {
    if (hyper.batch_size < 1) throw Error(ErrorKind::InvalidSpec, "batch size must be >= 1");
    const ModelGraph& g = model.graph;
    for (const auto& b : g.losses) {
        if (b.kind != LossKind::KlToStdNormal) (void)data.group(b.truth_ref);
    }
    (void)input_batches(g, data);
    const Eigen::Index n = data.rows();
    if (n == 0) throw Error(ErrorKind::EmptyInput, "training split is empty");

    LossTrace trace;
    for (const auto& b : g.losses) trace.binding_ids.push_back(b.id);
    trace.steps_per_epoch = static_cast<long>((n + hyper.batch_size - 1) / hyper.batch_size);

    std::map<std::string, OptimizerState> states;
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    long cursor = n;
    for (long step = 1; step <= hyper.epochs; ++step) {
        if (cursor >= n) {
            for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
            cursor = 0;
        }
        const long take = std::min<long>(hyper.batch_size, n - cursor);
        const DataSplit batch = data.take(std::vector<int>(perm.begin() + cursor, perm.begin() + cursor + take));
        cursor += take;

        const Pass p = run_forward(model, input_batches(g, batch), Mode::Train, rng, true);
        LossEval e = evaluate_losses(g, p, batch, step);
        const auto grads = run_backward(model, p, e);
        for (auto& [id, w] : model.weights) {
            optimizer_step(w, grads.at(id), states[id], hyper.learning_rate, options.optimizer);
        }
        trace.steps.push_back(step);
        trace.composite.push_back(e.composite);
        trace.values.push_back(std::move(e.values));
        if (options.on_step) options.on_step(step, trace.composite.back());
    }
    return trace;
}

BatchMap infer(const ExecutableModel& model, const BatchMap& inputs, Rng& rng) {
    const Pass p = run_forward(model, inputs, model.mode, rng, false);
    BatchMap out;
    for (const auto& o : model.graph.outputs) out[o.id] = DataBatch{p.values.at(o.id), o.spec.dtype()};
    return out;
}

bool has_conditioning_path(const ModelGraph& graph) {
    for (const auto& n : graph.networks) {
        if (n.ntype() != NetworkType::Decoder) continue;
        for (const Connection* c : graph.incoming(n.id())) {
            if (graph.deleted_at_inference.count(c->id())) continue;
            for (const auto& i : graph.inputs) {
                if (reachable(graph, i.id, c->source()) || i.id == c->source()) return true;
            }
        }
    }
    return false;
}

DataBatch conditioned_sample(const ExecutableModel& model, const BatchMap& conditioning, int n, Rng& rng) {
    if (!has_conditioning_path(model.graph)) {
        throw Error(ErrorKind::Unconditioned, "no decoder keeps a live input at inference");
    }
    if (n < 1) throw Error(ErrorKind::InvalidSpec, "sample count must be >= 1");
    BatchMap rep;
    for (const auto& [id, b] : conditioning) {
        Matrix m(b.rows() * n, b.width());
        for (Eigen::Index r = 0; r < b.rows(); ++r) {
            for (int k = 0; k < n; ++k) m.row(r * n + k) = b.values.row(r);
        }
        rep[id] = DataBatch{std::move(m), b.dtype};
    }
    const Pass p = run_forward(model, rep, Mode::Infer, rng, false);
    for (const auto& o : model.graph.outputs) {
        if (o.spec.dtype() == DataType::Samples) return DataBatch{p.values.at(o.id), DataType::Samples};
    }
    throw Error(ErrorKind::InvalidGraph, "model has no Samples output");
}

}  // namespace valp
