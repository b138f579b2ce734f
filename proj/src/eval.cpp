#include "valp/eval.hpp"

#include <cmath>

namespace valp {

std::vector<int> argmax_rows(const Matrix& m) {
    std::vector<int> out(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        int best = 0;
        for (Eigen::Index c = 1; c < m.cols(); ++c) {
            if (m(r, c) > m(r, best)) best = static_cast<int>(c);
        }
        out[static_cast<std::size_t>(r)] = best;
    }
    return out;
}

double accuracy(const DataBatch& pred, const std::vector<int>& labels) {
    if (pred.rows() != static_cast<Eigen::Index>(labels.size())) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(pred.rows()) + " predictions for " +
                                                   std::to_string(labels.size()) + " labels");
    }
    if (labels.empty()) return 0.0;
    const auto guess = argmax_rows(pred.values);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += guess[i] == labels[i];
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double mse_metric(const DataBatch& pred, const DataBatch& truth) { return loss_mse(pred.values, truth.values).value; }

double class_entropy(const std::vector<int>& labels, int k) {
    if (labels.empty()) throw Error(ErrorKind::EmptyLabels, "entropy of an empty label set");
    if (k < 2) throw Error(ErrorKind::DomainError, "entropy needs k >= 2");
    std::vector<double> counts(static_cast<std::size_t>(k), 0.0);
    for (int l : labels) {
        if (l < 0 || l >= k) throw Error(ErrorKind::DomainError, "label " + std::to_string(l) + " outside [0, k)");
        counts[static_cast<std::size_t>(l)] += 1.0;
    }
    const double n = static_cast<double>(labels.size());
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log(c / n);
    }
    return h / std::log(static_cast<double>(k));
}

std::vector<int> OracleClassifier::predict(const Matrix& x) const { return argmax_rows(forward_values(weights, x)); }

OracleClassifier train_oracle(const DataSplit& data, const OracleConfig& cfg) {
    const Matrix& x = data.group("X");
    const Matrix& y = data.group("C");
    const Eigen::Index n = x.rows();
    if (n < 2) throw Error(ErrorKind::EmptyInput, "oracle needs at least two training rows");

    Rng rng(cfg.seed);
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = static_cast<int>(i);
    for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
    const auto held = std::clamp<Eigen::Index>(static_cast<Eigen::Index>(std::lround(cfg.holdout_fraction * n)), 1, n - 1);
    const std::vector<int> hold_idx(perm.begin(), perm.begin() + held);
    const std::vector<int> fit_idx(perm.begin() + held, perm.end());

    std::vector<std::string> init, act;
    std::vector<int> ns = cfg.hidden;
    act.assign(ns.size(), "relu");
    ns.push_back(cfg.classes);
    act.emplace_back("softmax");
    init.assign(ns.size(), "xavier_uniform");
    OracleClassifier oracle;
    oracle.weights = init_weights(NetworkParams(init, act, ns), static_cast<int>(x.cols()), rng);

    OptimizerState state;
    std::size_t cursor = fit_idx.size();
    std::vector<int> order = fit_idx;
    for (int step = 0; step < cfg.steps; ++step) {
        if (cursor >= order.size()) {
            for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
            cursor = 0;
        }
        const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size), order.size() - cursor);
        Matrix bx(static_cast<Eigen::Index>(take), x.cols());
        Matrix by(static_cast<Eigen::Index>(take), y.cols());
        for (std::size_t i = 0; i < take; ++i) {
            bx.row(static_cast<Eigen::Index>(i)) = x.row(order[cursor + i]);
            by.row(static_cast<Eigen::Index>(i)) = y.row(order[cursor + i]);
        }
        cursor += take;
        ForwardCache cache;
        const Matrix p = forward_values(oracle.weights, bx, &cache);
        // Softmax and cross-entropy fused: the logit gradient is (p - t) / rows.
        const LossResult loss = loss_cross_entropy(p, by);
        GradientSet g = oracle.weights.zeros_like();
        Matrix grad = loss.grad;
        for (std::size_t k = oracle.weights.layers.size(); k-- > 0;) {
            const auto& layer = oracle.weights.layers[k];
            const Matrix dz = k + 1 == oracle.weights.layers.size()
                                  ? grad
                                  : activation_backward(layer.activation, cache.outputs[k], grad);
            g.layers[k].weights.noalias() = cache.inputs[k].transpose() * dz;
            g.layers[k].biases = dz.colwise().sum().transpose();
            if (k > 0) grad = dz * layer.weights.transpose();
        }
        optimizer_step(oracle.weights, g, state, cfg.learning_rate);
    }

    const DataSplit hold = data.take(hold_idx);
    oracle.holdout_accuracy = accuracy(DataBatch{forward_values(oracle.weights, hold.group("X")), DataType::Discrete},
                                       hold.labels);
    if (oracle.holdout_accuracy < cfg.floor) {
        throw Error(ErrorKind::FloorNotMet, "oracle holdout accuracy " + std::to_string(oracle.holdout_accuracy) +
                                                " below floor " + std::to_string(cfg.floor));
    }
    return oracle;
}

double conditioning_accuracy(const OracleClassifier& oracle, const DataBatch& cond, const DataBatch& samples) {
    if (cond.rows() != samples.rows()) {
        throw Error(ErrorKind::LengthMismatch, std::to_string(cond.rows()) + " conditioning rows but " +
                                                   std::to_string(samples.rows()) + " samples");
    }
    if (cond.rows() == 0) return 0.0;
    const auto a = oracle.predict(cond.values);
    const auto b = oracle.predict(samples.values);
    std::size_t same = 0;
    for (std::size_t i = 0; i < a.size(); ++i) same += a[i] == b[i];
    return static_cast<double>(same) / static_cast<double>(a.size());
}

}  // namespace valp
