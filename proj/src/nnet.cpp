#include "valp/nnet.hpp"

#include <cmath>

namespace valp {

Activation parse_activation(std::string_view name) {
    if (name == "identity") return Activation::Identity;
    if (name == "relu") return Activation::Relu;
    if (name == "tanh") return Activation::Tanh;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    throw Error(ErrorKind::UnknownActivation, "unknown activation '" + std::string(name) + "'");
}

void apply_activation(Activation act, Matrix& z) {
    switch (act) {
        case Activation::Identity: break;
        case Activation::Relu: z = z.cwiseMax(0.0); break;
        case Activation::Tanh: z = z.array().tanh().matrix(); break;
        case Activation::Sigmoid: z = (1.0 / (1.0 + (-z.array()).exp())).matrix(); break;
        case Activation::Softmax:
            for (Eigen::Index r = 0; r < z.rows(); ++r) {
                auto row = z.row(r);
                row.array() -= row.maxCoeff();
                row = row.array().exp().matrix();
                row /= row.sum();
            }
            break;
    }
}

Matrix activation_backward(Activation act, const Matrix& a, const Matrix& grad_a) {
    switch (act) {
        case Activation::Identity: return grad_a;
        case Activation::Relu: return (a.array() > 0.0).select(grad_a, 0.0);
        case Activation::Tanh: return (grad_a.array() * (1.0 - a.array().square())).matrix();
        case Activation::Sigmoid: return (grad_a.array() * a.array() * (1.0 - a.array())).matrix();
        case Activation::Softmax: {
            const Eigen::VectorXd dots = (grad_a.array() * a.array()).rowwise().sum();
            return (a.array() * (grad_a.colwise() - dots).array()).matrix();
        }
    }
    return grad_a;
}

std::size_t NetworkWeights::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weights.size() + l.biases.size());
    return n;
}

NetworkWeights NetworkWeights::zeros_like() const {
    NetworkWeights z;
    for (const auto& l : layers) {
        z.layers.push_back({Matrix::Zero(l.fan_in(), l.fan_out()), Vector::Zero(l.fan_out()), l.activation});
    }
    return z;
}

NetworkWeights init_weights(const NetworkParams& params, int input_width, Rng& rng) {
    if (input_width < 1) throw Error(ErrorKind::ShapeMismatch, "input width must be >= 1");
    NetworkWeights w;
    int fan_in = input_width;
    for (std::size_t l = 0; l < params.layers(); ++l) {
        const int fan_out = params.ns()[l];
        LayerParams layer{Matrix(fan_in, fan_out), Vector::Zero(fan_out), parse_activation(params.act()[l])};
        const std::string& init = params.init()[l];
        if (init == "xavier_uniform") {
            const double bound = std::sqrt(6.0 / (fan_in + fan_out));
            for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = rng.uniform(-bound, bound);
        } else if (init == "scaled_normal") {
            const double sd = std::sqrt(1.0 / fan_in);
            for (Eigen::Index i = 0; i < layer.weights.size(); ++i) layer.weights.data()[i] = sd * rng.normal();
        } else {
            throw Error(ErrorKind::UnknownInitializer, "unknown initializer '" + init + "'");
        }
        w.layers.push_back(std::move(layer));
        fan_in = fan_out;
    }
    return w;
}

Matrix forward_values(const NetworkWeights& w, const Matrix& x, ForwardCache* cache) {
    if (x.cols() != w.input_width()) {
        throw Error(ErrorKind::ShapeMismatch, "input width " + std::to_string(x.cols()) + " but network expects " +
                                                  std::to_string(w.input_width()));
    }
    if (cache) {
        cache->inputs.clear();
        cache->outputs.clear();
    }
    Matrix a = x;
    for (const auto& layer : w.layers) {
        Matrix z = a * layer.weights;
        z.rowwise() += layer.biases.transpose();
        apply_activation(layer.activation, z);
        if (cache) cache->inputs.push_back(std::move(a));
        a = std::move(z);
        if (cache) cache->outputs.push_back(a);
    }
    return a;
}

ForwardResult forward(const NetworkWeights& w, const DataBatch& x) {
    ForwardResult r;
    r.y.values = forward_values(w, x.values, &r.cache);
    r.y.dtype = (!w.layers.empty() && w.layers.back().activation == Activation::Softmax) ? DataType::Discrete
                                                                                          : DataType::Numeric;
    return r;
}

GradientSet backward(const NetworkWeights& w, const ForwardCache& cache, const Matrix& grad_out, Matrix* grad_in) {
    GradientSet g = w.zeros_like();
    Matrix grad = grad_out;
    for (std::size_t k = w.layers.size(); k-- > 0;) {
        const auto& layer = w.layers[k];
        const Matrix dz = activation_backward(layer.activation, cache.outputs[k], grad);
        g.layers[k].weights.noalias() = cache.inputs[k].transpose() * dz;
        g.layers[k].biases = dz.colwise().sum().transpose();
        if (k > 0 || grad_in) grad = dz * layer.weights.transpose();
    }
    if (grad_in) *grad_in = std::move(grad);
    return g;
}

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw Error(ErrorKind::ShapeMismatch, std::string(what) + ": " + std::to_string(a.rows()) + "x" +
                                                  std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                                  std::to_string(b.cols()));
    }
}

}  // namespace

LossResult loss_mse(const Matrix& pred, const Matrix& truth) {
    require_same_shape(pred, truth, "mse");
    const double n = static_cast<double>(pred.size());
    const Matrix diff = pred - truth;
    return {diff.squaredNorm() / n, (2.0 / n) * diff};
}

LossResult loss_cross_entropy(const Matrix& pred, const Matrix& truth) {
    require_same_shape(pred, truth, "cross entropy");
    const double rows = static_cast<double>(pred.rows());
    const double value = -(truth.array() * (pred.array() + kLogEpsilon).log()).sum() / rows;
    return {value, (pred - truth) / rows};
}

LossResult loss_cross_entropy_wrt_pred(const Matrix& pred, const Matrix& truth) {
    require_same_shape(pred, truth, "cross entropy");
    const double rows = static_cast<double>(pred.rows());
    const double value = -(truth.array() * (pred.array() + kLogEpsilon).log()).sum() / rows;
    return {value, (-(truth.array() / (pred.array() + kLogEpsilon)) / rows).matrix()};
}

LossResult loss_sample_nll(const Matrix& pred, const Matrix& truth) {
    require_same_shape(pred, truth, "sample nll");
    auto outside = [](const Matrix& m) {
        return m.size() > 0 && (m.minCoeff() < -kLogEpsilon || m.maxCoeff() > 1.0 + kLogEpsilon);
    };
    if (outside(pred) || outside(truth)) throw Error(ErrorKind::DomainError, "sample nll expects values in [0, 1]");
    const double rows = static_cast<double>(pred.rows());
    const auto p = pred.array();
    const auto t = truth.array();
    const double value = -(t * (p + kLogEpsilon).log() + (1.0 - t) * (1.0 - p + kLogEpsilon).log()).sum() / rows;
    Matrix grad = (-(t / (p + kLogEpsilon) - (1.0 - t) / (1.0 - p + kLogEpsilon)) / rows).matrix();
    return {value, std::move(grad)};
}

KlResult loss_kl_std_normal(const Matrix& mu, const Matrix& logvar) {
    require_same_shape(mu, logvar, "kl");
    const double rows = static_cast<double>(mu.rows());
    const auto var = logvar.array().exp();
    const double value = -0.5 * (1.0 + logvar.array() - mu.array().square() - var).sum() / rows;
    return {value, mu / rows, (0.5 * (var - 1.0) / rows).matrix()};
}

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    return m;
}

Reparameterized reparameterize_with(const Matrix& mlp_out, const Matrix& eps) {
    if (mlp_out.cols() % 2 != 0) {
        throw Error(ErrorKind::OddWidth, "cannot split width " + std::to_string(mlp_out.cols()) + " into halves");
    }
    const Eigen::Index k = mlp_out.cols() / 2;
    if (eps.rows() != mlp_out.rows() || eps.cols() != k) throw Error(ErrorKind::ShapeMismatch, "noise shape");
    Reparameterized r;
    r.mu = mlp_out.leftCols(k);
    r.raw_logvar = mlp_out.rightCols(k);
    r.logvar = r.raw_logvar.cwiseMax(-kLogvarClip).cwiseMin(kLogvarClip);
    r.eps = eps;
    r.z = r.mu + ((0.5 * r.logvar.array()).exp() * eps.array()).matrix();
    return r;
}

Reparameterized reparameterize(const Matrix& mlp_out, Rng& rng) {
    if (mlp_out.cols() % 2 != 0) {
        throw Error(ErrorKind::OddWidth, "cannot split width " + std::to_string(mlp_out.cols()) + " into halves");
    }
    return reparameterize_with(mlp_out, standard_normal(mlp_out.rows(), mlp_out.cols() / 2, rng));
}

Matrix reparameterize_backward(const Reparameterized& r, const Matrix& grad_z, const Matrix* grad_mu,
                               const Matrix* grad_logvar) {
    const Eigen::Index k = r.mu.cols();
    Matrix out(r.mu.rows(), 2 * k);
    out.leftCols(k) = grad_z;
    if (grad_mu) out.leftCols(k) += *grad_mu;
    Matrix g_lv = (grad_z.array() * r.eps.array() * 0.5 * (0.5 * r.logvar.array()).exp()).matrix();
    if (grad_logvar) g_lv += *grad_logvar;
    // The clip passes no gradient outside its range.
    const auto inside = (r.raw_logvar.array().abs() <= kLogvarClip);
    out.rightCols(k) = inside.select(g_lv, 0.0);
    return out;
}

void optimizer_step(NetworkWeights& weights, const GradientSet& grads, OptimizerState& state, double learning_rate,
                    const OptimizerConfig& cfg) {
    if (weights.layers.size() != grads.layers.size()) throw Error(ErrorKind::ShapeMismatch, "layer count differs");
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        if (weights.layers[l].weights.rows() != grads.layers[l].weights.rows() ||
            weights.layers[l].weights.cols() != grads.layers[l].weights.cols() ||
            weights.layers[l].biases.size() != grads.layers[l].biases.size()) {
            throw Error(ErrorKind::ShapeMismatch, "gradient shape differs at layer " + std::to_string(l));
        }
    }
    if (cfg.kind == OptimizerKind::Sgd) {
        for (std::size_t l = 0; l < weights.layers.size(); ++l) {
            weights.layers[l].weights -= learning_rate * grads.layers[l].weights;
            weights.layers[l].biases -= learning_rate * grads.layers[l].biases;
        }
        ++state.step;
        return;
    }
    if (state.m.layers.empty()) {
        state.m = weights.zeros_like();
        state.v = weights.zeros_like();
    }
    ++state.step;
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
        m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
        v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
        param.array() -= learning_rate * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    };
    for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        update(weights.layers[l].weights, grads.layers[l].weights, state.m.layers[l].weights, state.v.layers[l].weights);
        update(weights.layers[l].biases, grads.layers[l].biases, state.m.layers[l].biases, state.v.layers[l].biases);
    }
}

}  // namespace valp
