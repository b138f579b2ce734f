#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "valp/core.hpp"
#include "valp/rng.hpp"

namespace valp {

enum class Activation { Identity, Relu, Tanh, Sigmoid, Softmax };

/// Throws UnknownActivation.
Activation parse_activation(std::string_view name);

/// Applies `act` row-wise in place.
void apply_activation(Activation act, Matrix& z);

/// Gradient with respect to pre-activations given the activation output
/// `a` and the gradient with respect to it.
Matrix activation_backward(Activation act, const Matrix& a, const Matrix& grad_a);

struct LayerParams {
    Matrix weights;  ///< fan_in x fan_out
    Vector biases;   ///< fan_out
    Activation activation = Activation::Identity;

    Eigen::Index fan_in() const { return weights.rows(); }
    Eigen::Index fan_out() const { return weights.cols(); }
};

struct NetworkWeights {
    std::vector<LayerParams> layers;

    Eigen::Index input_width() const { return layers.empty() ? 0 : layers.front().fan_in(); }
    Eigen::Index output_width() const { return layers.empty() ? 0 : layers.back().fan_out(); }
    std::size_t parameter_count() const;

    /// Same layer shapes and activations, all entries zero.
    NetworkWeights zeros_like() const;
};

/// Per-parameter partial derivatives, shape-congruent with NetworkWeights.
using GradientSet = NetworkWeights;

/// xavier_uniform: U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)); scaled_normal:
/// N(0, 1/fan_in). Biases start at zero. Throws UnknownInitializer.
NetworkWeights init_weights(const NetworkParams& params, int input_width, Rng& rng);

/// Layer inputs and post-activation outputs retained for backward.
struct ForwardCache {
    std::vector<Matrix> inputs;
    std::vector<Matrix> outputs;
};

struct ForwardResult {
    DataBatch y;
    ForwardCache cache;
};

/// Affine map plus activation per layer. The result is Discrete when the
/// last layer is a softmax, Numeric otherwise. Throws ShapeMismatch.
ForwardResult forward(const NetworkWeights& w, const DataBatch& x);
Matrix forward_values(const NetworkWeights& w, const Matrix& x, ForwardCache* cache = nullptr);

/// Backpropagates `grad_out` (gradient w.r.t. the network output). When
/// `grad_in` is given it receives the gradient w.r.t. the network input.
GradientSet backward(const NetworkWeights& w, const ForwardCache& cache, const Matrix& grad_out,
                     Matrix* grad_in = nullptr);

inline constexpr double kLogEpsilon = 1e-7;
inline constexpr double kLogvarClip = 20.0;

struct LossResult {
    double value = 0.0;
    Matrix grad;
};

/// Mean of squared differences over every entry; gradient w.r.t. pred.
LossResult loss_mse(const Matrix& pred, const Matrix& truth);

/// Mean over rows of -sum(truth * log(pred + eps)). The gradient is w.r.t.
/// the pre-softmax logits that produced `pred`: (pred - truth) / rows.
LossResult loss_cross_entropy(const Matrix& pred, const Matrix& truth);

/// Same value as loss_cross_entropy; gradient w.r.t. pred itself. Used when
/// the prediction reaches the loss through further operations.
LossResult loss_cross_entropy_wrt_pred(const Matrix& pred, const Matrix& truth);

/// Bernoulli negative log-likelihood summed over columns and averaged over
/// rows; gradient w.r.t. pred. Throws DomainError for entries outside [0, 1].
LossResult loss_sample_nll(const Matrix& pred, const Matrix& truth);

struct KlResult {
    double value = 0.0;
    Matrix grad_mu;
    Matrix grad_logvar;
};

/// KL(N(mu, exp(logvar)) || N(0, I)) summed over columns, averaged over rows.
KlResult loss_kl_std_normal(const Matrix& mu, const Matrix& logvar);

struct Reparameterized {
    Matrix z;
    Matrix mu;
    Matrix logvar;  ///< clipped to [-kLogvarClip, kLogvarClip]
    Matrix eps;
    Matrix raw_logvar;
};

/// Splits an even-width batch into (mu, logvar) halves and returns
/// z = mu + exp(logvar / 2) * eps. Throws OddWidth.
Reparameterized reparameterize(const Matrix& mlp_out, Rng& rng);
Reparameterized reparameterize_with(const Matrix& mlp_out, const Matrix& eps);

/// Gradient w.r.t. the (mu, logvar) input given gradients w.r.t. z and,
/// optionally, additional direct gradients w.r.t. mu and the clipped logvar.
Matrix reparameterize_backward(const Reparameterized& r, const Matrix& grad_z, const Matrix* grad_mu = nullptr,
                               const Matrix* grad_logvar = nullptr);

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng);

enum class OptimizerKind { Adam, Sgd };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct OptimizerState {
    long step = 0;
    GradientSet m;
    GradientSet v;
};

/// One Adam (or plain SGD) update in place. Throws ShapeMismatch.
void optimizer_step(NetworkWeights& weights, const GradientSet& grads, OptimizerState& state, double learning_rate,
                    const OptimizerConfig& cfg = {});

}  // namespace valp
