#pragma once

#include <vector>

#include "valp/core.hpp"

namespace valp {

/// The five-network worked example: one 10-feature input, a Samples output
/// of width 5, a 1-wide Numeric output and a `classes`-wide Discrete output,
/// nine connections c0..c8 and β = 0.5 KL / 0.8 NLL / 0.9 MSE / 1.0 XENT.
/// The decoder input c3 is deleted at inference.
ModelGraph worked_example_model(int classes = 3);

/// The same topology sized for the multitask fashion-MNIST problem (784
/// pixels in; 784 samples, `bins` histogram values and 10 classes out). The
/// classifier additionally reads n1 through c9 so that class information
/// does not have to squeeze through the regression head. Histogram MSE is
/// about 1e-3 against a Bernoulli NLL near 200, so its beta is raised to 1000
/// to keep the regression head from being swamped on shared weights.
ModelGraph fashion_example_model(int bins = 32, int latent = 32);

/// Input and output declarations of the multitask fashion-MNIST problem:
/// i0 (784, Numeric); o0 (bins, Numeric), o1 (10, Discrete), o2 (784,
/// Samples); all outputs combine by addition.
std::vector<ModelInputSpec> fashion_inputs();
std::vector<ModelOutputSpec> fashion_outputs(int bins = 32);

}  // namespace valp
