#pragma once

#include <cstdint>
#include <vector>

#include "valp/core.hpp"
#include "valp/dataset.hpp"
#include "valp/nnet.hpp"

namespace valp {

/// Fraction of rows whose argmax equals the label; ties go to the lowest
/// class index. Throws LengthMismatch.
double accuracy(const DataBatch& pred, const std::vector<int>& labels);

/// Same value as loss_mse. Throws ShapeMismatch.
double mse_metric(const DataBatch& pred, const DataBatch& truth);

/// Empirical label entropy normalized by ln k. Throws EmptyLabels, and
/// DomainError for k < 2 or labels outside [0, k).
double class_entropy(const std::vector<int>& labels, int k);

/// Row-wise argmax, lowest index on ties.
std::vector<int> argmax_rows(const Matrix& m);

struct OracleConfig {
    std::vector<int> hidden{256, 128};
    int classes = 10;
    int steps = 3000;
    int batch_size = 64;
    double learning_rate = 1e-3;
    /// Fraction of the training split held out for the recorded accuracy.
    double holdout_fraction = 0.2;
    double floor = 0.80;
    std::uint64_t seed = 0;
};

struct OracleClassifier {
    NetworkWeights weights;
    double holdout_accuracy = 0.0;

    std::vector<int> predict(const Matrix& x) const;
};

/// Dense relu classifier with a softmax head trained with Adam on the "X"
/// and "C" groups. Throws EmptyInput, or FloorNotMet when the holdout
/// accuracy is below cfg.floor.
OracleClassifier train_oracle(const DataSplit& data, const OracleConfig& cfg);

/// Fraction of rows where the oracle assigns the conditioning example and
/// the generated sample the same class. Throws LengthMismatch.
double conditioning_accuracy(const OracleClassifier& oracle, const DataBatch& cond, const DataBatch& samples);

}  // namespace valp
