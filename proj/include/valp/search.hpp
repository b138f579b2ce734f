#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "valp/dataset.hpp"
#include "valp/eval.hpp"
#include "valp/synthesis.hpp"

namespace valp {

enum class BaselineTask { Classification, Regression };

struct BaselineConfig {
    int hidden = 100;
    int steps = 2000;
    int batch_size = 50;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;
};

/// Single-hidden-layer relu network trained on one task alone; returns test
/// accuracy (classification) or test MSE on the "R" group (regression).
double baseline_mlp(BaselineTask task, const MultitaskDataset& data, const BaselineConfig& cfg);

/// Test MSE of always predicting the mean training "R" row.
double predict_mean_mse(const MultitaskDataset& data);

struct SearchConfig {
    /// alpha, max_n, phi, betas, learning rate, batch size and steps; the
    /// seed is replaced per configuration.
    SynthesisConfig synth;
    int bins = 32;
    /// Test rows used for metrics and generations.
    int eval_rows = 1000;
    int workers = 1;
    /// When set, each synthesized graph is written here as config_<i>.json.
    std::filesystem::path graph_dir;
};

struct SearchRecord {
    int config = 0;
    std::uint64_t seed = 0;
    std::string graph_path;
    double acc = 0.0;
    double mse = 0.0;
    double entropy = 0.0;
    double cond_acc = -1.0;  ///< -1 for unconditioned samplers
    double loss_mse = 0.0;
    double loss_xent = 0.0;
    double loss_nll = 0.0;
    double loss_kl = 0.0;
    double wall_s = 0.0;
    std::string error;  ///< error kind name for failed configurations
};

/// Per-configuration seed derived from the master seed.
std::uint64_t config_seed(std::uint64_t master_seed, int index);

/// Synthesizes, trains and evaluates one configuration per index on the
/// fashion multitask layout. Failures become error records.
std::vector<SearchRecord> random_search(int n_configs, std::uint64_t master_seed, const MultitaskDataset& data,
                                        const SearchConfig& cfg, const OracleClassifier& oracle);

inline constexpr const char* kSearchCsvHeader =
    "config,seed,acc,mse,entropy,cond_acc,loss_mse,loss_xent,loss_nll,loss_kl,wall_s";

/// Header plus one row per record. Error rows carry "error:<kind>" in the
/// acc column and leave the other metrics empty. Without `with_wall` the
/// wall_s column is left empty so reruns compare byte for byte.
std::string records_to_csv(const std::vector<SearchRecord>& records, bool with_wall = true);

}  // namespace valp
