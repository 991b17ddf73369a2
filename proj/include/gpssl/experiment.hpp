/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gpssl/data_io.hpp"
#include "gpssl/downstream.hpp"
#include "gpssl/inference.hpp"
#include "gpssl/kpca.hpp"
#include "gpssl/vicreg.hpp"

namespace gpssl {

/// Raised for malformed configuration; maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetSpec {
    std::string type;  // "csv" | "quadrant_circles" | "balanced_circles"
    std::string path;
    std::optional<std::string> label_column;
    std::uint64_t seed = 0;
    int n_train = 50;  // balanced_circles
    int n_test = 500;

    nlohmann::json to_json() const;
    static DatasetSpec from_json(const nlohmann::json& j);
};

Dataset build_dataset(const DatasetSpec& spec);
std::string dataset_name(const DatasetSpec& spec);

struct ExperimentConfig {
    DatasetSpec dataset;
    std::optional<DatasetSpec> downstream_dataset;
    std::string method = "gpssl";  // gpssl | kpca | vicreg | original
    int representation_dim = 5;
    std::array<double, 3> split_fractions{0.4, 0.2, 0.4};

    LossWeights gpssl_weights{};  // c_V = 50, c_C = 10 unless overridden
    int gpssl_iterations = 300;
    int mc_samples = 8;
    int num_inducing = 50;
    bool optimize_inducing = false;

    double vicreg_c_cov = 1.0;
    int vicreg_iterations = 2000;
    int vicreg_warmup_iterations = 20;
    double vicreg_warmup_lr = 1e-3;

    std::vector<int> grid_k{5, 10, 20};
    std::vector<double> grid_learning_rate{0.01, 0.05, 0.001};
    std::vector<double> grid_vicreg_c{25.0, 50.0};
    std::vector<double> grid_vicreg_learning_rate{1e-5, 5e-5, 1e-4, 5e-4};
    std::vector<double> grid_noise_ratio{0.1, 0.25, 0.5};

    bool use_mlp = false;
    double prior_precision = 1.0;
    int blr_weight_samples = 100;
    int mlp_hidden = 32;
    int mlp_epochs = 200;
    double mlp_learning_rate = 0.01;
    int num_embedding_samples = 100;

    int prop1_neighbor_k = 20;
    std::vector<double> prop1_c_grid;  // auto-built around the predicted critical when empty

    std::uint64_t seed = 0;
    std::string output_root = "runs";

    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);
    void validate() const;
};

ExperimentConfig load_config(const std::string& path);

/// FNV-1a of the canonical config serialization; names the run directory
/// together with the seed.
std::string config_hash(const ExperimentConfig& config);
std::string run_directory(const ExperimentConfig& config);

struct Hyperparams {
    int k = 10;
    double learning_rate = 0.01;
    double vicreg_c = 25.0;
    double noise_ratio = 0.2;

    nlohmann::json to_json() const;
};

/// One trained embedding; `embed` yields the deterministic representation
/// (the posterior mean for the GP method).
struct EmbeddingModel {
    std::string method;
    std::optional<SparseGPModel> gp;
    std::optional<KpcaModel> kpca;
    std::optional<MlpNet> vicreg_net;
    std::vector<TraceRow> gp_trace;

    Eigen::MatrixXd embed(const Eigen::MatrixXd& X) const;
    /// Per-point embedding stds (zero for deterministic methods).
    Eigen::MatrixXd embed_std(const Eigen::MatrixXd& X) const;
};

EmbeddingModel train_embedding(const std::string& method, const Eigen::MatrixXd& Xtrain,
                               const ExperimentConfig& config, const Hyperparams& hp,
                               std::uint64_t seed);

struct GridPointResult {
    Hyperparams params;
    double score = -std::numeric_limits<double>::infinity();
    std::string error;
};

struct GridSearchResult {
    std::vector<GridPointResult> points;
    Hyperparams best;
    double best_score = -std::numeric_limits<double>::infinity();
};

/// Scores each grid point by mean validation log-likelihood: the embedding is
/// trained on the training split, a classifier is fitted on 80% of the
/// validation split and scored on the held-out 20%. Failed points score -inf.
GridSearchResult run_grid_search(const ExperimentConfig& config, const Dataset& dataset,
                                 int workers);

struct MetricsRow {
    std::string dataset;
    std::string method;
    double accuracy = 0.0;
    double roc_auc = 0.0;
    double aurc = 0.0;
    double log_likelihood = 0.0;
};

struct ExperimentResult {
    std::string run_dir;
    std::vector<MetricsRow> metrics;
    GridSearchResult grid;
};

/// Full pipeline: dataset, grid search, embedding, downstream classification
/// and metrics, with every artifact written under the run directory.
ExperimentResult run_experiment(const ExperimentConfig& config, int workers);

/// Builds the configured dataset and writes the kernel-PCA equivalence
/// report; returns the report.
Prop1Report run_prop1_check(const ExperimentConfig& config);

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::string& path);
void write_predictions_csv(const Eigen::MatrixXd& probs, const std::string& path);

}  // namespace gpssl
