/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpssl/losses.hpp"

namespace gpssl {

/// Gaussian-noise positive pairs: per-dimension noise std is
/// noise_ratio * feature_stds[d].
struct AugmentConfig {
    double noise_ratio = 0.2;
    Eigen::VectorXd feature_stds;
};

Eigen::MatrixXd augment(const Eigen::MatrixXd& X, const AugmentConfig& cfg,
                        std::mt19937_64& rng);

/// Encoder (D -> 10 -> J) and expander (J -> 5 -> J), each with one
/// batch-normalized rectified hidden layer. Weights are stored out x in.
struct MlpNet {
    Eigen::MatrixXd enc_w1;  // 10 x D
    Eigen::VectorXd enc_b1;
    Eigen::VectorXd bn1_gamma, bn1_beta, bn1_run_mean, bn1_run_var;
    Eigen::MatrixXd enc_w2;  // J x 10
    Eigen::VectorXd enc_b2;

    Eigen::MatrixXd exp_w1;  // 5 x J
    Eigen::VectorXd exp_b1;
    Eigen::VectorXd bn2_gamma, bn2_beta, bn2_run_mean, bn2_run_var;
    Eigen::MatrixXd exp_w2;  // J x 5
    Eigen::VectorXd exp_b2;

    static MlpNet initialize(int input_dim, int representation_dim, std::uint64_t seed);
};

struct VicregTrainConfig {
    int representation_dim = 5;
    int iterations = 2000;
    int warmup_iterations = 20;
    double warmup_learning_rate = 1e-3;
    double learning_rate = 1e-4;
    std::uint64_t seed = 0;
};

struct VicregTrace {
    std::vector<double> invariance, variance, covariance, total;
};

struct VicregResult {
    MlpNet net;
    VicregTrace trace;
};

/// Full-batch training on two fresh augmented views per iteration; the loss
/// applies the invariance term across views and the variance/covariance
/// terms to each view's expander output.
VicregResult vicreg_train(const Eigen::MatrixXd& X, const AugmentConfig& aug,
                          const LossWeights& weights, const VicregTrainConfig& config);

/// Encoder output with batch norm in inference mode (running statistics).
Eigen::MatrixXd vicreg_embed(const Eigen::MatrixXd& Xstar, const MlpNet& net);

void save_vicreg(const MlpNet& net, const std::string& path);
MlpNet load_vicreg(const std::string& path);

namespace detail {

struct VicregStep {
    double total = 0.0, invariance = 0.0, variance = 0.0, covariance = 0.0;
    MlpNet grads;  // running-statistics fields unused
};

/// Loss and parameter gradients for a fixed pair of views (training-mode
/// batch norm); pure, running statistics untouched. Exposed for gradient
/// tests and the trainer.
VicregStep vicreg_loss_and_grad(const MlpNet& net, const Eigen::MatrixXd& Xa,
                                const Eigen::MatrixXd& Xb, const LossWeights& weights);

/// Training-mode forward that also updates the running batch-norm statistics.
void update_running_stats(MlpNet& net, const Eigen::MatrixXd& X, double momentum);

std::vector<double> flatten(const MlpNet& net);
void unflatten(const std::vector<double>& theta, MlpNet& net);

}  // namespace detail

}  // namespace gpssl
