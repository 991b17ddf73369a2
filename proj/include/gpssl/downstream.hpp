/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "gpssl/sparse_gp.hpp"

namespace gpssl {

/// Multinomial logistic regression with a Gaussian weight prior, fitted at
/// the MAP with a Laplace covariance from the Hessian. Weights are
/// (J+1) x C with the bias in row 0.
struct BayesLogReg {
    Eigen::MatrixXd map_weights;
    Eigen::MatrixXd laplace_cov;  // over vec(weights), class-major blocks
    double prior_precision = 1.0;
    int num_classes = 0;
};

/// Damped Newton on the penalized multinomial log-likelihood; converged when
/// the gradient norm drops below 1e-6 or after 200 iterations. Separable data
/// with prior_precision = 0 is rejected as divergent.
BayesLogReg blr_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                    double prior_precision = 1.0);

/// Monte-Carlo posterior predictive over weight draws from the Laplace
/// Gaussian; weight_samples = 0 gives the plug-in MAP softmax.
Eigen::MatrixXd blr_predict(const Eigen::MatrixXd& Zstar, const BayesLogReg& model,
                            int weight_samples, std::uint64_t seed = 0);

struct MlpClassifier {
    Eigen::MatrixXd w1;  // hidden x J
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // C x hidden
    Eigen::VectorXd b2;
    int num_classes = 0;
};

struct MlpClassifierConfig {
    int hidden = 32;
    int epochs = 200;
    double learning_rate = 0.01;
    std::uint64_t seed = 0;
};

/// Two-layer rectifier network with softmax head trained full-batch by Adam
/// on the cross-entropy.
MlpClassifier mlp_fit(const Eigen::MatrixXd& Z, const Eigen::VectorXi& y,
                      const MlpClassifierConfig& config);
Eigen::MatrixXd mlp_predict_proba(const Eigen::MatrixXd& Zstar, const MlpClassifier& net);

struct DownstreamConfig {
    bool use_mlp = false;  // Bayesian logistic regression otherwise
    double prior_precision = 1.0;
    int blr_weight_samples = 100;
    MlpClassifierConfig mlp;
    std::uint64_t seed = 0;
};

/// One fitted classifier per representation sample; predictions are averaged
/// in member order.
struct ClassifierEnsemble {
    std::vector<std::variant<BayesLogReg, MlpClassifier>> members;
};

Eigen::MatrixXd classifier_predict(const std::variant<BayesLogReg, MlpClassifier>& clf,
                                   const Eigen::MatrixXd& Z, const DownstreamConfig& cfg,
                                   std::uint64_t seed);

/// Embeds via the posterior means, fits a single classifier, predicts.
Eigen::MatrixXd gpssl_mean_pipeline(const SparseGPModel& model, const Eigen::MatrixXd& Xtrain,
                                    const Eigen::VectorXi& y, const Eigen::MatrixXd& Xtest,
                                    const DownstreamConfig& cfg);

namespace detail {

struct MlpStep {
    double loss = 0.0;
    Eigen::MatrixXd gw1, gw2;
    Eigen::VectorXd gb1, gb2;
};

/// Mean cross-entropy and parameter gradients; exposed for gradient tests.
MlpStep mlp_loss_and_grad(const MlpClassifier& net, const Eigen::MatrixXd& Z,
                          const Eigen::VectorXi& y);

}  // namespace detail

/// Draws joint embedding samples over train and test points, fits one
/// classifier per sample on the train part, and averages the test
/// predictions.
Eigen::MatrixXd gpssl_full_pipeline(const SparseGPModel& model, const Eigen::MatrixXd& Xtrain,
                                    const Eigen::VectorXi& y, const Eigen::MatrixXd& Xtest,
                                    int num_embedding_samples, const DownstreamConfig& cfg);

}  // namespace gpssl
