/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpssl/sparse_gp.hpp"

namespace gpssl {

struct TrainConfig {
    int iterations = 300;
    double learning_rate = 0.01;
    int mc_samples = 8;
    std::uint64_t seed = 0;
    bool optimize_inducing = false;

    void validate() const;
};

struct TraceRow {
    int step;
    double elbo;
    double kl;
    double expected_loss;
};

/// Raised when the objective becomes non-finite during training; carries the
/// trace up to the failing step.
struct TrainingDivergedError : std::runtime_error {
    std::vector<TraceRow> trace;
    TrainingDivergedError(const std::string& what, std::vector<TraceRow> trace_)
        : std::runtime_error(what), trace(std::move(trace_)) {}
};

struct TrainResult {
    SparseGPModel model;
    std::vector<TraceRow> trace;
};

/// Monte-Carlo estimate of -E_q[loss(Z)] - KL(q || p) with config.mc_samples
/// draws; deterministic given config.seed.
double generalized_elbo(const Eigen::MatrixXd& X, const SparseGPModel& model,
                        const TrainConfig& config);

/// Adam ascent on the generalized ELBO over the variational means and
/// Cholesky factors (and the inducing inputs when configured). Noise is
/// redrawn each step; the returned trace has one row per step.
TrainResult train(const Eigen::MatrixXd& X, const SparseGPModel& initial,
                  const TrainConfig& config);

/// Compares analytic ELBO gradients against central finite differences under
/// common random numbers; returns the max relative error over all parameters.
double gradient_check(const Eigen::MatrixXd& X, const SparseGPModel& model,
                      const TrainConfig& config, double step);

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path);

}  // namespace gpssl
