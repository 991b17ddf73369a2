/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "gpssl/kernel.hpp"

namespace gpssl {

/// Fitted kernel PCA: dual coefficients scaled so each implied feature-space
/// direction has unit norm (alpha_j' alpha_j = 1 / lambda_j).
struct KpcaModel {
    Eigen::MatrixXd train_inputs;  // N x D
    KernelSpec kernel;
    Eigen::MatrixXd alphas;       // N x J
    Eigen::VectorXd eigenvalues;  // descending, > 0
    Eigen::VectorXd row_means;    // row means of the training Gram matrix
    double total_mean = 0.0;
};

/// Double centering: K - 1K - K1 + 1K1 with 1 the all-(1/N) matrix.
Eigen::MatrixXd center_gram(const Eigen::MatrixXd& k);

/// Top-J eigenpairs of the centered Gram. Errors when fewer than J
/// eigenvalues exceed 1e-10. Component signs are fixed so the
/// largest-magnitude dual coefficient is positive.
KpcaModel kpca_fit(const Eigen::MatrixXd& X, const KernelSpec& kernel, int num_components);

/// Centered cross-Gram times the dual coefficients; reproduces fit-time
/// scores on the training inputs.
Eigen::MatrixXd kpca_project(const Eigen::MatrixXd& Xstar, const KpcaModel& model);

struct Prop1Row {
    double c_variance;
    double cosine;  // |cos| between the posterior's flattest direction and the
                    // first kernel-PCA score vector
    bool bounded;
};

struct Prop1Report {
    std::vector<Prop1Row> rows;
    double lambda1 = 0.0;             // top eigenvalue of the centered Gram
    double predicted_critical = 0.0;  // N / (2 lambda1)
};

/// For a one-dimensional representation with the negative-variance loss, the
/// posterior log-density is a quadratic form; this scans c_V values, reports
/// whether the posterior stays bounded and how closely its weakest-curvature
/// direction aligns with the first kernel-PCA component. Above the critical
/// c_V the objective is unbounded; that is reported, not raised.
Prop1Report prop1_oracle(const Eigen::MatrixXd& X, const KernelSpec& kernel,
                         const std::vector<double>& c_grid);

void write_prop1_csv(const Prop1Report& report, const std::string& path);

}  // namespace gpssl
