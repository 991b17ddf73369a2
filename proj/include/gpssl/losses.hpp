/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <Eigen/Core>

namespace gpssl {

/// Weights and constants for the variance/covariance/invariance loss family.
struct LossWeights {
    double c_invariance = 0.0;  // used by the VICReg baseline only
    double c_variance = 50.0;
    double c_covariance = 10.0;
    double gamma = 1.0;
    double epsilon = 1e-7;

    void validate() const;
};

/// (1/N) sum_i || z_i - z'_i ||^2.
double invariance_loss(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zp);
/// d invariance_loss / dZ; the gradient w.r.t. Zp is its negation.
Eigen::MatrixXd invariance_loss_grad(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zp);

/// (1/J) sum_j max(0, gamma - sqrt(Var(z^j) + epsilon)), column variance with
/// denominator N-1. Requires N >= 2.
double variance_loss(const Eigen::MatrixXd& Z, double gamma, double epsilon);
Eigen::MatrixXd variance_loss_grad(const Eigen::MatrixXd& Z, double gamma, double epsilon);

/// (1/J) sum_{a != b} C_ab^2 with C the sample covariance of the columns of Z.
double covariance_loss(const Eigen::MatrixXd& Z);
Eigen::MatrixXd covariance_loss_grad(const Eigen::MatrixXd& Z);

/// c_V * variance_loss + c_C * covariance_loss (no invariance term).
double gpssl_loss(const Eigen::MatrixXd& Z, const LossWeights& w);
Eigen::MatrixXd gpssl_loss_grad(const Eigen::MatrixXd& Z, const LossWeights& w);

/// -(1/N) sum_i (z_i - mean)^2 for a single column; the less robust variance
/// substitute used by the kernel-PCA equivalence oracle.
double negative_variance_loss(const Eigen::MatrixXd& Z);
Eigen::MatrixXd negative_variance_loss_grad(const Eigen::MatrixXd& Z);

}  // namespace gpssl
