/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <Eigen/Core>

namespace gpssl {

/// Squared-exponential kernel parameters.
struct KernelSpec {
    double signal_variance = 1.0;
    Eigen::VectorXd lengthscales;  // one per input dimension
    double jitter = 1e-6;

    /// Throws std::invalid_argument unless signal_variance > 0, all
    /// lengthscales > 0 and jitter >= 0.
    void validate() const;
};

/// k(x, y) = signal_variance * exp(-1/2 * sum_d ((x_d - y_d) / l_d)^2).
double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelSpec& spec);

/// Pairwise kernel matrix, entry (i, j) = rbf(X.row(i), Y.row(j)).
/// add_jitter requires X and Y to be the same matrix; the result is then
/// exactly symmetric with spec.jitter added on the diagonal.
Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const KernelSpec& spec, bool add_jitter = false);

/// Isotropic lengthscale from data: the largest distance between any
/// observation and its k-th nearest neighbour (self excluded), replicated
/// across all input dimensions. Requires 1 <= neighbors < N and a nonzero
/// result (duplicate-only data is rejected).
Eigen::VectorXd lengthscale_heuristic(const Eigen::MatrixXd& X, int neighbors);

}  // namespace gpssl
