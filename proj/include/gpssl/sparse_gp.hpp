/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "gpssl/kernel.hpp"
#include "gpssl/losses.hpp"

namespace gpssl {

/// Raised when a covariance factorization fails beyond jitter escalation.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Per-point, per-dimension Gaussian marginals over representations.
struct RepresentationPosterior {
    Eigen::MatrixXd means;      // N x J
    Eigen::MatrixXd variances;  // N x J, entrywise >= 0
};

/// Sparse variational GP over J independent representation dimensions that
/// share one kernel and one set of inducing inputs.
struct SparseGPModel {
    Eigen::MatrixXd inducing_inputs;               // M x D
    Eigen::MatrixXd variational_means;             // M x J
    std::vector<Eigen::MatrixXd> variational_chol; // J lower-triangular M x M factors
    KernelSpec kernel;
    LossWeights loss_weights;
    int representation_dim = 0;

    /// Inducing inputs drawn as random distinct training rows (seeded);
    /// variational distribution initialized to the prior (means 0, S_j = K_uu).
    static SparseGPModel initialize(const Eigen::MatrixXd& X, const KernelSpec& kernel,
                                    const LossWeights& weights, int representation_dim,
                                    int num_inducing, std::uint64_t seed);

    void validate() const;
};

/// Sum over dimensions of KL(N(m_j, S_j) || N(0, K_uu)).
double kl_to_prior(const SparseGPModel& model);

struct ConditionalMoments {
    Eigen::MatrixXd means;  // N x J
    Eigen::MatrixXd cov;    // N x N, shared across dimensions
};

/// Moments of p(Z | U_z) at the rows of X: per-dimension mean
/// K_xu K_uu^-1 Uz_j and shared covariance K_xx - K_xu K_uu^-1 K_ux
/// (jitter added on the diagonal).
ConditionalMoments conditional_given_inducing(const Eigen::MatrixXd& X,
                                              const SparseGPModel& model,
                                              const Eigen::MatrixXd& Uz);

/// Reparameterized two-stage draws from the representation posterior at the
/// rows of X; deterministic given the seed.
std::vector<Eigen::MatrixXd> sample_representations(const Eigen::MatrixXd& X,
                                                    const SparseGPModel& model,
                                                    int num_samples, std::uint64_t seed);

/// Closed-form marginals of int p(z*|U_z) q(U_z) dU_z. Variances are clamped
/// at zero after the numerical subtraction.
RepresentationPosterior predict(const Eigen::MatrixXd& Xstar, const SparseGPModel& model);

void save_model(const SparseGPModel& model, const std::string& path);
SparseGPModel load_model(const std::string& path);

namespace detail {

/// Kernel-dependent factors shared by sampling, prediction and training.
/// Valid while the kernel and inducing inputs are unchanged.
struct GpFactors {
    Eigen::LLT<Eigen::MatrixXd> kuu_llt;  // chol of K_uu + jitter I
    Eigen::MatrixXd kuu;                  // K_uu without jitter
    Eigen::MatrixXd kxu;                  // N x M
    Eigen::MatrixXd projector;            // A = K_xu K_uu^-1, N x M
    Eigen::MatrixXd cond_cov;             // conditional covariance before jitter
    Eigen::MatrixXd cond_chol;            // lower chol of cond_cov + used jitter
    double used_jitter = 0.0;             // jitter after any escalation
};

/// Builds the conditional factors for the rows of X; escalates the jitter on
/// the conditional covariance by 10x at most three times before throwing.
GpFactors compute_factors(const Eigen::MatrixXd& X, const SparseGPModel& model);

/// chol of K_uu + jitter I, throwing NumericalError on failure.
Eigen::LLT<Eigen::MatrixXd> factorize_kuu(const Eigen::MatrixXd& kuu, double jitter);

}  // namespace detail

}  // namespace gpssl
