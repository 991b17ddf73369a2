/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/losses.hpp"

#include <cmath>
#include <stdexcept>

namespace gpssl {

namespace {

void require_rows(const Eigen::MatrixXd& Z, Eigen::Index min_rows, const char* who) {
    if (Z.rows() < min_rows) {
        throw std::invalid_argument(std::string(who) + ": need at least " +
                                    std::to_string(min_rows) + " rows");
    }
}

}  // namespace

void LossWeights::validate() const {
    if (!(gamma > 0.0) || !(epsilon > 0.0)) {
        throw std::invalid_argument("LossWeights: gamma and epsilon must be positive");
    }
    if (c_invariance < 0.0 || c_variance < 0.0 || c_covariance < 0.0) {
        throw std::invalid_argument("LossWeights: weights must be non-negative");
    }
}

double invariance_loss(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zp) {
    if (Z.rows() != Zp.rows() || Z.cols() != Zp.cols()) {
        throw std::invalid_argument("invariance_loss: shape mismatch");
    }
    return (Z - Zp).squaredNorm() / static_cast<double>(Z.rows());
}

Eigen::MatrixXd invariance_loss_grad(const Eigen::MatrixXd& Z, const Eigen::MatrixXd& Zp) {
    if (Z.rows() != Zp.rows() || Z.cols() != Zp.cols()) {
        throw std::invalid_argument("invariance_loss_grad: shape mismatch");
    }
    return (2.0 / static_cast<double>(Z.rows())) * (Z - Zp);
}

double variance_loss(const Eigen::MatrixXd& Z, double gamma, double epsilon) {
    require_rows(Z, 2, "variance_loss");
    const double n = static_cast<double>(Z.rows());
    const Eigen::RowVectorXd mean = Z.colwise().mean();
    double total = 0.0;
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const double var = (Z.col(j).array() - mean[j]).square().sum() / (n - 1.0);
        total += std::max(0.0, gamma - std::sqrt(var + epsilon));
    }
    return total / static_cast<double>(Z.cols());
}

Eigen::MatrixXd variance_loss_grad(const Eigen::MatrixXd& Z, double gamma, double epsilon) {
    require_rows(Z, 2, "variance_loss_grad");
    const double n = static_cast<double>(Z.rows());
    const double j_count = static_cast<double>(Z.cols());
    const Eigen::RowVectorXd mean = Z.colwise().mean();
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(Z.rows(), Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        const Eigen::ArrayXd centered = Z.col(j).array() - mean[j];
        const double var = centered.square().sum() / (n - 1.0);
        const double sd = std::sqrt(var + epsilon);
        if (sd < gamma) {  // hinge active; subgradient 0 at the kink
            grad.col(j) = (-centered / (j_count * (n - 1.0) * sd)).matrix();
        }
    }
    return grad;
}

double covariance_loss(const Eigen::MatrixXd& Z) {
    require_rows(Z, 2, "covariance_loss");
    if (Z.cols() < 1) throw std::invalid_argument("covariance_loss: need J >= 1");
    const double n = static_cast<double>(Z.rows());
    const Eigen::MatrixXd centered = Z.rowwise() - Z.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (n - 1.0);
    const double off_diag_sq = cov.squaredNorm() - cov.diagonal().squaredNorm();
    return off_diag_sq / static_cast<double>(Z.cols());
}

Eigen::MatrixXd covariance_loss_grad(const Eigen::MatrixXd& Z) {
    require_rows(Z, 2, "covariance_loss_grad");
    const double n = static_cast<double>(Z.rows());
    const Eigen::MatrixXd centered = Z.rowwise() - Z.colwise().mean();
    Eigen::MatrixXd cov_bar = centered.transpose() * centered / (n - 1.0);
    cov_bar *= 2.0 / static_cast<double>(Z.cols());
    cov_bar.diagonal().setZero();
    Eigen::MatrixXd grad = (2.0 / (n - 1.0)) * centered * cov_bar;
    // chain through the column-mean subtraction
    grad.rowwise() -= grad.colwise().mean();
    return grad;
}

double gpssl_loss(const Eigen::MatrixXd& Z, const LossWeights& w) {
    w.validate();
    return w.c_variance * variance_loss(Z, w.gamma, w.epsilon) +
           w.c_covariance * covariance_loss(Z);
}

Eigen::MatrixXd gpssl_loss_grad(const Eigen::MatrixXd& Z, const LossWeights& w) {
    w.validate();
    return w.c_variance * variance_loss_grad(Z, w.gamma, w.epsilon) +
           w.c_covariance * covariance_loss_grad(Z);
}

double negative_variance_loss(const Eigen::MatrixXd& Z) {
    if (Z.cols() != 1) {
        throw std::invalid_argument("negative_variance_loss: requires a single column");
    }
    const double n = static_cast<double>(Z.rows());
    const double mean = Z.col(0).mean();
    return -(Z.col(0).array() - mean).square().sum() / n;
}

Eigen::MatrixXd negative_variance_loss_grad(const Eigen::MatrixXd& Z) {
    if (Z.cols() != 1) {
        throw std::invalid_argument("negative_variance_loss_grad: requires a single column");
    }
    const double n = static_cast<double>(Z.rows());
    const double mean = Z.col(0).mean();
    return (-2.0 / n) * (Z.array() - mean).matrix();
}

}  // namespace gpssl
