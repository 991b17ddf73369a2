/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gpssl/simd.hpp"

namespace gpssl {

void KernelSpec::validate() const {
    if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
        throw std::invalid_argument("KernelSpec: signal_variance must be positive");
    }
    if (lengthscales.size() == 0) {
        throw std::invalid_argument("KernelSpec: lengthscales must be non-empty");
    }
    for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
        if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d])) {
            throw std::invalid_argument("KernelSpec: lengthscales must be positive");
        }
    }
    if (!(jitter >= 0.0) || !std::isfinite(jitter)) {
        throw std::invalid_argument("KernelSpec: jitter must be non-negative");
    }
}

double rbf(const Eigen::VectorXd& x, const Eigen::VectorXd& y, const KernelSpec& spec) {
    spec.validate();
    const Eigen::Index dim = spec.lengthscales.size();
    if (x.size() != dim || y.size() != dim) {
        throw std::invalid_argument("rbf: input dimension does not match lengthscales");
    }
    if (!x.allFinite() || !y.allFinite()) {
        throw std::invalid_argument("rbf: non-finite input");
    }
    const Eigen::VectorXd inv_ls = spec.lengthscales.cwiseInverse();
    const double q = simd::scaled_sqdist(x.data(), y.data(), inv_ls.data(),
                                         static_cast<std::size_t>(dim));
    return spec.signal_variance * std::exp(-0.5 * q);
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                     const KernelSpec& spec, bool add_jitter) {
    spec.validate();
    const Eigen::Index dim = spec.lengthscales.size();
    if (X.cols() != dim || Y.cols() != dim) {
        throw std::invalid_argument("gram: column count does not match lengthscales");
    }
    if (!X.allFinite() || !Y.allFinite()) {
        throw std::invalid_argument("gram: non-finite input");
    }
    const bool same = X.rows() == Y.rows() && (&X == &Y || X == Y);
    if (add_jitter && !same) {
        throw std::invalid_argument("gram: add_jitter requires X == Y");
    }

    const Eigen::VectorXd inv_ls = spec.lengthscales.cwiseInverse();
    const std::size_t d = static_cast<std::size_t>(dim);
    const auto fn = simd::scaled_sqdist_fn();
    // Row-major copies so each observation is contiguous for the distance kernel.
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor Xr = X;
    Eigen::MatrixXd K(X.rows(), Y.rows());

    if (same) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            K(i, i) = spec.signal_variance;
            for (Eigen::Index j = i + 1; j < X.rows(); ++j) {
                const double q = fn(Xr.row(i).data(), Xr.row(j).data(), inv_ls.data(), d);
                const double v = spec.signal_variance * std::exp(-0.5 * q);
                K(i, j) = v;
                K(j, i) = v;
            }
        }
        if (add_jitter) K.diagonal().array() += spec.jitter;
        return K;
    }

    const RowMajor Yr = Y;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index j = 0; j < Y.rows(); ++j) {
            const double q = fn(Xr.row(i).data(), Yr.row(j).data(), inv_ls.data(), d);
            K(i, j) = spec.signal_variance * std::exp(-0.5 * q);
        }
    }
    return K;
}

Eigen::VectorXd lengthscale_heuristic(const Eigen::MatrixXd& X, int neighbors) {
    const Eigen::Index n = X.rows();
    if (neighbors < 1 || neighbors >= n) {
        throw std::invalid_argument("lengthscale_heuristic: need 1 <= neighbors < N");
    }
    if (!X.allFinite()) {
        throw std::invalid_argument("lengthscale_heuristic: non-finite input");
    }
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const RowMajor Xr = X;
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(X.cols());
    const std::size_t d = static_cast<std::size_t>(X.cols());
    const auto fn = simd::scaled_sqdist_fn();

    double max_sq = 0.0;
    std::vector<double> dists(static_cast<std::size_t>(n) - 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        std::size_t m = 0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            dists[m++] = fn(Xr.row(i).data(), Xr.row(j).data(), ones.data(), d);
        }
        std::nth_element(dists.begin(), dists.begin() + (neighbors - 1), dists.end());
        max_sq = std::max(max_sq, dists[static_cast<std::size_t>(neighbors - 1)]);
    }
    const double scale = std::sqrt(max_sq);
    if (!(scale > 0.0)) {
        throw std::invalid_argument(
            "lengthscale_heuristic: degenerate zero lengthscale (duplicate data)");
    }
    return Eigen::VectorXd::Constant(X.cols(), scale);
}

}  // namespace gpssl
