/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/kpca.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "gpssl/format.hpp"

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd center_gram(const MatrixXd& k) {
    if (k.rows() != k.cols()) throw std::invalid_argument("center_gram: K must be square");
    const VectorXd row_means = k.rowwise().mean();
    const double total = row_means.mean();
    MatrixXd centered = k;
    centered.colwise() -= row_means;
    centered.rowwise() -= row_means.transpose();
    centered.array() += total;
    return centered;
}

KpcaModel kpca_fit(const MatrixXd& X, const KernelSpec& kernel, int num_components) {
    if (num_components < 1 || num_components > X.rows()) {
        throw std::invalid_argument("kpca_fit: need 1 <= J <= N");
    }
    const MatrixXd k = gram(X, X, kernel, false);
    const MatrixXd centered = center_gram(k);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(centered);
    if (eig.info() != Eigen::Success) throw std::runtime_error("kpca_fit: eigensolver failed");

    const Eigen::Index n = X.rows();
    constexpr double kEigTol = 1e-10;
    int positive = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (eig.eigenvalues()[i] > kEigTol) ++positive;
    }
    if (positive < num_components) {
        throw std::invalid_argument("kpca_fit: centered Gram has only " +
                                    std::to_string(positive) +
                                    " positive eigenvalues above tolerance");
    }

    KpcaModel model;
    model.train_inputs = X;
    model.kernel = kernel;
    model.row_means = k.rowwise().mean();
    model.total_mean = model.row_means.mean();
    model.eigenvalues.resize(num_components);
    model.alphas.resize(n, num_components);
    for (int j = 0; j < num_components; ++j) {
        const Eigen::Index src = n - 1 - j;  // eigenvalues come back ascending
        const double lambda = eig.eigenvalues()[src];
        VectorXd alpha = eig.eigenvectors().col(src) / std::sqrt(lambda);
        Eigen::Index imax = 0;
        alpha.cwiseAbs().maxCoeff(&imax);
        if (alpha[imax] < 0.0) alpha = -alpha;
        model.eigenvalues[j] = lambda;
        model.alphas.col(j) = alpha;
    }
    return model;
}

MatrixXd kpca_project(const MatrixXd& Xstar, const KpcaModel& model) {
    const MatrixXd kstar = gram(Xstar, model.train_inputs, model.kernel, false);
    MatrixXd centered = kstar;
    centered.colwise() -= kstar.rowwise().mean();
    centered.rowwise() -= model.row_means.transpose();
    centered.array() += model.total_mean;
    return centered * model.alphas;
}

Prop1Report prop1_oracle(const MatrixXd& X, const KernelSpec& kernel,
                         const std::vector<double>& c_grid) {
    const Eigen::Index n = X.rows();
    if (n > 200) throw std::invalid_argument("prop1_oracle: desk scale only (N <= 200)");
    if (c_grid.empty()) throw std::invalid_argument("prop1_oracle: empty c_V grid");
    for (double c : c_grid) {
        if (!(c >= 0.0)) throw std::invalid_argument("prop1_oracle: c_V must be >= 0");
    }

    const KpcaModel kpca = kpca_fit(X, kernel, 1);
    const MatrixXd k = gram(X, X, kernel, true);
    const VectorXd score = kpca_project(X, kpca).col(0);

    const MatrixXd kinv = k.llt().solve(MatrixXd::Identity(n, n));
    const MatrixXd centering =
        MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));

    Prop1Report report;
    report.lambda1 = kpca.eigenvalues[0];
    report.predicted_critical = static_cast<double>(n) / (2.0 * report.lambda1);

    for (double c : c_grid) {
        // log posterior = -1/2 Z' (K^-1 - (2 c_V / N) P_c) Z; the smallest
        // eigenpair of the quadratic form gives boundedness and the direction
        // that first goes flat.
        MatrixXd quad = kinv - (2.0 * c / static_cast<double>(n)) * centering;
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(0.5 * (quad + quad.transpose()));
        if (eig.info() != Eigen::Success) {
            throw std::runtime_error("prop1_oracle: eigensolver failed");
        }
        const VectorXd dir = eig.eigenvectors().col(0);
        const double cosine =
            std::abs(dir.dot(score)) / (dir.norm() * score.norm());
        report.rows.push_back({c, cosine, eig.eigenvalues()[0] > 0.0});
    }
    return report;
}

void write_prop1_csv(const Prop1Report& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_prop1_csv: cannot open " + path);
    out << "c_variance,cosine,bounded\n";
    for (const Prop1Row& row : report.rows) {
        out << format_double(row.c_variance) << ',' << format_double(row.cosine) << ','
            << (row.bounded ? 1 : 0) << '\n';
    }
}

}  // namespace gpssl
