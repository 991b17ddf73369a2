/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/sparse_gp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <json.hpp>

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void SparseGPModel::validate() const {
    kernel.validate();
    loss_weights.validate();
    const Eigen::Index m = inducing_inputs.rows();
    if (representation_dim < 1) {
        throw std::invalid_argument("SparseGPModel: representation_dim must be >= 1");
    }
    if (inducing_inputs.cols() != kernel.lengthscales.size()) {
        throw std::invalid_argument("SparseGPModel: inducing input dimension mismatch");
    }
    if (variational_means.rows() != m ||
        variational_means.cols() != representation_dim) {
        throw std::invalid_argument("SparseGPModel: variational_means shape mismatch");
    }
    if (static_cast<int>(variational_chol.size()) != representation_dim) {
        throw std::invalid_argument("SparseGPModel: need one Cholesky factor per dimension");
    }
    for (const MatrixXd& L : variational_chol) {
        if (L.rows() != m || L.cols() != m) {
            throw std::invalid_argument("SparseGPModel: Cholesky factor shape mismatch");
        }
        if ((L.diagonal().array() <= 0.0).any()) {
            throw std::invalid_argument(
                "SparseGPModel: Cholesky factors need strictly positive diagonals");
        }
    }
}

SparseGPModel SparseGPModel::initialize(const MatrixXd& X, const KernelSpec& kernel,
                                        const LossWeights& weights, int representation_dim,
                                        int num_inducing, std::uint64_t seed) {
    kernel.validate();
    weights.validate();
    if (X.rows() < 1) throw std::invalid_argument("initialize: empty data");
    const int m = std::min<int>(num_inducing, static_cast<int>(X.rows()));

    std::vector<Eigen::Index> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);

    SparseGPModel model;
    model.kernel = kernel;
    model.loss_weights = weights;
    model.representation_dim = representation_dim;
    model.inducing_inputs.resize(m, X.cols());
    for (int i = 0; i < m; ++i) model.inducing_inputs.row(i) = X.row(idx[i]);

    const MatrixXd kuu = gram(model.inducing_inputs, model.inducing_inputs, kernel, true);
    Eigen::LLT<MatrixXd> llt(kuu);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("initialize: K_uu factorization failed");
    }
    model.variational_means = MatrixXd::Zero(m, representation_dim);
    model.variational_chol.assign(static_cast<std::size_t>(representation_dim),
                                  MatrixXd(llt.matrixL()));
    return model;
}

namespace detail {

Eigen::LLT<MatrixXd> factorize_kuu(const MatrixXd& kuu, double jitter) {
    MatrixXd k = kuu;
    k.diagonal().array() += jitter;
    Eigen::LLT<MatrixXd> llt(k);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("K_uu factorization failed");
    }
    return llt;
}

GpFactors compute_factors(const MatrixXd& X, const SparseGPModel& model) {
    GpFactors f;
    f.kuu = gram(model.inducing_inputs, model.inducing_inputs, model.kernel, false);
    f.kuu_llt = factorize_kuu(f.kuu, model.kernel.jitter);
    f.kxu = gram(X, model.inducing_inputs, model.kernel, false);
    f.projector = f.kuu_llt.solve(f.kxu.transpose()).transpose();
    const MatrixXd kxx = gram(X, X, model.kernel, false);
    f.cond_cov = kxx - f.projector * f.kxu.transpose();

    double jitter = model.kernel.jitter;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        MatrixXd c = f.cond_cov;
        c.diagonal().array() += jitter;
        Eigen::LLT<MatrixXd> llt(c);
        if (llt.info() == Eigen::Success) {
            f.cond_chol = llt.matrixL();
            f.used_jitter = jitter;
            return f;
        }
        jitter *= 10.0;
    }
    throw NumericalError("conditional covariance factorization failed after jitter escalation");
}

}  // namespace detail

double kl_to_prior(const SparseGPModel& model) {
    model.validate();
    const MatrixXd kuu = gram(model.inducing_inputs, model.inducing_inputs, model.kernel, false);
    const auto llt = detail::factorize_kuu(kuu, model.kernel.jitter);
    const MatrixXd lk = llt.matrixL();
    const double logdet_kuu = 2.0 * lk.diagonal().array().log().sum();
    const double m_count = static_cast<double>(model.inducing_inputs.rows());

    double kl = 0.0;
    for (int j = 0; j < model.representation_dim; ++j) {
        const MatrixXd& lj = model.variational_chol[static_cast<std::size_t>(j)];
        const VectorXd alpha =
            lk.triangularView<Eigen::Lower>().solve(model.variational_means.col(j));
        const MatrixXd t = lk.triangularView<Eigen::Lower>().solve(lj);
        const double logdet_s = 2.0 * lj.diagonal().array().log().sum();
        kl += 0.5 * (t.squaredNorm() + alpha.squaredNorm() - m_count + logdet_kuu - logdet_s);
    }
    return kl;
}

ConditionalMoments conditional_given_inducing(const MatrixXd& X, const SparseGPModel& model,
                                              const MatrixXd& Uz) {
    model.validate();
    if (Uz.rows() != model.inducing_inputs.rows() ||
        Uz.cols() != model.representation_dim) {
        throw std::invalid_argument("conditional_given_inducing: Uz shape mismatch");
    }
    const auto f = detail::compute_factors(X, model);
    ConditionalMoments out;
    out.means = f.projector * Uz;
    out.cov = f.cond_cov;
    out.cov.diagonal().array() += f.used_jitter;
    return out;
}

std::vector<MatrixXd> sample_representations(const MatrixXd& X, const SparseGPModel& model,
                                             int num_samples, std::uint64_t seed) {
    model.validate();
    if (num_samples < 1) {
        throw std::invalid_argument("sample_representations: num_samples must be >= 1");
    }
    const auto f = detail::compute_factors(X, model);
    const Eigen::Index n = X.rows();
    const Eigen::Index m = model.inducing_inputs.rows();
    const int j_dims = model.representation_dim;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<MatrixXd> samples;
    samples.reserve(static_cast<std::size_t>(num_samples));
    for (int s = 0; s < num_samples; ++s) {
        MatrixXd xi(m, j_dims), zeta(n, j_dims);
        for (Eigen::Index c = 0; c < j_dims; ++c)
            for (Eigen::Index r = 0; r < m; ++r) xi(r, c) = normal(rng);
        for (Eigen::Index c = 0; c < j_dims; ++c)
            for (Eigen::Index r = 0; r < n; ++r) zeta(r, c) = normal(rng);

        MatrixXd z(n, j_dims);
        for (int j = 0; j < j_dims; ++j) {
            const VectorXd u = model.variational_means.col(j) +
                               model.variational_chol[static_cast<std::size_t>(j)]
                                       .triangularView<Eigen::Lower>() *
                                   xi.col(j);
            z.col(j) = f.projector * u +
                       f.cond_chol.triangularView<Eigen::Lower>() * zeta.col(j);
        }
        samples.push_back(std::move(z));
    }
    return samples;
}

RepresentationPosterior predict(const MatrixXd& Xstar, const SparseGPModel& model) {
    model.validate();
    const MatrixXd kuu = gram(model.inducing_inputs, model.inducing_inputs, model.kernel, false);
    const auto llt = detail::factorize_kuu(kuu, model.kernel.jitter);
    const MatrixXd ksu = gram(Xstar, model.inducing_inputs, model.kernel, false);
    const MatrixXd lk = llt.matrixL();

    // V = L^-1 K_us gives the Nystrom term; A = K_su K_uu^-1 carries S_j.
    const MatrixXd v = lk.triangularView<Eigen::Lower>().solve(ksu.transpose());
    const MatrixXd projector = llt.solve(ksu.transpose()).transpose();

    RepresentationPosterior post;
    post.means = projector * model.variational_means;
    post.variances.resize(Xstar.rows(), model.representation_dim);
    const VectorXd nystrom = v.colwise().squaredNorm();
    for (int j = 0; j < model.representation_dim; ++j) {
        const MatrixXd t =
            projector * model.variational_chol[static_cast<std::size_t>(j)];
        post.variances.col(j) = (model.kernel.signal_variance - nystrom.array() +
                                 t.rowwise().squaredNorm().array())
                                    .max(0.0)
                                    .matrix();
    }
    return post;
}

namespace {

nlohmann::json matrix_to_json(const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    return m;
}

}  // namespace

void save_model(const SparseGPModel& model, const std::string& path) {
    model.validate();
    nlohmann::json j;
    j["schema"] = "gpssl-sparse-gp-v1";
    j["kernel"] = {{"signal_variance", model.kernel.signal_variance},
                   {"lengthscales", std::vector<double>(model.kernel.lengthscales.begin(),
                                                        model.kernel.lengthscales.end())},
                   {"jitter", model.kernel.jitter}};
    j["loss_weights"] = {{"c_invariance", model.loss_weights.c_invariance},
                         {"c_variance", model.loss_weights.c_variance},
                         {"c_covariance", model.loss_weights.c_covariance},
                         {"gamma", model.loss_weights.gamma},
                         {"epsilon", model.loss_weights.epsilon}};
    j["representation_dim"] = model.representation_dim;
    j["inducing_inputs"] = matrix_to_json(model.inducing_inputs);
    j["variational_means"] = matrix_to_json(model.variational_means);
    nlohmann::json chols = nlohmann::json::array();
    for (const MatrixXd& l : model.variational_chol) chols.push_back(matrix_to_json(l));
    j["variational_chol"] = std::move(chols);

    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_model: cannot open " + path);
    out << j.dump(2) << "\n";
}

SparseGPModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_model: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema", "") != "gpssl-sparse-gp-v1") {
        throw std::runtime_error("load_model: unknown schema in " + path);
    }
    SparseGPModel model;
    const auto& k = j.at("kernel");
    model.kernel.signal_variance = k.at("signal_variance").get<double>();
    const auto ls = k.at("lengthscales").get<std::vector<double>>();
    model.kernel.lengthscales =
        Eigen::Map<const VectorXd>(ls.data(), static_cast<Eigen::Index>(ls.size()));
    model.kernel.jitter = k.at("jitter").get<double>();
    const auto& w = j.at("loss_weights");
    model.loss_weights.c_invariance = w.at("c_invariance").get<double>();
    model.loss_weights.c_variance = w.at("c_variance").get<double>();
    model.loss_weights.c_covariance = w.at("c_covariance").get<double>();
    model.loss_weights.gamma = w.at("gamma").get<double>();
    model.loss_weights.epsilon = w.at("epsilon").get<double>();
    model.representation_dim = j.at("representation_dim").get<int>();
    model.inducing_inputs = matrix_from_json(j.at("inducing_inputs"));
    model.variational_means = matrix_from_json(j.at("variational_means"));
    for (const auto& l : j.at("variational_chol")) {
        model.variational_chol.push_back(matrix_from_json(l));
    }
    model.validate();
    return model;
}

}  // namespace gpssl
