/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/downstream.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using Eigen::VectorXi;

namespace {

MatrixXd softmax_rows(const MatrixXd& logits) {
    MatrixXd probs(logits.rows(), logits.cols());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double m = logits.row(i).maxCoeff();
        const Eigen::ArrayXd e = (logits.row(i).array() - m).exp();
        probs.row(i) = (e / e.sum()).matrix();
    }
    return probs;
}

MatrixXd with_bias(const MatrixXd& Z) {
    MatrixXd x(Z.rows(), Z.cols() + 1);
    x.col(0).setOnes();
    x.rightCols(Z.cols()) = Z;
    return x;
}

MatrixXd one_hot(const VectorXi& y, int classes) {
    MatrixXd h = MatrixXd::Zero(y.size(), classes);
    for (Eigen::Index i = 0; i < y.size(); ++i) h(i, y[i]) = 1.0;
    return h;
}

int count_classes(const VectorXi& y) {
    if (y.size() == 0) throw std::invalid_argument("labels: empty");
    if (y.minCoeff() < 0) throw std::invalid_argument("labels: negative class index");
    return y.maxCoeff() + 1;
}

}  // namespace

BayesLogReg blr_fit(const MatrixXd& Z, const VectorXi& y, double prior_precision) {
    if (Z.rows() != y.size()) throw std::invalid_argument("blr_fit: shape mismatch");
    if (prior_precision < 0.0) throw std::invalid_argument("blr_fit: negative prior precision");
    const int classes = count_classes(y);
    if (classes < 2) throw std::invalid_argument("blr_fit: need at least two classes present");
    if (Z.rows() < classes) throw std::invalid_argument("blr_fit: need N >= number of classes");

    const MatrixXd x = with_bias(Z);
    const Eigen::Index p = x.cols();
    const MatrixXd targets = one_hot(y, classes);
    MatrixXd w = MatrixXd::Zero(p, classes);

    auto objective = [&](const MatrixXd& weights) {
        const MatrixXd probs = softmax_rows(x * weights);
        double nll = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            nll -= std::log(std::max(probs(i, y[i]), 1e-300));
        }
        return nll + 0.5 * prior_precision * weights.squaredNorm();
    };

    const Eigen::Index dim = p * classes;
    double obj = objective(w);
    for (int iter = 0; iter < 200; ++iter) {
        const MatrixXd probs = softmax_rows(x * w);
        const MatrixXd grad_mat = x.transpose() * (probs - targets) + prior_precision * w;
        if (grad_mat.norm() < 1e-6) break;
        if (w.cwiseAbs().maxCoeff() > 1e8) {
            throw std::runtime_error(
                "blr_fit: weights diverged (separable data with zero prior precision?)");
        }

        // Full Hessian over vec(w), class-major blocks.
        MatrixXd hess = MatrixXd::Zero(dim, dim);
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const VectorXd pi = probs.row(i).transpose();
            const MatrixXd r = MatrixXd(pi.asDiagonal()) - pi * pi.transpose();
            for (int a = 0; a < classes; ++a) {
                for (int b = 0; b < classes; ++b) {
                    if (r(a, b) == 0.0) continue;
                    hess.block(a * p, b * p, p, p) +=
                        r(a, b) * (x.row(i).transpose() * x.row(i));
                }
            }
        }
        hess.diagonal().array() += prior_precision;

        VectorXd grad(dim);
        for (int c = 0; c < classes; ++c) grad.segment(c * p, p) = grad_mat.col(c);
        const VectorXd delta = hess.ldlt().solve(grad);

        // step halving on the penalized objective
        double step = 1.0;
        MatrixXd w_next = w;
        double obj_next = obj;
        for (int h = 0; h < 30; ++h) {
            MatrixXd candidate = w;
            for (int c = 0; c < classes; ++c) {
                candidate.col(c) -= step * delta.segment(c * p, p);
            }
            const double cand_obj = objective(candidate);
            if (cand_obj < obj) {
                w_next = candidate;
                obj_next = cand_obj;
                break;
            }
            step *= 0.5;
        }
        if (obj_next >= obj) break;  // no descent direction left
        w = w_next;
        obj = obj_next;
    }

    // Laplace covariance from the Hessian at the MAP.
    const MatrixXd probs = softmax_rows(x * w);
    MatrixXd hess = MatrixXd::Zero(dim, dim);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const VectorXd pi = probs.row(i).transpose();
        const MatrixXd r = MatrixXd(pi.asDiagonal()) - pi * pi.transpose();
        for (int a = 0; a < classes; ++a) {
            for (int b = 0; b < classes; ++b) {
                if (r(a, b) == 0.0) continue;
                hess.block(a * p, b * p, p, p) += r(a, b) * (x.row(i).transpose() * x.row(i));
            }
        }
    }
    hess.diagonal().array() += std::max(prior_precision, 1e-10);

    BayesLogReg model;
    model.map_weights = w;
    model.laplace_cov = hess.ldlt().solve(MatrixXd::Identity(dim, dim));
    model.laplace_cov = 0.5 * (model.laplace_cov + model.laplace_cov.transpose());
    model.prior_precision = prior_precision;
    model.num_classes = classes;
    return model;
}

MatrixXd blr_predict(const MatrixXd& Zstar, const BayesLogReg& model, int weight_samples,
                     std::uint64_t seed) {
    const MatrixXd x = with_bias(Zstar);
    if (x.cols() != model.map_weights.rows()) {
        throw std::invalid_argument("blr_predict: dimension mismatch");
    }
    if (weight_samples < 0) throw std::invalid_argument("blr_predict: negative sample count");
    if (weight_samples == 0) {
        return softmax_rows(x * model.map_weights);
    }

    const Eigen::Index p = model.map_weights.rows();
    const Eigen::Index dim = p * model.num_classes;
    MatrixXd cov = model.laplace_cov;
    Eigen::LLT<MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        cov.diagonal().array() += 1e-10;
        llt.compute(cov);
        if (llt.info() != Eigen::Success) {
            throw NumericalError("blr_predict: Laplace covariance factorization failed");
        }
    }
    const MatrixXd chol = llt.matrixL();

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd probs = MatrixXd::Zero(Zstar.rows(), model.num_classes);
    VectorXd eta(dim);
    for (int s = 0; s < weight_samples; ++s) {
        for (Eigen::Index i = 0; i < dim; ++i) eta[i] = normal(rng);
        const VectorXd draw = chol.triangularView<Eigen::Lower>() * eta;
        MatrixXd w = model.map_weights;
        for (int c = 0; c < model.num_classes; ++c) w.col(c) += draw.segment(c * p, p);
        probs += softmax_rows(x * w);
    }
    return probs / static_cast<double>(weight_samples);
}

namespace detail {

MlpStep mlp_loss_and_grad(const MlpClassifier& net, const MatrixXd& Z, const VectorXi& y) {
    if (Z.rows() != y.size()) throw std::invalid_argument("mlp_loss_and_grad: shape mismatch");
    const double inv_n = 1.0 / static_cast<double>(Z.rows());
    const MatrixXd pre = (Z * net.w1.transpose()).rowwise() + net.b1.transpose();
    const MatrixXd act = pre.cwiseMax(0.0);
    const MatrixXd logits = (act * net.w2.transpose()).rowwise() + net.b2.transpose();
    const MatrixXd probs = softmax_rows(logits);

    MlpStep step;
    for (Eigen::Index i = 0; i < Z.rows(); ++i) {
        step.loss -= std::log(std::max(probs(i, y[i]), 1e-300));
    }
    step.loss *= inv_n;

    const MatrixXd dlogits = (probs - one_hot(y, net.num_classes)) * inv_n;
    step.gw2 = dlogits.transpose() * act;
    step.gb2 = dlogits.colwise().sum().transpose();
    MatrixXd dact = dlogits * net.w2;
    dact = (pre.array() > 0.0).select(dact, 0.0);
    step.gw1 = dact.transpose() * Z;
    step.gb1 = dact.colwise().sum().transpose();
    return step;
}

}  // namespace detail

MlpClassifier mlp_fit(const MatrixXd& Z, const VectorXi& y, const MlpClassifierConfig& config) {
    if (Z.rows() != y.size()) throw std::invalid_argument("mlp_fit: shape mismatch");
    const int classes = count_classes(y);
    if (classes < 2) throw std::invalid_argument("mlp_fit: need at least two classes present");
    if (config.hidden < 1 || config.epochs < 1 || !(config.learning_rate > 0.0)) {
        throw std::invalid_argument("mlp_fit: bad config");
    }

    std::mt19937_64 rng(config.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    MlpClassifier net;
    net.num_classes = classes;
    net.w1.resize(config.hidden, Z.cols());
    const double s1 = std::sqrt(2.0 / static_cast<double>(Z.cols()));
    for (Eigen::Index i = 0; i < net.w1.rows(); ++i)
        for (Eigen::Index j = 0; j < net.w1.cols(); ++j) net.w1(i, j) = s1 * normal(rng);
    net.b1 = VectorXd::Zero(config.hidden);
    net.w2.resize(classes, config.hidden);
    const double s2 = std::sqrt(1.0 / static_cast<double>(config.hidden));
    for (Eigen::Index i = 0; i < net.w2.rows(); ++i)
        for (Eigen::Index j = 0; j < net.w2.cols(); ++j) net.w2(i, j) = s2 * normal(rng);
    net.b2 = VectorXd::Zero(classes);

    const Eigen::Index n_params = net.w1.size() + net.b1.size() + net.w2.size() + net.b2.size();
    VectorXd m1 = VectorXd::Zero(n_params), m2 = VectorXd::Zero(n_params);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        const detail::MlpStep step = detail::mlp_loss_and_grad(net, Z, y);
        if (!std::isfinite(step.loss)) {
            throw std::runtime_error("mlp_fit: non-finite loss at epoch " +
                                     std::to_string(epoch));
        }
        const MatrixXd& gw1 = step.gw1;
        const VectorXd& gb1 = step.gb1;
        const MatrixXd& gw2 = step.gw2;
        const VectorXd& gb2 = step.gb2;

        VectorXd grad(n_params), theta(n_params);
        Eigen::Index off = 0;
        auto pack = [&](const MatrixXd& g, const MatrixXd& t) {
            grad.segment(off, g.size()) = Eigen::Map<const VectorXd>(g.data(), g.size());
            theta.segment(off, t.size()) = Eigen::Map<const VectorXd>(t.data(), t.size());
            off += g.size();
        };
        pack(gw1, net.w1);
        pack(gb1, net.b1);
        pack(gw2, net.w2);
        pack(gb2, net.b2);

        const double c1 = 1.0 - std::pow(beta1, epoch);
        const double c2 = 1.0 - std::pow(beta2, epoch);
        m1 = beta1 * m1 + (1.0 - beta1) * grad;
        m2 = (beta2 * m2.array() + (1.0 - beta2) * grad.array().square()).matrix();
        theta -= (config.learning_rate * (m1 / c1).array() /
                  ((m2 / c2).array().sqrt() + adam_eps))
                     .matrix();

        off = 0;
        auto unpack = [&](MatrixXd& t) {
            t = Eigen::Map<const MatrixXd>(theta.segment(off, t.size()).data(), t.rows(),
                                           t.cols());
            off += t.size();
        };
        auto unpack_v = [&](VectorXd& t) {
            t = theta.segment(off, t.size());
            off += t.size();
        };
        unpack(net.w1);
        unpack_v(net.b1);
        unpack(net.w2);
        unpack_v(net.b2);
    }
    return net;
}

MatrixXd mlp_predict_proba(const MatrixXd& Zstar, const MlpClassifier& net) {
    const MatrixXd pre = (Zstar * net.w1.transpose()).rowwise() + net.b1.transpose();
    const MatrixXd act = pre.cwiseMax(0.0);
    return softmax_rows((act * net.w2.transpose()).rowwise() + net.b2.transpose());
}

MatrixXd classifier_predict(const std::variant<BayesLogReg, MlpClassifier>& clf,
                            const MatrixXd& Z, const DownstreamConfig& cfg,
                            std::uint64_t seed) {
    if (std::holds_alternative<BayesLogReg>(clf)) {
        return blr_predict(Z, std::get<BayesLogReg>(clf), cfg.blr_weight_samples, seed);
    }
    return mlp_predict_proba(Z, std::get<MlpClassifier>(clf));
}

namespace {

std::variant<BayesLogReg, MlpClassifier> fit_classifier(const MatrixXd& Z, const VectorXi& y,
                                                        const DownstreamConfig& cfg,
                                                        std::uint64_t seed) {
    if (cfg.use_mlp) {
        MlpClassifierConfig mc = cfg.mlp;
        mc.seed = seed;
        return mlp_fit(Z, y, mc);
    }
    return blr_fit(Z, y, cfg.prior_precision);
}

}  // namespace

MatrixXd gpssl_mean_pipeline(const SparseGPModel& model, const MatrixXd& Xtrain,
                             const VectorXi& y, const MatrixXd& Xtest,
                             const DownstreamConfig& cfg) {
    const RepresentationPosterior train_post = predict(Xtrain, model);
    const RepresentationPosterior test_post = predict(Xtest, model);
    const auto clf = fit_classifier(train_post.means, y, cfg, cfg.seed);
    return classifier_predict(clf, test_post.means, cfg, cfg.seed);
}

MatrixXd gpssl_full_pipeline(const SparseGPModel& model, const MatrixXd& Xtrain,
                             const VectorXi& y, const MatrixXd& Xtest,
                             int num_embedding_samples, const DownstreamConfig& cfg) {
    if (num_embedding_samples < 1) {
        throw std::invalid_argument("gpssl_full_pipeline: need at least one sample");
    }
    MatrixXd joint(Xtrain.rows() + Xtest.rows(), Xtrain.cols());
    joint.topRows(Xtrain.rows()) = Xtrain;
    joint.bottomRows(Xtest.rows()) = Xtest;
    const std::vector<MatrixXd> samples =
        sample_representations(joint, model, num_embedding_samples, cfg.seed);

    ClassifierEnsemble ensemble;
    ensemble.members.reserve(samples.size());
    MatrixXd total;
    for (std::size_t s = 0; s < samples.size(); ++s) {
        const MatrixXd& z = samples[s];
        const MatrixXd z_train = z.topRows(Xtrain.rows());
        const MatrixXd z_test = z.bottomRows(Xtest.rows());
        const std::uint64_t member_seed = cfg.seed + 7919 * (static_cast<std::uint64_t>(s) + 1);
        ensemble.members.push_back(fit_classifier(z_train, y, cfg, member_seed));
        const MatrixXd probs =
            classifier_predict(ensemble.members.back(), z_test, cfg, member_seed);
        if (s == 0) {
            total = probs;
        } else {
            total += probs;
        }
    }
    return total / static_cast<double>(samples.size());
}

}  // namespace gpssl
