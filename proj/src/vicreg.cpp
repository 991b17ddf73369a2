/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/vicreg.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.9;
constexpr int kEncoderHidden = 10;
constexpr int kExpanderHidden = 5;

struct BnCache {
    MatrixXd input;       // pre-normalization activations
    MatrixXd normalized;  // (x - mean) / sqrt(var + eps)
    VectorXd mean, var, inv_sd;
};

MatrixXd bn_forward_train(const MatrixXd& x, const VectorXd& gamma, const VectorXd& beta,
                          BnCache& cache) {
    const double n = static_cast<double>(x.rows());
    cache.input = x;
    cache.mean = x.colwise().mean();
    cache.var = ((x.rowwise() - cache.mean.transpose()).array().square().colwise().sum() / n)
                    .transpose();
    cache.inv_sd = (cache.var.array() + kBnEps).sqrt().inverse();
    cache.normalized = (x.rowwise() - cache.mean.transpose()).array().rowwise() *
                       cache.inv_sd.transpose().array();
    return (cache.normalized.array().rowwise() * gamma.transpose().array()).matrix().rowwise() +
           beta.transpose();
}

MatrixXd bn_backward(const MatrixXd& dy, const VectorXd& gamma, const BnCache& cache,
                     VectorXd& dgamma, VectorXd& dbeta) {
    const double n = static_cast<double>(dy.rows());
    dgamma = (dy.array() * cache.normalized.array()).colwise().sum().transpose();
    dbeta = dy.colwise().sum().transpose();
    const MatrixXd dxhat = dy.array().rowwise() * gamma.transpose().array();
    const MatrixXd centered = cache.input.rowwise() - cache.mean.transpose();
    const VectorXd dvar =
        ((dxhat.array() * centered.array()).colwise().sum().transpose().array() * -0.5 *
         cache.inv_sd.array().pow(3))
            .matrix();
    const VectorXd dmean =
        (-(dxhat.array().rowwise() * cache.inv_sd.transpose().array()).colwise().sum())
            .transpose();
    MatrixXd dx = dxhat.array().rowwise() * cache.inv_sd.transpose().array();
    dx += (centered * (2.0 / n) * dvar.asDiagonal()).eval();
    dx.rowwise() += (dmean / n).transpose();
    return dx;
}

struct ForwardCache {
    MatrixXd input;
    MatrixXd enc_pre1;
    BnCache bn1;
    MatrixXd enc_bn_out, enc_act;
    MatrixXd representation;
    MatrixXd exp_pre1;
    BnCache bn2;
    MatrixXd exp_bn_out, exp_act;
    MatrixXd embedding;
};

ForwardCache forward_train(const MlpNet& net, const MatrixXd& x) {
    ForwardCache c;
    c.input = x;
    c.enc_pre1 = (x * net.enc_w1.transpose()).rowwise() + net.enc_b1.transpose();
    c.enc_bn_out = bn_forward_train(c.enc_pre1, net.bn1_gamma, net.bn1_beta, c.bn1);
    c.enc_act = c.enc_bn_out.cwiseMax(0.0);
    c.representation = (c.enc_act * net.enc_w2.transpose()).rowwise() + net.enc_b2.transpose();
    c.exp_pre1 =
        (c.representation * net.exp_w1.transpose()).rowwise() + net.exp_b1.transpose();
    c.exp_bn_out = bn_forward_train(c.exp_pre1, net.bn2_gamma, net.bn2_beta, c.bn2);
    c.exp_act = c.exp_bn_out.cwiseMax(0.0);
    c.embedding = (c.exp_act * net.exp_w2.transpose()).rowwise() + net.exp_b2.transpose();
    return c;
}

MlpNet zero_like(const MlpNet& net) {
    MlpNet g = net;
    g.enc_w1.setZero();
    g.enc_b1.setZero();
    g.bn1_gamma.setZero();
    g.bn1_beta.setZero();
    g.enc_w2.setZero();
    g.enc_b2.setZero();
    g.exp_w1.setZero();
    g.exp_b1.setZero();
    g.bn2_gamma.setZero();
    g.bn2_beta.setZero();
    g.exp_w2.setZero();
    g.exp_b2.setZero();
    return g;
}

void backward(const MlpNet& net, const ForwardCache& c, const MatrixXd& dembedding,
              MlpNet& grads) {
    grads.exp_w2 += dembedding.transpose() * c.exp_act;
    grads.exp_b2 += dembedding.colwise().sum().transpose();
    MatrixXd d = dembedding * net.exp_w2;
    d = (c.exp_bn_out.array() > 0.0).select(d, 0.0);
    VectorXd dgamma, dbeta;
    d = bn_backward(d, net.bn2_gamma, c.bn2, dgamma, dbeta);
    grads.bn2_gamma += dgamma;
    grads.bn2_beta += dbeta;
    grads.exp_w1 += d.transpose() * c.representation;
    grads.exp_b1 += d.colwise().sum().transpose();
    MatrixXd drep = d * net.exp_w1;

    grads.enc_w2 += drep.transpose() * c.enc_act;
    grads.enc_b2 += drep.colwise().sum().transpose();
    MatrixXd d2 = drep * net.enc_w2;
    d2 = (c.enc_bn_out.array() > 0.0).select(d2, 0.0);
    d2 = bn_backward(d2, net.bn1_gamma, c.bn1, dgamma, dbeta);
    grads.bn1_gamma += dgamma;
    grads.bn1_beta += dbeta;
    grads.enc_w1 += d2.transpose() * c.input;
    grads.enc_b1 += d2.colwise().sum().transpose();
}

void gaussian_init(MatrixXd& w, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index i = 0; i < w.rows(); ++i)
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = scale * normal(rng);
}

}  // namespace

MatrixXd augment(const MatrixXd& X, const AugmentConfig& cfg, std::mt19937_64& rng) {
    if (!(cfg.noise_ratio > 0.0)) {
        throw std::invalid_argument("augment: noise_ratio must be positive");
    }
    if (cfg.feature_stds.size() != X.cols()) {
        throw std::invalid_argument("augment: feature std dimension mismatch");
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd out = X;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        for (Eigen::Index d = 0; d < X.cols(); ++d) {
            out(i, d) += cfg.noise_ratio * cfg.feature_stds[d] * normal(rng);
        }
    }
    return out;
}

MlpNet MlpNet::initialize(int input_dim, int representation_dim, std::uint64_t seed) {
    if (input_dim < 1 || representation_dim < 1) {
        throw std::invalid_argument("MlpNet: bad dimensions");
    }
    std::mt19937_64 rng(seed);
    MlpNet net;
    net.enc_w1.resize(kEncoderHidden, input_dim);
    gaussian_init(net.enc_w1, std::sqrt(2.0 / input_dim), rng);
    net.enc_b1 = VectorXd::Zero(kEncoderHidden);
    net.bn1_gamma = VectorXd::Ones(kEncoderHidden);
    net.bn1_beta = VectorXd::Zero(kEncoderHidden);
    net.bn1_run_mean = VectorXd::Zero(kEncoderHidden);
    net.bn1_run_var = VectorXd::Ones(kEncoderHidden);
    net.enc_w2.resize(representation_dim, kEncoderHidden);
    gaussian_init(net.enc_w2, std::sqrt(1.0 / kEncoderHidden), rng);
    net.enc_b2 = VectorXd::Zero(representation_dim);

    net.exp_w1.resize(kExpanderHidden, representation_dim);
    gaussian_init(net.exp_w1, std::sqrt(2.0 / representation_dim), rng);
    net.exp_b1 = VectorXd::Zero(kExpanderHidden);
    net.bn2_gamma = VectorXd::Ones(kExpanderHidden);
    net.bn2_beta = VectorXd::Zero(kExpanderHidden);
    net.bn2_run_mean = VectorXd::Zero(kExpanderHidden);
    net.bn2_run_var = VectorXd::Ones(kExpanderHidden);
    net.exp_w2.resize(representation_dim, kExpanderHidden);
    gaussian_init(net.exp_w2, std::sqrt(1.0 / kExpanderHidden), rng);
    net.exp_b2 = VectorXd::Zero(representation_dim);
    return net;
}

namespace detail {

VicregStep vicreg_loss_and_grad(const MlpNet& net, const MatrixXd& Xa, const MatrixXd& Xb,
                                const LossWeights& w) {
    if (Xa.rows() != Xb.rows() || Xa.cols() != Xb.cols()) {
        throw std::invalid_argument("vicreg_loss_and_grad: view shape mismatch");
    }
    if (Xa.rows() < 2) throw std::invalid_argument("vicreg_loss_and_grad: need N >= 2");
    w.validate();

    const ForwardCache ca = forward_train(net, Xa);
    const ForwardCache cb = forward_train(net, Xb);
    const MatrixXd& ea = ca.embedding;
    const MatrixXd& eb = cb.embedding;

    VicregStep step;
    step.invariance = invariance_loss(ea, eb);
    step.variance = variance_loss(ea, w.gamma, w.epsilon) + variance_loss(eb, w.gamma, w.epsilon);
    step.covariance = covariance_loss(ea) + covariance_loss(eb);
    step.total = w.c_invariance * step.invariance + w.c_variance * step.variance +
                 w.c_covariance * step.covariance;

    const MatrixXd inv_grad = invariance_loss_grad(ea, eb);
    const MatrixXd dea = w.c_invariance * inv_grad +
                         w.c_variance * variance_loss_grad(ea, w.gamma, w.epsilon) +
                         w.c_covariance * covariance_loss_grad(ea);
    const MatrixXd deb = -w.c_invariance * inv_grad +
                         w.c_variance * variance_loss_grad(eb, w.gamma, w.epsilon) +
                         w.c_covariance * covariance_loss_grad(eb);

    step.grads = zero_like(net);
    backward(net, ca, dea, step.grads);
    backward(net, cb, deb, step.grads);
    return step;
}

void update_running_stats(MlpNet& net, const MatrixXd& x, double momentum) {
    ForwardCache c = forward_train(net, x);
    net.bn1_run_mean = momentum * net.bn1_run_mean + (1.0 - momentum) * c.bn1.mean;
    net.bn1_run_var = momentum * net.bn1_run_var + (1.0 - momentum) * c.bn1.var;
    net.bn2_run_mean = momentum * net.bn2_run_mean + (1.0 - momentum) * c.bn2.mean;
    net.bn2_run_var = momentum * net.bn2_run_var + (1.0 - momentum) * c.bn2.var;
}

std::vector<double> flatten(const MlpNet& net) {
    std::vector<double> theta;
    auto push_m = [&](const MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) theta.push_back(m(i, j));
    };
    auto push_v = [&](const VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) theta.push_back(v[i]);
    };
    push_m(net.enc_w1);
    push_v(net.enc_b1);
    push_v(net.bn1_gamma);
    push_v(net.bn1_beta);
    push_m(net.enc_w2);
    push_v(net.enc_b2);
    push_m(net.exp_w1);
    push_v(net.exp_b1);
    push_v(net.bn2_gamma);
    push_v(net.bn2_beta);
    push_m(net.exp_w2);
    push_v(net.exp_b2);
    return theta;
}

void unflatten(const std::vector<double>& theta, MlpNet& net) {
    std::size_t p = 0;
    auto pull_m = [&](MatrixXd& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = theta.at(p++);
    };
    auto pull_v = [&](VectorXd& v) {
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = theta.at(p++);
    };
    pull_m(net.enc_w1);
    pull_v(net.enc_b1);
    pull_v(net.bn1_gamma);
    pull_v(net.bn1_beta);
    pull_m(net.enc_w2);
    pull_v(net.enc_b2);
    pull_m(net.exp_w1);
    pull_v(net.exp_b1);
    pull_v(net.bn2_gamma);
    pull_v(net.bn2_beta);
    pull_m(net.exp_w2);
    pull_v(net.exp_b2);
    if (p != theta.size()) throw std::invalid_argument("unflatten: size mismatch");
}

}  // namespace detail

VicregResult vicreg_train(const MatrixXd& X, const AugmentConfig& aug, const LossWeights& w,
                          const VicregTrainConfig& config) {
    if (X.rows() < 2) throw std::invalid_argument("vicreg_train: need N >= 2");
    if (config.iterations < 1) throw std::invalid_argument("vicreg_train: iterations >= 1");
    if (!(config.learning_rate > 0.0) || !(config.warmup_learning_rate > 0.0)) {
        throw std::invalid_argument("vicreg_train: learning rates must be positive");
    }
    w.validate();

    MlpNet net = MlpNet::initialize(static_cast<int>(X.cols()), config.representation_dim,
                                    config.seed);
    std::mt19937_64 rng(config.seed + 1);

    std::vector<double> m1(detail::flatten(net).size(), 0.0);
    std::vector<double> m2(m1.size(), 0.0);
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    VicregResult result;
    result.trace.invariance.reserve(static_cast<std::size_t>(config.iterations));
    for (int step = 1; step <= config.iterations; ++step) {
        const MatrixXd xa = augment(X, aug, rng);
        const MatrixXd xb = augment(X, aug, rng);
        const detail::VicregStep eval = detail::vicreg_loss_and_grad(net, xa, xb, w);
        if (!std::isfinite(eval.total)) {
            throw std::runtime_error("vicreg_train: non-finite loss at step " +
                                     std::to_string(step));
        }
        result.trace.invariance.push_back(eval.invariance);
        result.trace.variance.push_back(eval.variance);
        result.trace.covariance.push_back(eval.covariance);
        result.trace.total.push_back(eval.total);

        detail::update_running_stats(net, xa, kBnMomentum);
        detail::update_running_stats(net, xb, kBnMomentum);

        const double lr = step <= config.warmup_iterations ? config.warmup_learning_rate
                                                           : config.learning_rate;
        const std::vector<double> grad = detail::flatten(eval.grads);
        std::vector<double> theta = detail::flatten(net);
        const double c1 = 1.0 - std::pow(beta1, step);
        const double c2 = 1.0 - std::pow(beta2, step);
        for (std::size_t i = 0; i < theta.size(); ++i) {
            m1[i] = beta1 * m1[i] + (1.0 - beta1) * grad[i];
            m2[i] = beta2 * m2[i] + (1.0 - beta2) * grad[i] * grad[i];
            theta[i] -= lr * (m1[i] / c1) / (std::sqrt(m2[i] / c2) + adam_eps);
        }
        detail::unflatten(theta, net);
    }
    result.net = std::move(net);
    return result;
}

MatrixXd vicreg_embed(const MatrixXd& Xstar, const MlpNet& net) {
    const MatrixXd pre = (Xstar * net.enc_w1.transpose()).rowwise() + net.enc_b1.transpose();
    const Eigen::ArrayXd inv_sd = (net.bn1_run_var.array() + kBnEps).sqrt().inverse();
    const MatrixXd normalized =
        (pre.rowwise() - net.bn1_run_mean.transpose()).array().rowwise() *
        inv_sd.transpose();
    const MatrixXd bn =
        (normalized.array().rowwise() * net.bn1_gamma.transpose().array()).matrix().rowwise() +
        net.bn1_beta.transpose();
    const MatrixXd act = bn.cwiseMax(0.0);
    return (act * net.enc_w2.transpose()).rowwise() + net.enc_b2.transpose();
}

namespace {

nlohmann::json mat_json(const MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd mat_from(const nlohmann::json& j) {
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
    MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = j.at(i).at(c).get<double>();
    return m;
}

nlohmann::json vec_json(const VectorXd& v) {
    return std::vector<double>(v.begin(), v.end());
}

VectorXd vec_from(const nlohmann::json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

void save_vicreg(const MlpNet& net, const std::string& path) {
    nlohmann::json j;
    j["schema"] = "gpssl-vicreg-net-v1";
    j["enc_w1"] = mat_json(net.enc_w1);
    j["enc_b1"] = vec_json(net.enc_b1);
    j["bn1_gamma"] = vec_json(net.bn1_gamma);
    j["bn1_beta"] = vec_json(net.bn1_beta);
    j["bn1_run_mean"] = vec_json(net.bn1_run_mean);
    j["bn1_run_var"] = vec_json(net.bn1_run_var);
    j["enc_w2"] = mat_json(net.enc_w2);
    j["enc_b2"] = vec_json(net.enc_b2);
    j["exp_w1"] = mat_json(net.exp_w1);
    j["exp_b1"] = vec_json(net.exp_b1);
    j["bn2_gamma"] = vec_json(net.bn2_gamma);
    j["bn2_beta"] = vec_json(net.bn2_beta);
    j["bn2_run_mean"] = vec_json(net.bn2_run_mean);
    j["bn2_run_var"] = vec_json(net.bn2_run_var);
    j["exp_w2"] = mat_json(net.exp_w2);
    j["exp_b2"] = vec_json(net.exp_b2);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_vicreg: cannot open " + path);
    out << j.dump(2) << "\n";
}

MlpNet load_vicreg(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_vicreg: cannot open " + path);
    nlohmann::json j;
    in >> j;
    if (j.value("schema", "") != "gpssl-vicreg-net-v1") {
        throw std::runtime_error("load_vicreg: unknown schema in " + path);
    }
    MlpNet net;
    net.enc_w1 = mat_from(j.at("enc_w1"));
    net.enc_b1 = vec_from(j.at("enc_b1"));
    net.bn1_gamma = vec_from(j.at("bn1_gamma"));
    net.bn1_beta = vec_from(j.at("bn1_beta"));
    net.bn1_run_mean = vec_from(j.at("bn1_run_mean"));
    net.bn1_run_var = vec_from(j.at("bn1_run_var"));
    net.enc_w2 = mat_from(j.at("enc_w2"));
    net.enc_b2 = vec_from(j.at("enc_b2"));
    net.exp_w1 = mat_from(j.at("exp_w1"));
    net.exp_b1 = vec_from(j.at("exp_b1"));
    net.bn2_gamma = vec_from(j.at("bn2_gamma"));
    net.bn2_beta = vec_from(j.at("bn2_beta"));
    net.bn2_run_mean = vec_from(j.at("bn2_run_mean"));
    net.bn2_run_var = vec_from(j.at("bn2_run_var"));
    net.exp_w2 = mat_from(j.at("exp_w2"));
    net.exp_b2 = vec_from(j.at("exp_b2"));
    return net;
}

}  // namespace gpssl
