/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/inference.hpp"

#include <cmath>
#include <fstream>
#include <random>

#include "gpssl/format.hpp"

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXd;

void TrainConfig::validate() const {
    if (iterations < 1) throw std::invalid_argument("TrainConfig: iterations must be >= 1");
    if (mc_samples < 1) throw std::invalid_argument("TrainConfig: mc_samples must be >= 1");
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("TrainConfig: learning_rate must be positive");
    }
}

namespace {

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }
double softplus_inv(double y) { return y > 30.0 ? y : std::log(std::expm1(y)); }
double sigmoid(double x) {
    return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

/// Flat parameter vector: variational means, then per-dimension raw Cholesky
/// factors (row-major lower triangles, softplus-parameterized diagonals),
/// then row-major inducing inputs when those are optimized.
struct Layout {
    Eigen::Index m = 0, j = 0, d = 0;
    bool inducing = false;

    Eigen::Index chol_len() const { return m * (m + 1) / 2; }
    Eigen::Index means_offset() const { return 0; }
    Eigen::Index chol_offset(Eigen::Index dim) const { return m * j + dim * chol_len(); }
    Eigen::Index inducing_offset() const { return m * j + j * chol_len(); }
    Eigen::Index size() const { return inducing_offset() + (inducing ? m * d : 0); }
};

VectorXd pack(const SparseGPModel& model, const Layout& lay) {
    VectorXd theta(lay.size());
    for (Eigen::Index jj = 0; jj < lay.j; ++jj)
        theta.segment(jj * lay.m, lay.m) = model.variational_means.col(jj);
    for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
        const MatrixXd& l = model.variational_chol[static_cast<std::size_t>(jj)];
        Eigen::Index p = lay.chol_offset(jj);
        for (Eigen::Index r = 0; r < lay.m; ++r)
            for (Eigen::Index c = 0; c <= r; ++c)
                theta[p++] = (r == c) ? softplus_inv(l(r, c)) : l(r, c);
    }
    if (lay.inducing) {
        Eigen::Index p = lay.inducing_offset();
        for (Eigen::Index r = 0; r < lay.m; ++r)
            for (Eigen::Index c = 0; c < lay.d; ++c) theta[p++] = model.inducing_inputs(r, c);
    }
    return theta;
}

SparseGPModel unpack(const VectorXd& theta, const SparseGPModel& base, const Layout& lay) {
    SparseGPModel model = base;
    for (Eigen::Index jj = 0; jj < lay.j; ++jj)
        model.variational_means.col(jj) = theta.segment(jj * lay.m, lay.m);
    for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
        MatrixXd l = MatrixXd::Zero(lay.m, lay.m);
        Eigen::Index p = lay.chol_offset(jj);
        for (Eigen::Index r = 0; r < lay.m; ++r)
            for (Eigen::Index c = 0; c <= r; ++c) {
                const double v = theta[p++];
                l(r, c) = (r == c) ? softplus(v) : v;
            }
        model.variational_chol[static_cast<std::size_t>(jj)] = std::move(l);
    }
    if (lay.inducing) {
        Eigen::Index p = lay.inducing_offset();
        for (Eigen::Index r = 0; r < lay.m; ++r)
            for (Eigen::Index c = 0; c < lay.d; ++c) model.inducing_inputs(r, c) = theta[p++];
    }
    return model;
}

struct NoiseBatch {
    std::vector<MatrixXd> xi;    // per sample, M x J
    std::vector<MatrixXd> zeta;  // per sample, N x J
};

NoiseBatch draw_noise(Eigen::Index n, Eigen::Index m, Eigen::Index j, int samples,
                      std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    NoiseBatch batch;
    batch.xi.reserve(static_cast<std::size_t>(samples));
    batch.zeta.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        MatrixXd xi(m, j), zeta(n, j);
        for (Eigen::Index c = 0; c < j; ++c)
            for (Eigen::Index r = 0; r < m; ++r) xi(r, c) = normal(rng);
        for (Eigen::Index c = 0; c < j; ++c)
            for (Eigen::Index r = 0; r < n; ++r) zeta(r, c) = normal(rng);
        batch.xi.push_back(std::move(xi));
        batch.zeta.push_back(std::move(zeta));
    }
    return batch;
}

/// Reverse-mode seed for a Cholesky factor: given dF/dL for L = chol(S),
/// returns dF/dS treating S as symmetric (off-diagonal pairs move together).
MatrixXd cholesky_backward(const MatrixXd& l, const MatrixXd& lbar) {
    MatrixXd p = l.transpose() * lbar;
    p = MatrixXd(p.triangularView<Eigen::Lower>());
    p.diagonal() *= 0.5;
    const MatrixXd sym = 0.5 * (p + p.transpose());
    const MatrixXd t = l.transpose().triangularView<Eigen::Upper>().solve(sym);
    return l.transpose().triangularView<Eigen::Upper>().solve(t.transpose()).transpose();
}

struct ElboEval {
    double elbo = 0.0;
    double kl = 0.0;
    double expected_loss = 0.0;
    VectorXd grad;  // of -elbo, the minimized objective
};

ElboEval evaluate_elbo(const MatrixXd& x, const SparseGPModel& model, const NoiseBatch& noise,
                       const Layout& lay, bool want_grad,
                       const detail::GpFactors* cached) {
    detail::GpFactors local;
    const detail::GpFactors* f = cached;
    if (f == nullptr) {
        local = detail::compute_factors(x, model);
        f = &local;
    }
    const int samples = static_cast<int>(noise.xi.size());
    const double inv_s = 1.0 / static_cast<double>(samples);
    const Eigen::Index n = x.rows();

    ElboEval out;
    if (want_grad) out.grad = VectorXd::Zero(lay.size());

    // KL and its gradient against the shared K_uu factorization.
    const MatrixXd lk = f->kuu_llt.matrixL();
    const double logdet_kuu = 2.0 * lk.diagonal().array().log().sum();
    MatrixXd kuu_bar;  // d(objective)/dK_uu, accumulated only when needed
    if (want_grad && lay.inducing) kuu_bar = MatrixXd::Zero(lay.m, lay.m);

    for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
        const MatrixXd& lj = model.variational_chol[static_cast<std::size_t>(jj)];
        const VectorXd mj = model.variational_means.col(jj);
        const VectorXd alpha = lk.triangularView<Eigen::Lower>().solve(mj);
        const MatrixXd t = lk.triangularView<Eigen::Lower>().solve(lj);
        const double logdet_s = 2.0 * lj.diagonal().array().log().sum();
        out.kl += 0.5 * (t.squaredNorm() + alpha.squaredNorm() -
                         static_cast<double>(lay.m) + logdet_kuu - logdet_s);
        if (want_grad) {
            const VectorXd kinv_m = f->kuu_llt.solve(mj);
            out.grad.segment(jj * lay.m, lay.m) += kinv_m;
            const MatrixXd kinv_l = f->kuu_llt.solve(lj);
            Eigen::Index p = lay.chol_offset(jj);
            for (Eigen::Index r = 0; r < lay.m; ++r)
                for (Eigen::Index c = 0; c <= r; ++c) {
                    double g = kinv_l(r, c);
                    if (r == c) g -= 1.0 / lj(r, r);
                    out.grad[p++] = g;  // diagonal softplus chain applied at the end
                }
            if (lay.inducing) {
                kuu_bar += 0.5 * (f->kuu_llt.solve(MatrixXd::Identity(lay.m, lay.m)) -
                                  kinv_l * kinv_l.transpose() - kinv_m * kinv_m.transpose());
            }
        }
    }

    // Monte-Carlo expected loss through the reparameterized sampling path.
    MatrixXd a_bar, lc_bar;
    if (want_grad && lay.inducing) {
        a_bar = MatrixXd::Zero(n, lay.m);
        lc_bar = MatrixXd::Zero(n, n);
    }
    for (int s = 0; s < samples; ++s) {
        MatrixXd u(lay.m, lay.j), z(n, lay.j);
        for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
            u.col(jj) = model.variational_means.col(jj) +
                        model.variational_chol[static_cast<std::size_t>(jj)]
                                .triangularView<Eigen::Lower>() *
                            noise.xi[static_cast<std::size_t>(s)].col(jj);
            z.col(jj) = f->projector * u.col(jj) +
                        f->cond_chol.triangularView<Eigen::Lower>() *
                            noise.zeta[static_cast<std::size_t>(s)].col(jj);
        }
        out.expected_loss += inv_s * gpssl_loss(z, model.loss_weights);
        if (!want_grad) continue;

        const MatrixXd g = inv_s * gpssl_loss_grad(z, model.loss_weights);
        for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
            const VectorXd at_g = f->projector.transpose() * g.col(jj);
            out.grad.segment(jj * lay.m, lay.m) += at_g;
            const MatrixXd dl =
                at_g * noise.xi[static_cast<std::size_t>(s)].col(jj).transpose();
            Eigen::Index p = lay.chol_offset(jj);
            for (Eigen::Index r = 0; r < lay.m; ++r)
                for (Eigen::Index c = 0; c <= r; ++c) out.grad[p++] += dl(r, c);
        }
        if (lay.inducing) {
            a_bar += g * u.transpose();
            for (Eigen::Index jj = 0; jj < lay.j; ++jj)
                lc_bar += g.col(jj) *
                          noise.zeta[static_cast<std::size_t>(s)].col(jj).transpose();
        }
    }
    out.elbo = -out.expected_loss - out.kl;

    if (want_grad) {
        if (lay.inducing) {
            // Sensitivities through A = K_xu K_uu^-1 and the conditional chol.
            const MatrixXd sigma_bar =
                cholesky_backward(f->cond_chol, MatrixXd(lc_bar.triangularView<Eigen::Lower>()));
            const MatrixXd aw = f->kuu_llt.solve(a_bar.transpose()).transpose();
            const MatrixXd kxu_bar =
                aw - (sigma_bar + sigma_bar.transpose()) * f->projector;
            kuu_bar += -f->projector.transpose() * aw +
                       f->projector.transpose() * sigma_bar * f->projector;

            // Push kernel-matrix sensitivities into the inducing inputs.
            const Eigen::ArrayXd inv_ls2 =
                model.kernel.lengthscales.array().square().inverse();
            const MatrixXd e_uu = (kuu_bar + kuu_bar.transpose()).cwiseProduct(f->kuu);
            const MatrixXd e_xu = kxu_bar.cwiseProduct(f->kxu);
            const VectorXd e_uu_rowsum = e_uu.rowwise().sum();
            const VectorXd e_xu_colsum = e_xu.colwise().sum();
            MatrixXd ux_grad =
                e_uu * model.inducing_inputs + e_xu.transpose() * x;
            ux_grad -= (e_uu_rowsum + e_xu_colsum).asDiagonal() * model.inducing_inputs;
            ux_grad = ux_grad.array().rowwise() * inv_ls2.transpose();

            Eigen::Index p = lay.inducing_offset();
            for (Eigen::Index r = 0; r < lay.m; ++r)
                for (Eigen::Index c = 0; c < lay.d; ++c) out.grad[p++] = ux_grad(r, c);
        }
        // softplus chain on the Cholesky diagonals
        for (Eigen::Index jj = 0; jj < lay.j; ++jj) {
            const MatrixXd& lj = model.variational_chol[static_cast<std::size_t>(jj)];
            Eigen::Index p = lay.chol_offset(jj);
            for (Eigen::Index r = 0; r < lay.m; ++r)
                for (Eigen::Index c = 0; c <= r; ++c) {
                    if (r == c) out.grad[p] *= sigmoid(softplus_inv(lj(r, r)));
                    ++p;
                }
        }
    }
    return out;
}

Layout make_layout(const SparseGPModel& model, bool inducing) {
    Layout lay;
    lay.m = model.inducing_inputs.rows();
    lay.j = model.representation_dim;
    lay.d = model.inducing_inputs.cols();
    lay.inducing = inducing;
    return lay;
}

}  // namespace

double generalized_elbo(const MatrixXd& x, const SparseGPModel& model,
                        const TrainConfig& config) {
    config.validate();
    model.validate();
    const Layout lay = make_layout(model, false);
    std::mt19937_64 rng(config.seed);
    const NoiseBatch noise =
        draw_noise(x.rows(), lay.m, lay.j, config.mc_samples, rng);
    return evaluate_elbo(x, model, noise, lay, false, nullptr).elbo;
}

TrainResult train(const MatrixXd& x, const SparseGPModel& initial, const TrainConfig& config) {
    config.validate();
    initial.validate();
    if (x.rows() < 2) throw std::invalid_argument("train: need at least two rows");

    const Layout lay = make_layout(initial, config.optimize_inducing);
    VectorXd theta = pack(initial, lay);

    detail::GpFactors cached;
    if (!config.optimize_inducing) cached = detail::compute_factors(x, initial);

    // Adam with (0.9, 0.999, 1e-8) moments.
    VectorXd m1 = VectorXd::Zero(lay.size());
    VectorXd m2 = VectorXd::Zero(lay.size());
    const double beta1 = 0.9, beta2 = 0.999, adam_eps = 1e-8;

    std::mt19937_64 rng(config.seed);
    std::vector<TraceRow> trace;
    trace.reserve(static_cast<std::size_t>(config.iterations));

    for (int step = 1; step <= config.iterations; ++step) {
        const NoiseBatch noise = draw_noise(x.rows(), lay.m, lay.j, config.mc_samples, rng);
        const SparseGPModel current = unpack(theta, initial, lay);
        const ElboEval eval = evaluate_elbo(x, current, noise, lay, true,
                                            config.optimize_inducing ? nullptr : &cached);
        if (!std::isfinite(eval.elbo)) {
            throw TrainingDivergedError(
                "train: non-finite ELBO at step " + std::to_string(step), std::move(trace));
        }
        trace.push_back({step, eval.elbo, eval.kl, eval.expected_loss});

        m1 = beta1 * m1 + (1.0 - beta1) * eval.grad;
        m2 = beta2 * m2.array().matrix() +
             (1.0 - beta2) * eval.grad.array().square().matrix();
        const double c1 = 1.0 - std::pow(beta1, step);
        const double c2 = 1.0 - std::pow(beta2, step);
        theta -= (config.learning_rate * (m1 / c1).array() /
                  ((m2 / c2).array().sqrt() + adam_eps))
                     .matrix();
    }
    return {unpack(theta, initial, lay), std::move(trace)};
}

double gradient_check(const MatrixXd& x, const SparseGPModel& model, const TrainConfig& config,
                      double step) {
    config.validate();
    model.validate();
    if (!(step > 0.0)) throw std::invalid_argument("gradient_check: step must be positive");

    const Layout lay = make_layout(model, config.optimize_inducing);
    const VectorXd theta0 = pack(model, lay);
    std::mt19937_64 rng(config.seed);
    const NoiseBatch noise = draw_noise(x.rows(), lay.m, lay.j, config.mc_samples, rng);

    detail::GpFactors cached;
    if (!config.optimize_inducing) cached = detail::compute_factors(x, model);
    const detail::GpFactors* cache_ptr = config.optimize_inducing ? nullptr : &cached;

    const VectorXd analytic =
        evaluate_elbo(x, model, noise, lay, true, cache_ptr).grad;

    double max_rel = 0.0;
    for (Eigen::Index i = 0; i < theta0.size(); ++i) {
        VectorXd tp = theta0, tm = theta0;
        tp[i] += step;
        tm[i] -= step;
        const double fp =
            -evaluate_elbo(x, unpack(tp, model, lay), noise, lay, false, cache_ptr).elbo;
        const double fm =
            -evaluate_elbo(x, unpack(tm, model, lay), noise, lay, false, cache_ptr).elbo;
        const double fd = (fp - fm) / (2.0 * step);
        const double rel = std::abs(analytic[i] - fd) /
                           std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_trace_csv: cannot open " + path);
    out << "step,elbo,kl,expected_loss\n";
    for (const TraceRow& row : trace) {
        out << row.step << ',' << format_double(row.elbo) << ',' << format_double(row.kl)
            << ',' << format_double(row.expected_loss) << '\n';
    }
}

}  // namespace gpssl
