/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "gpssl/format.hpp"

namespace gpssl {

using Eigen::MatrixXd;
using Eigen::VectorXi;

namespace {

void require_match(const MatrixXd& probs, const VectorXi& y, const char* who) {
    if (probs.rows() != y.size() || probs.rows() == 0) {
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
    }
}

Eigen::Index argmax_row(const MatrixXd& probs, Eigen::Index i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < probs.cols(); ++c) {
        if (probs(i, c) > probs(i, best)) best = c;
    }
    return best;
}

/// AUC of `score` against binary indicator via midranks.
double binary_auc(const Eigen::VectorXd& score, const std::vector<bool>& positive) {
    const std::size_t n = positive.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return score[static_cast<Eigen::Index>(a)] < score[static_cast<Eigen::Index>(b)];
    });
    std::vector<double> rank(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && score[static_cast<Eigen::Index>(order[j + 1])] ==
                                 score[static_cast<Eigen::Index>(order[i])]) {
            ++j;
        }
        const double mid = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[order[k]] = mid;
        i = j + 1;
    }
    double rank_sum = 0.0;
    double n_pos = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (positive[k]) {
            rank_sum += rank[k];
            n_pos += 1.0;
        }
    }
    const double n_neg = static_cast<double>(n) - n_pos;
    if (n_pos == 0.0 || n_neg == 0.0) {
        throw std::invalid_argument("roc_auc: need both classes present");
    }
    return (rank_sum - n_pos * (n_pos + 1.0) / 2.0) / (n_pos * n_neg);
}

}  // namespace

double accuracy(const MatrixXd& probs, const VectorXi& y) {
    require_match(probs, y, "accuracy");
    Eigen::Index correct = 0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        if (argmax_row(probs, i) == y[i]) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(probs.rows());
}

double roc_auc(const MatrixXd& probs, const VectorXi& y) {
    require_match(probs, y, "roc_auc");
    if (probs.cols() < 2) throw std::invalid_argument("roc_auc: need >= 2 classes");
    const std::size_t n = static_cast<std::size_t>(probs.rows());

    if (probs.cols() == 2) {
        std::vector<bool> positive(n);
        for (std::size_t i = 0; i < n; ++i) positive[i] = y[static_cast<Eigen::Index>(i)] == 1;
        return binary_auc(probs.col(1), positive);
    }

    double total = 0.0;
    int used = 0;
    for (Eigen::Index c = 0; c < probs.cols(); ++c) {
        std::vector<bool> positive(n);
        bool any = false, all = true;
        for (std::size_t i = 0; i < n; ++i) {
            positive[i] = y[static_cast<Eigen::Index>(i)] == c;
            any = any || positive[i];
            all = all && positive[i];
        }
        if (!any || all) {
            std::cerr << "roc_auc: class " << c << " absent from labels, skipped\n";
            continue;
        }
        total += binary_auc(probs.col(c), positive);
        ++used;
    }
    if (used == 0) throw std::invalid_argument("roc_auc: no class present in labels");
    return total / static_cast<double>(used);
}

RiskCoverageCurve risk_coverage(const MatrixXd& probs, const VectorXi& y) {
    require_match(probs, y, "risk_coverage");
    const Eigen::Index n = probs.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<double> confidence(static_cast<std::size_t>(n));
    std::vector<bool> wrong(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::Index c = argmax_row(probs, i);
        confidence[static_cast<std::size_t>(i)] = probs(i, c);
        wrong[static_cast<std::size_t>(i)] = c != y[i];
    }
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return confidence[static_cast<std::size_t>(a)] > confidence[static_cast<std::size_t>(b)];
    });

    RiskCoverageCurve curve;
    curve.points.reserve(static_cast<std::size_t>(n));
    double errors = 0.0, risk_sum = 0.0;
    for (Eigen::Index k = 1; k <= n; ++k) {
        const Eigen::Index idx = order[static_cast<std::size_t>(k - 1)];
        if (wrong[static_cast<std::size_t>(idx)]) errors += 1.0;
        const double risk = errors / static_cast<double>(k);
        risk_sum += risk;
        curve.points.push_back({static_cast<double>(k) / static_cast<double>(n), risk,
                                confidence[static_cast<std::size_t>(idx)]});
    }
    curve.aurc = risk_sum / static_cast<double>(n);
    return curve;
}

double pmse(const MatrixXd& probs, const MatrixXd& true_probs) {
    if (probs.rows() != true_probs.rows() || probs.cols() != true_probs.cols()) {
        throw std::invalid_argument("pmse: shape mismatch");
    }
    return (probs - true_probs).array().square().mean();
}

double mean_log_likelihood(const MatrixXd& probs, const VectorXi& y) {
    require_match(probs, y, "mean_log_likelihood");
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        total += std::log(std::max(probs(i, y[i]), 1e-300));
    }
    return total / static_cast<double>(probs.rows());
}

double mean_entropy(const MatrixXd& probs) {
    if (probs.rows() == 0) throw std::invalid_argument("mean_entropy: empty input");
    double total = 0.0;
    for (Eigen::Index i = 0; i < probs.rows(); ++i) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            const double p = probs(i, c);
            if (p > 0.0) total -= p * std::log(p);
        }
    }
    return total / static_cast<double>(probs.rows());
}

void write_risk_coverage_csv(const RiskCoverageCurve& curve, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_risk_coverage_csv: cannot open " + path);
    out << "coverage,risk,threshold\n";
    for (const RiskCoveragePoint& p : curve.points) {
        out << format_double(p.coverage) << ',' << format_double(p.risk) << ','
            << format_double(p.threshold) << '\n';
    }
}

}  // namespace gpssl
