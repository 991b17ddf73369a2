/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

namespace gpssl {

/// Fraction of rows whose argmax class (ties to the lowest index) equals the
/// label.
double accuracy(const Eigen::MatrixXd& probs, const Eigen::VectorXi& y);

/// Binary: Mann-Whitney U with midrank tie correction on the class-1 score.
/// Multiclass: macro one-vs-rest; classes absent from y are skipped with a
/// warning on stderr.
double roc_auc(const Eigen::MatrixXd& probs, const Eigen::VectorXi& y);

struct RiskCoveragePoint {
    double coverage;
    double risk;
    double threshold;  // the max-class probability admitting this prefix
};

struct RiskCoverageCurve {
    std::vector<RiskCoveragePoint> points;  // coverage ascending, k/N for k=1..N
    double aurc = 0.0;                      // mean of the N prefix risks
};

/// Points sorted by max-class probability descending (ties by row index);
/// risk over each confidence prefix.
RiskCoverageCurve risk_coverage(const Eigen::MatrixXd& probs, const Eigen::VectorXi& y);

/// Mean over all entries of squared probability differences.
double pmse(const Eigen::MatrixXd& probs, const Eigen::MatrixXd& true_probs);

/// Mean log predicted probability of the true class.
double mean_log_likelihood(const Eigen::MatrixXd& probs, const Eigen::VectorXi& y);

/// Mean Shannon entropy (nats) of the probability rows.
double mean_entropy(const Eigen::MatrixXd& probs);

void write_risk_coverage_csv(const RiskCoverageCurve& curve, const std::string& path);

}  // namespace gpssl
