#pragma once

#include <random>

#include <Eigen/Core>

namespace test_util {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     std::uint64_t seed, double scale = 1.0) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * normal(rng);
    return m;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, std::uint64_t seed, double scale = 1.0) {
    return random_matrix(n, 1, seed, scale).col(0);
}

/// Max relative error between an analytic gradient and a central finite
/// difference of `f` over the coordinates of `theta`.
template <typename F>
double max_fd_rel_error(F&& f, Eigen::VectorXd theta, const Eigen::VectorXd& analytic,
                        double step) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double saved = theta[i];
        theta[i] = saved + step;
        const double fp = f(theta);
        theta[i] = saved - step;
        const double fm = f(theta);
        theta[i] = saved;
        const double fd = (fp - fm) / (2.0 * step);
        const double rel = std::abs(analytic[i] - fd) /
                           std::max({std::abs(analytic[i]), std::abs(fd), 1e-8});
        worst = std::max(worst, rel);
    }
    return worst;
}

inline double sample_mean(const std::vector<double>& xs) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

inline double sample_std(const std::vector<double>& xs) {
    const double mean = sample_mean(xs);
    double s = 0.0;
    for (double x : xs) s += (x - mean) * (x - mean);
    return std::sqrt(s / static_cast<double>(xs.size() - 1));
}

}  // namespace test_util
