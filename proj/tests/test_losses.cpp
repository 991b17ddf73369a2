#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "gpssl/losses.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using namespace gpssl;

TEST_CASE("invariance loss values") {
    const MatrixXd z = test_util::random_matrix(6, 3, 1);
    CHECK(invariance_loss(z, z) == doctest::Approx(0.0));

    MatrixXd a(1, 2), b(1, 2);
    a << 0.0, 0.0;
    b << 3.0, 4.0;
    CHECK(invariance_loss(a, b) == doctest::Approx(25.0));
    CHECK(invariance_loss(a, b) == doctest::Approx(invariance_loss(b, a)));

    CHECK_THROWS_AS(invariance_loss(a, test_util::random_matrix(2, 2, 3)),
                    std::invalid_argument);
}

TEST_CASE("variance loss values") {
    const double gamma = 1.0, eps = 1e-7;
    MatrixXd constant = MatrixXd::Constant(5, 3, 2.0);
    CHECK(variance_loss(constant, gamma, eps) ==
          doctest::Approx(1.0 - std::sqrt(1e-7)).epsilon(1e-9));

    MatrixXd spread = 10.0 * test_util::random_matrix(50, 3, 2);
    CHECK(variance_loss(spread, gamma, eps) == doctest::Approx(0.0));

    MatrixXd two(2, 1);
    two << 0.0, 2.0;  // sample variance 2 beats the target
    CHECK(variance_loss(two, 1.0, 1e-12) == doctest::Approx(0.0));

    CHECK_THROWS_AS(variance_loss(MatrixXd::Zero(1, 2), gamma, eps), std::invalid_argument);
}

TEST_CASE("covariance loss values") {
    CHECK(covariance_loss(test_util::random_matrix(7, 1, 4)) == doctest::Approx(0.0));

    MatrixXd uncorrelated(4, 2);
    uncorrelated << 1, 1, -1, 1, 1, -1, -1, -1;
    CHECK(covariance_loss(uncorrelated) == doctest::Approx(0.0));

    MatrixXd correlated(2, 2);
    correlated << 1, 1, -1, -1;
    CHECK(covariance_loss(correlated) == doctest::Approx(4.0));

    CHECK_THROWS_AS(covariance_loss(MatrixXd::Zero(1, 2)), std::invalid_argument);
}

TEST_CASE("composite loss values") {
    LossWeights w;
    w.c_variance = 0.0;
    w.c_covariance = 0.0;
    CHECK(gpssl_loss(test_util::random_matrix(6, 4, 5), w) == doctest::Approx(0.0));

    LossWeights paper;
    paper.c_variance = 50.0;
    paper.c_covariance = 10.0;
    const MatrixXd constant = MatrixXd::Constant(8, 5, 1.5);
    CHECK(gpssl_loss(constant, paper) ==
          doctest::Approx(50.0 * (1.0 - std::sqrt(1e-7))).epsilon(1e-9));

    // per-column variance above target and diagonal covariance
    MatrixXd healthy(4, 2);
    healthy << 2, 2, -2, 2, 2, -2, -2, -2;
    CHECK(gpssl_loss(healthy, paper) == doctest::Approx(0.0));
    CHECK(gpssl_loss(test_util::random_matrix(9, 3, 6), paper) >= 0.0);
}

TEST_CASE("negative variance loss values") {
    CHECK(negative_variance_loss(MatrixXd::Constant(5, 1, 3.0)) == doctest::Approx(0.0));
    MatrixXd z(2, 1);
    z << 1.0, -1.0;
    CHECK(negative_variance_loss(z) == doctest::Approx(-1.0));
    CHECK(negative_variance_loss(MatrixXd(z.array() + 7.0)) == doctest::Approx(-1.0));
    CHECK_THROWS_AS(negative_variance_loss(MatrixXd::Zero(3, 2)), std::invalid_argument);
}

TEST_CASE("variance loss is invariant to column permutation and shifts") {
    const MatrixXd z = test_util::random_matrix(8, 4, 7, 0.3);
    const double base = variance_loss(z, 1.0, 1e-7);
    MatrixXd permuted = z;
    permuted.col(0).swap(permuted.col(3));
    permuted.col(1).swap(permuted.col(2));
    CHECK(variance_loss(permuted, 1.0, 1e-7) == doctest::Approx(base));

    MatrixXd shifted = z;
    shifted.rowwise() += Eigen::RowVectorXd::LinSpaced(4, -5.0, 11.0);
    CHECK(variance_loss(shifted, 1.0, 1e-7) == doctest::Approx(base).epsilon(1e-9));
}

TEST_CASE("covariance loss invariances") {
    const MatrixXd z = test_util::random_matrix(9, 3, 8);
    const double base = covariance_loss(z);

    std::mt19937_64 rng(9);
    std::vector<Eigen::Index> rows(9);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), rng);
    MatrixXd row_permuted(9, 3);
    for (Eigen::Index i = 0; i < 9; ++i) row_permuted.row(i) = z.row(rows[i]);
    CHECK(covariance_loss(row_permuted) == doctest::Approx(base).epsilon(1e-12));

    // signed column permutation
    MatrixXd q = MatrixXd::Zero(3, 3);
    q(0, 2) = -1.0;
    q(1, 0) = 1.0;
    q(2, 1) = -1.0;
    CHECK(covariance_loss(z * q) == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    const double step = 1e-5;
    const MatrixXd z0 = test_util::random_matrix(8, 3, 10, 0.4);
    const MatrixXd zp = test_util::random_matrix(8, 3, 11, 0.4);
    const auto as_vec = [](const MatrixXd& m) {
        return VectorXd(Eigen::Map<const VectorXd>(m.data(), m.size()));
    };
    const auto as_mat = [&](const VectorXd& v) {
        return MatrixXd(Eigen::Map<const MatrixXd>(v.data(), z0.rows(), z0.cols()));
    };

    SUBCASE("invariance") {
        const VectorXd analytic = as_vec(invariance_loss_grad(z0, zp));
        const double rel = test_util::max_fd_rel_error(
            [&](const VectorXd& v) { return invariance_loss(as_mat(v), zp); }, as_vec(z0),
            analytic, step);
        CHECK(rel < 1e-4);
    }
    SUBCASE("variance, hinge active") {
        const VectorXd analytic = as_vec(variance_loss_grad(z0, 1.0, 1e-7));
        const double rel = test_util::max_fd_rel_error(
            [&](const VectorXd& v) { return variance_loss(as_mat(v), 1.0, 1e-7); },
            as_vec(z0), analytic, step);
        CHECK(rel < 1e-4);
    }
    SUBCASE("covariance") {
        const VectorXd analytic = as_vec(covariance_loss_grad(z0));
        const double rel = test_util::max_fd_rel_error(
            [&](const VectorXd& v) { return covariance_loss(as_mat(v)); }, as_vec(z0),
            analytic, step);
        CHECK(rel < 1e-4);
    }
    SUBCASE("composite") {
        LossWeights w;
        w.c_variance = 50.0;
        w.c_covariance = 10.0;
        const VectorXd analytic = as_vec(gpssl_loss_grad(z0, w));
        const double rel = test_util::max_fd_rel_error(
            [&](const VectorXd& v) { return gpssl_loss(as_mat(v), w); }, as_vec(z0), analytic,
            step);
        CHECK(rel < 1e-4);
    }
    SUBCASE("negative variance") {
        const MatrixXd z1 = test_util::random_matrix(8, 1, 12);
        const VectorXd analytic =
            VectorXd(Eigen::Map<const VectorXd>(negative_variance_loss_grad(z1).data(), 8));
        const double rel = test_util::max_fd_rel_error(
            [&](const VectorXd& v) {
                return negative_variance_loss(Eigen::Map<const MatrixXd>(v.data(), 8, 1));
            },
            VectorXd(Eigen::Map<const VectorXd>(z1.data(), 8)), analytic, step);
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("hinge subgradient is zero at saturation") {
    // columns with variance far beyond the target give a zero gradient
    const MatrixXd z = 10.0 * test_util::random_matrix(10, 2, 13);
    CHECK(variance_loss_grad(z, 1.0, 1e-7).norm() == doctest::Approx(0.0));
}

TEST_CASE("loss weights validation") {
    LossWeights bad;
    bad.gamma = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    LossWeights negative;
    negative.c_variance = -1.0;
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);
}
