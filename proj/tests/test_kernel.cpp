#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>

#include "gpssl/kernel.hpp"
#include "test_util.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using gpssl::KernelSpec;

namespace {

KernelSpec unit_spec(int dim, double jitter = 0.0) {
    KernelSpec spec;
    spec.signal_variance = 1.0;
    spec.lengthscales = VectorXd::Ones(dim);
    spec.jitter = jitter;
    return spec;
}

}  // namespace

TEST_CASE("rbf closed-form values") {
    VectorXd x(1), y(1);
    x << 0.3;
    y << 0.3;
    CHECK(gpssl::rbf(x, y, unit_spec(1)) == doctest::Approx(1.0));

    // unit scaled distance forces exponent -1/2
    KernelSpec spec = unit_spec(1);
    spec.lengthscales << 0.7;
    x << 0.0;
    y << 0.7;
    CHECK(gpssl::rbf(x, y, spec) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));

    KernelSpec spec2 = unit_spec(2);
    spec2.lengthscales << 2.0, 3.0;
    VectorXd a(2), b(2);
    a << 1.0, 2.0;
    b << 3.0, 5.0;
    CHECK(gpssl::rbf(a, b, spec2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("rbf rejects bad input") {
    VectorXd x(2), y(3);
    x << 0, 0;
    y << 0, 0, 0;
    CHECK_THROWS_AS(gpssl::rbf(x, y, unit_spec(2)), std::invalid_argument);
    VectorXd bad(2);
    bad << std::nan(""), 0.0;
    VectorXd ok(2);
    ok << 0.0, 0.0;
    CHECK_THROWS_AS(gpssl::rbf(bad, ok, unit_spec(2)), std::invalid_argument);
    KernelSpec invalid = unit_spec(2);
    invalid.signal_variance = -1.0;
    CHECK_THROWS_AS(gpssl::rbf(ok, ok, invalid), std::invalid_argument);
}

TEST_CASE("rbf symmetry and stationarity") {
    KernelSpec spec = unit_spec(3);
    spec.lengthscales << 0.8, 1.3, 2.0;
    for (int trial = 0; trial < 10; ++trial) {
        const VectorXd x = test_util::random_vector(3, 100 + trial);
        const VectorXd y = test_util::random_vector(3, 200 + trial);
        const VectorXd t = test_util::random_vector(3, 300 + trial);
        CHECK(gpssl::rbf(x, y, spec) == doctest::Approx(gpssl::rbf(y, x, spec)));
        CHECK(gpssl::rbf(x, y, spec) ==
              doctest::Approx(gpssl::rbf(x + t, y + t, spec)).epsilon(1e-12));
        CHECK(gpssl::rbf(x, y, spec) > 0.0);
        CHECK(gpssl::rbf(x, y, spec) <= spec.signal_variance);
    }
}

TEST_CASE("gram on identical rows and jitter contract") {
    MatrixXd x(3, 2);
    x << 1.0, 2.0, 1.0, 2.0, 1.0, 2.0;
    const MatrixXd k = gpssl::gram(x, x, unit_spec(2), false);
    CHECK(k.isApprox(MatrixXd::Ones(3, 3)));

    KernelSpec spec = unit_spec(2, 1e-6);
    const MatrixXd kj = gpssl::gram(x, x, spec, true);
    for (int i = 0; i < 3; ++i) CHECK(kj(i, i) == doctest::Approx(1.0 + 1e-6));
}

TEST_CASE("gram is exactly symmetric and PSD with jitter") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const Eigen::Index n = 3 + static_cast<Eigen::Index>(seed % 8);
        const MatrixXd x = test_util::random_matrix(n, 2, 400 + seed);
        KernelSpec spec = unit_spec(2, 1e-6);
        spec.lengthscales << 0.9, 1.4;
        const MatrixXd k = gpssl::gram(x, x, spec, true);
        CHECK(k == k.transpose());
        Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
        CHECK(eig.eigenvalues().minCoeff() >= -1e-10);
    }
}

TEST_CASE("gram eigenvalue oracle on a fixed 5x5 instance") {
    const MatrixXd x = test_util::random_matrix(5, 2, 77);
    KernelSpec spec = unit_spec(2, 1e-6);
    const MatrixXd k = gpssl::gram(x, x, spec, true);
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(k);
    CHECK(eig.eigenvalues().minCoeff() >= 0.0);
}

TEST_CASE("gram cross input validation") {
    const MatrixXd x = test_util::random_matrix(4, 2, 5);
    const MatrixXd y = test_util::random_matrix(3, 3, 6);
    CHECK_THROWS_AS(gpssl::gram(x, y, unit_spec(2), false), std::invalid_argument);
    const MatrixXd y2 = test_util::random_matrix(4, 2, 7);
    CHECK_THROWS_AS(gpssl::gram(x, y2, unit_spec(2), true), std::invalid_argument);
}

TEST_CASE("lengthscale heuristic on equispaced points") {
    MatrixXd x(3, 1);
    x << 0.0, 1.0, 2.0;
    const VectorXd ls = gpssl::lengthscale_heuristic(x, 1);
    CHECK(ls.size() == 1);
    CHECK(ls[0] == doctest::Approx(1.0));
}

TEST_CASE("lengthscale heuristic enumerated 2-NN example") {
    MatrixXd x(3, 1);
    x << 0.0, 1.0, 3.0;
    // per-point 2nd-nearest distances are {3, 2, 3}
    CHECK(gpssl::lengthscale_heuristic(x, 2)[0] == doctest::Approx(3.0));
}

TEST_CASE("lengthscale heuristic scales homogeneously") {
    const MatrixXd x = test_util::random_matrix(12, 3, 91);
    const VectorXd base = gpssl::lengthscale_heuristic(x, 3);
    const VectorXd scaled = gpssl::lengthscale_heuristic(MatrixXd(2.5 * x), 3);
    CHECK(scaled[0] == doctest::Approx(2.5 * base[0]).epsilon(1e-12));
    CHECK(base.minCoeff() == base.maxCoeff());  // isotropic fill
}

TEST_CASE("lengthscale heuristic is non-decreasing in the neighbor count") {
    const MatrixXd x = test_util::random_matrix(15, 2, 92);
    double prev = 0.0;
    for (int k = 1; k < 15; ++k) {
        const double cur = gpssl::lengthscale_heuristic(x, k)[0];
        CHECK(cur >= prev);
        prev = cur;
    }
}

TEST_CASE("lengthscale heuristic guards") {
    const MatrixXd x = test_util::random_matrix(5, 2, 93);
    CHECK_THROWS_AS(gpssl::lengthscale_heuristic(x, 5), std::invalid_argument);
    CHECK_THROWS_AS(gpssl::lengthscale_heuristic(x, 0), std::invalid_argument);
    MatrixXd dup(4, 2);
    dup << 1, 2, 1, 2, 1, 2, 1, 2;
    CHECK_THROWS_AS(gpssl::lengthscale_heuristic(dup, 1), std::invalid_argument);
}
