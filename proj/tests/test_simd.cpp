#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <vector>

#include "gpssl/simd.hpp"

using gpssl::simd::scaled_sqdist_scalar;

namespace {

std::vector<double> random_values(std::size_t n, std::uint64_t seed, double scale) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, scale);
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace

TEST_CASE("scalar kernel matches a plain loop") {
    const std::vector<double> a{1.0, 2.0, 3.0};
    const std::vector<double> b{0.5, -1.0, 3.0};
    const std::vector<double> inv{1.0, 0.5, 2.0};
    double expected = 0.0;
    for (int i = 0; i < 3; ++i) {
        const double t = (a[i] - b[i]) * inv[i];
        expected += t * t;
    }
    CHECK(scaled_sqdist_scalar(a.data(), b.data(), inv.data(), 3) == doctest::Approx(expected));
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 variant is equivalent to the scalar reference") {
    if (!gpssl::simd::avx2_supported()) return;
    for (std::size_t dim : {1u, 2u, 3u, 4u, 5u, 7u, 8u, 11u, 16u, 17u, 19u, 64u, 257u}) {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto a = random_values(dim, seed * 3 + 1, 2.0);
            const auto b = random_values(dim, seed * 3 + 2, 2.0);
            auto inv = random_values(dim, seed * 3 + 3, 1.0);
            for (double& x : inv) x = std::abs(x) + 0.1;
            const double reference = scaled_sqdist_scalar(a.data(), b.data(), inv.data(), dim);
            const double vectorized =
                gpssl::simd::scaled_sqdist_avx2(a.data(), b.data(), inv.data(), dim);
            CHECK(std::abs(vectorized - reference) <=
                  1e-13 * std::max(1.0, std::abs(reference)));
        }
    }
}
#endif

TEST_CASE("dispatch picks a valid backend and stays fixed") {
    const std::string& name = gpssl::simd::active_backend();
    CHECK((name == "scalar" || name == "avx2"));
    CHECK(gpssl::simd::scaled_sqdist_fn() == gpssl::simd::scaled_sqdist_fn());

    const auto a = random_values(9, 11, 1.0);
    const auto b = random_values(9, 12, 1.0);
    auto inv = random_values(9, 13, 1.0);
    for (double& x : inv) x = std::abs(x) + 0.1;
    const double via_dispatch = gpssl::simd::scaled_sqdist(a.data(), b.data(), inv.data(), 9);
    const double reference = scaled_sqdist_scalar(a.data(), b.data(), inv.data(), 9);
    CHECK(std::abs(via_dispatch - reference) <= 1e-13 * std::max(1.0, std::abs(reference)));
}
