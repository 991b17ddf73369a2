/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <cstddef>
#include <string>

namespace gpssl::simd {

using SqdistFn = double (*)(const double*, const double*, const double*, std::size_t);

/// Reference kernel: sum_d ((a[d] - b[d]) * inv_ls[d])^2, accumulated in index order.
double scaled_sqdist_scalar(const double* a, const double* b, const double* inv_ls,
                            std::size_t dim);

#if defined(__x86_64__) || defined(_M_X64)
/// AVX2 variant of scaled_sqdist_scalar. Per-lane arithmetic matches the scalar
/// kernel (mul + add, no FMA contraction); only the 4-lane reduction order differs.
double scaled_sqdist_avx2(const double* a, const double* b, const double* inv_ls,
                          std::size_t dim);
bool avx2_supported();
#endif

/// Kernel selected once per process: AVX2 when the CPU supports it, scalar
/// otherwise or when the environment variable GPSSL_SIMD=scalar is set.
SqdistFn scaled_sqdist_fn();

/// Name of the selected backend ("scalar" or "avx2").
const std::string& active_backend();

inline double scaled_sqdist(const double* a, const double* b, const double* inv_ls,
                            std::size_t dim) {
    return scaled_sqdist_fn()(a, b, inv_ls, dim);
}

}  // namespace gpssl::simd
