/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/simd.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace gpssl::simd {

double scaled_sqdist_avx2(const double* a, const double* b, const double* inv_ls,
                          std::size_t dim) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= dim; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(b + i);
        const __m256d vl = _mm256_loadu_pd(inv_ls + i);
        const __m256d t = _mm256_mul_pd(_mm256_sub_pd(va, vb), vl);
        acc = _mm256_add_pd(acc, _mm256_mul_pd(t, t));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double q = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; i < dim; ++i) {
        const double t = (a[i] - b[i]) * inv_ls[i];
        q += t * t;
    }
    return q;
}

bool avx2_supported() { return __builtin_cpu_supports("avx2") != 0; }

}  // namespace gpssl::simd

#endif
