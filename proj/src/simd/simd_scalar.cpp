/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/simd.hpp"

namespace gpssl::simd {

double scaled_sqdist_scalar(const double* a, const double* b, const double* inv_ls,
                            std::size_t dim) {
    double q = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double t = (a[i] - b[i]) * inv_ls[i];
        q += t * t;
    }
    return q;
}

}  // namespace gpssl::simd
