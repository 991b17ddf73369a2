/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#include "gpssl/simd.hpp"

#include <cstdlib>
#include <cstring>

namespace gpssl::simd {

namespace {

struct Backend {
    std::string name;
    SqdistFn fn;

    Backend() {
        const char* force = std::getenv("GPSSL_SIMD");
        if (force != nullptr && std::strcmp(force, "scalar") == 0) {
            name = "scalar";
            fn = &scaled_sqdist_scalar;
            return;
        }
#if defined(__x86_64__) || defined(_M_X64)
        if (avx2_supported()) {
            name = "avx2";
            fn = &scaled_sqdist_avx2;
            return;
        }
#endif
        name = "scalar";
        fn = &scaled_sqdist_scalar;
    }
};

const Backend& backend() {
    static const Backend instance;
    return instance;
}

}  // namespace

SqdistFn scaled_sqdist_fn() { return backend().fn; }

const std::string& active_backend() { return backend().name; }

}  // namespace gpssl::simd
