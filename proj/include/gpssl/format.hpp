/* Copyright (c) 2026 gpssl contributors. All rights reserved.
 * Licensed under the Apache License Version 2.0. See LICENSE file in the project root.
 */
#pragma once

#include <charconv>
#include <string>

namespace gpssl {

/// Shortest round-trip decimal form; the single formatting used by every CSV
/// and JSON writer so repeated runs are byte-identical.
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace gpssl
