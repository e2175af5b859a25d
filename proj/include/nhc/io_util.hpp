#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace nhc {

/// Shortest decimal form that parses back to the same double. Deterministic
/// and locale-independent, so identical inputs always serialize to identical
/// bytes.
std::string format_double(double v);

/// Strict double parse of an entire token; throws on trailing garbage.
double parse_double(std::string_view token, const std::string& context);

std::vector<std::string_view> split_csv_line(std::string_view line);

/// 16-hex-digit FNV-1a hash; used for opaque configuration digests.
std::string fnv1a_hex(std::string_view text);

}  // namespace nhc
