#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace inkeval {

/// Lowercase hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view bytes);
/// Throws Error(MalformedJson) on invalid input; whitespace is ignored.
std::string base64_decode(std::string_view text);

/// 64-bit FNV-1a over the seed's little-endian bytes followed by `data`.
std::uint64_t fnv1a64(std::uint64_t seed, std::string_view data);

}  // namespace inkeval
