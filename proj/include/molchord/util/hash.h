//
// MolChord desk pipeline - Copyright 2026 The MolChord Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLCHORD_UTIL_HASH_H_
#define MOLCHORD_UTIL_HASH_H_

#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <string>
#include <string_view>

namespace molchord {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c: s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Order-sensitive combination; stable across platforms.
constexpr std::uint64_t hash_combine(std::uint64_t seed,
                                     std::uint64_t value) noexcept {
  return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6)
                            + (seed >> 2)));
}

inline std::uint64_t
hash_values(std::initializer_list<std::uint64_t> values) noexcept {
  std::uint64_t h = 0x51ed270b27c3a1d5ULL;
  for (auto v: values)
    h = hash_combine(h, v);
  return h;
}

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path &path);

}  // namespace molchord

#endif  // MOLCHORD_UTIL_HASH_H_
