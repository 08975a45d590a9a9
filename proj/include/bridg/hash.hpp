#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace bridg {

// FNV-1a 64-bit. Used for content fingerprints and cache keys; cache lookups
// verify the stored payload so a key collision can never alias a response.
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

std::string hex64(std::uint64_t value);

inline std::string content_hash(std::string_view data) { return hex64(fnv1a64(data)); }

// Mixes an integer into a hash state; used to derive per-sample RNG seeds.
constexpr std::uint64_t mix64(std::uint64_t h, std::uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace bridg
