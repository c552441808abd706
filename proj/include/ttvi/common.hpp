#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttvi {

using Vec = std::vector<double>;
using Letter = std::uint32_t;  // bitmask over atomic propositions, declaration order

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kDefaultDenseCap = 10'000'000;
inline constexpr std::size_t kDefaultDfaStateCap = 10'000;
inline constexpr std::size_t kDefaultIterationCap = 500;
inline constexpr std::size_t kMaxAtomicPropositions = 20;

/// Parse failure with a byte offset into the offending text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t position)
      : std::runtime_error(message + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

// 64-bit FNV-1a, used for config hashes and trace hashes.
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  std::uint64_t h = seed;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a(s.data(), s.size(), seed);
}

// splitmix64; used to derive independent per-episode RNG seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

}  // namespace ttvi
