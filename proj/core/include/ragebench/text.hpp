#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragebench {

/// Lowercased ASCII alphanumeric runs. Every other byte (including non-ASCII
/// UTF-8 bytes) is a boundary. Shared by the reference embedder and the
/// lexical index so both see the same vocabulary.
std::vector<std::string> tokenize(std::string_view text);

std::string_view trim(std::string_view text);
bool is_blank(std::string_view text);

/// Lenient UTF-8 decoding: an invalid byte decodes to itself as a code point
/// so that every input byte is accounted for.
std::u32string utf8_decode(std::string_view text);
std::string utf8_encode(std::u32string_view text);

/// 64-bit FNV-1a, offset basis 0xcbf29ce484222325, prime 0x100000001b3.
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value);

/// SplitMix64 (Steele, Lea, Flood 2014). Chosen for sampling because the
/// whole generator is three lines and reproducible in any language.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, bound) by rejection, bound > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;

 private:
  std::uint64_t state_;
};

}  // namespace ragebench
