#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace icl {

// splitmix64 is the only random source in the library. It is trivially
// re-implementable in any language, which is what makes the frozen trace
// fixtures in the test suite possible. Streams are derived by XOR-ing the
// base seed with a stream id before construction.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // Uniform integer in [0, n). Plain modulo: the tiny bias is irrelevant for
  // the pool sizes involved and keeps cross-language oracles one-liners.
  std::uint64_t bounded(std::uint64_t n) { return next() % n; }

  // Uniform double in [0, 1) with 53 bits of precision.
  double next_double() {
    return static_cast<double>(next() >> 11) * (1.0 / 9007199254740992.0);
  }

  // Standard normal via Box-Muller (one value per call, cosine branch).
  double next_normal();

 private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// One splitmix64 step from an arbitrary state; used as a stateless mixer by
// the feature-hashing embedder.
inline std::uint64_t splitmix64_mix(std::uint64_t x) {
  std::uint64_t z = x + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& text);

// Partial Fisher-Yates: the first k entries of a permutation of [0, n).
// k is clamped to n.
std::vector<std::size_t> partial_shuffle(std::size_t n, std::size_t k,
                                         SplitMix64& rng);

}  // namespace icl
