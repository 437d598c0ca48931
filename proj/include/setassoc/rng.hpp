#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace setassoc {

// Counter-based pseudo-random streams. Every consumer derives its own stream
// from a tuple of key words (run seed, subject hash, draw index, ...), so the
// sequence a worker sees depends only on the work item, never on scheduling.
// All generators below are pure integer arithmetic and produce identical
// sequences on every platform.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ull;

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += kGoldenGamma);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// FNV-1a: stable 64-bit hash for string identifiers (response ids, tags).
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

class Stream {
 public:
  // Folds the key words into the initial state through the splitmix
  // finalizer; distinct key tuples give statistically independent streams.
  explicit Stream(std::initializer_list<std::uint64_t> keys) : state_(0x6a09e667f3bcc909ull) {
    for (std::uint64_t k : keys) {
      state_ ^= k;
      (void)splitmix64(state_);
    }
  }

  std::uint64_t next_u64() { return splitmix64(state_); }

  // Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Unbiased integer in [0, n) by rejection (Lemire's multiply-shift).
  std::uint64_t next_below(std::uint64_t n) {
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Marsaglia's polar method (no trig, fully
  // deterministic given the stream).
  double next_normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_unit() - 1.0;
      v = 2.0 * next_unit() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// In-place Fisher-Yates shuffle driven by the given stream.
template <typename T>
void fisher_yates(std::vector<T>& items, Stream& stream) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(stream.next_below(i));
    std::swap(items[i - 1], items[j]);
  }
}

// The permutation applied to a response for draw b: a shuffle of 0..n-1
// keyed by (seed, response hash, b). Draw index 0 is reserved for the
// observed (identity) arrangement and must not be requested here.
inline std::vector<int> keyed_permutation(std::uint64_t seed, std::uint64_t response_hash,
                                          std::uint64_t draw_index, int n) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  Stream stream{seed, response_hash, draw_index};
  fisher_yates(perm, stream);
  return perm;
}

}  // namespace setassoc
