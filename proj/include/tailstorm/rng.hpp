#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tailstorm {

constexpr std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// xoshiro256++ with explicit, documented seeding so draws are
/// reproducible across platforms and compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : state_) w = splitmix64(sm);
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) state_[0] = 1;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform on [0,1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform on (0,1]; safe as a log() argument.
  double uniform_pos() {
    return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
  }

  double exponential() { return -std::log(uniform_pos()); }

  /// Standard Frechet: P(X <= x) = exp(-x^-alpha).
  double frechet(double alpha) { return std::pow(exponential(), -1.0 / alpha); }

  /// Standard Pareto: P(Y <= y) = 1 - y^-alpha, y >= 1.
  double pareto(double alpha) { return std::pow(uniform_pos(), -1.0 / alpha); }

  /// Uniform integer on [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw std::invalid_argument("uniform_int: empty range");
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());  // full range
    // Lemire multiply-shift with rejection of the biased region.
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * span;
    auto lowbits = static_cast<std::uint64_t>(m);
    if (lowbits < span) {
      const std::uint64_t threshold = (0 - span) % span;
      while (lowbits < threshold) {
        x = next_u64();
        m = static_cast<unsigned __int128>(x) * span;
        lowbits = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
  }

  /// Geometric with P(J = j) proportional to q^j, truncated and
  /// renormalized on {0, ..., j_max}. Inversion on one uniform draw.
  int truncated_geometric(double q, int j_max) {
    if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("truncated_geometric: q in (0,1)");
    const double tail = std::pow(q, static_cast<double>(j_max) + 1.0);
    const double v = tail + uniform_pos() * (1.0 - tail);  // conditioned on J <= j_max
    int j = static_cast<int>(std::floor(std::log(v) / std::log(q)));
    if (j < 0) j = 0;
    if (j > j_max) j = j_max;
    return j;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t state_[4];
};

/// Deterministic stream derivation: the stream is a pure function of
/// (seed, ordered label path). Distinct paths give unrelated streams.
/// Derivation: fold state <- splitmix64(state XOR fnv1a64(label)) over the
/// labels, starting from the seed, then seed xoshiro256++ from the result.
inline Rng derive_stream(std::uint64_t seed, std::span<const std::string> labels) {
  std::uint64_t state = seed;
  for (const auto& label : labels) {
    std::uint64_t mixed = state ^ fnv1a64(label);
    state = splitmix64(mixed);
  }
  return Rng(state);
}

inline Rng derive_stream(std::uint64_t seed, std::initializer_list<std::string> labels) {
  return derive_stream(seed, std::span<const std::string>(labels.begin(), labels.size()));
}

}  // namespace tailstorm
