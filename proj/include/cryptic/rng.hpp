#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace cryptic {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
/// A stream is identified by its 128-bit counter prefix, so any draw can be
/// reproduced independently of evaluation order or thread assignment.
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter bijection(Counter ctr, Key key) {
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        key[0] += kWeyl0;
        key[1] += kWeyl1;
      }
      const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
      const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
      const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
      const auto lo0 = static_cast<std::uint32_t>(p0);
      const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
      const auto lo1 = static_cast<std::uint32_t>(p1);
      ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kMul0 = 0xD2511F53u;
  static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
  static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
  static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

/// Purpose tags keep unrelated draws for the same entity on disjoint streams.
enum class Stream : std::uint32_t {
  kRegions = 1,
  kFamilies,
  kDemographics,
  kInstitutions,
  kHistory,
  kHazard,
  kQueries,
  kPurchases,
  kSampling,
  kTenants,
};

/// Sequential view of one Philox stream: (seed, purpose, entity, sub) -> draws.
class StreamRng {
 public:
  StreamRng(std::uint64_t seed, Stream purpose, std::uint64_t entity, std::uint32_t sub = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        ctr_{static_cast<std::uint32_t>(entity), static_cast<std::uint32_t>(entity >> 32),
             (static_cast<std::uint32_t>(purpose) << 24) ^ sub, 0u} {}

  std::uint32_t next_u32() {
    if (pos_ == 4) refill();
    return block_[pos_++];
  }

  std::uint64_t next_u64() {
    const std::uint64_t hi = next_u32();
    return (hi << 32) | next_u32();
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's nearly-divisionless rejection on 64-bit draws.
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = next_u64();
      const __uint128_t m = static_cast<__uint128_t>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  double normal() {
    // Box-Muller; discards the second variate to keep the stream position simple.
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Poisson variate by inversion; intended for small means.
  int poisson(double mean) {
    const double limit = std::exp(-mean);
    int k = 0;
    double prod = uniform();
    while (prod > limit) {
      ++k;
      prod *= uniform();
    }
    return k;
  }

 private:
  void refill() {
    block_ = Philox4x32::bijection(ctr_, key_);
    ++ctr_[3];
    pos_ = 0;
  }

  Philox4x32::Key key_;
  Philox4x32::Counter ctr_;
  Philox4x32::Counter block_{};
  int pos_ = 4;
};

/// Draws from a discrete distribution given non-negative weights.
template <typename Weights>
std::size_t draw_weighted(StreamRng& rng, const Weights& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.uniform() * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < std::size(weights); ++i) {
    if (weights[i] <= 0.0) continue;
    last = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last;
}

}  // namespace cryptic
