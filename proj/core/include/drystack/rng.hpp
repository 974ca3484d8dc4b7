#pragma once

#include <cstdint>
#include <cmath>
#include <vector>

namespace drystack {

// Deterministic random stream. Wraps a 64-bit Mersenne Twister core but
// implements the distributions by hand so that sequences are identical across
// standard library implementations; reproducibility of artifacts depends on
// this, not just on seeding.
class Rng {
public:
  explicit Rng(std::uint64_t seed = 0x9e3779b97f4a7c15ull) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    // SplitMix64 expansion of the seed into the Twister state.
    std::uint64_t x = seed;
    for (auto& w : state_) {
      x += 0x9e3779b97f4a7c15ull;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      w = z ^ (z >> 31);
    }
    index_ = kN;
    have_gauss_ = false;
  }

  // Raw 64-bit draw (MT19937-64 step).
  std::uint64_t next_u64() {
    if (index_ >= kN) twist();
    std::uint64_t x = state_[index_++];
    x ^= (x >> 29) & 0x5555555555555555ull;
    x ^= (x << 17) & 0x71d67fffeda60000ull;
    x ^= (x << 37) & 0xfff7eee000000000ull;
    x ^= x >> 43;
    return x;
  }

  // Uniform double in [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

  int randint(int n) { return static_cast<int>(next_below(static_cast<std::uint64_t>(n))); }

  // Standard normal via Box-Muller; caches the second value.
  double normal() {
    if (have_gauss_) {
      have_gauss_ = false;
      return gauss_;
    }
    double u1 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    gauss_ = r * std::sin(a);
    have_gauss_ = true;
    return r * std::cos(a);
  }

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Derives an independent stream, e.g. one per episode or per worker.
  Rng fork(std::uint64_t stream_id) {
    return Rng(next_u64() ^ (0xd1342543de82ef95ull * (stream_id + 1)));
  }

private:
  static constexpr std::size_t kN = 312;
  static constexpr std::size_t kM = 156;

  void twist() {
    constexpr std::uint64_t kMatrixA = 0xb5026f5aa96619e9ull;
    constexpr std::uint64_t kUpperMask = 0xffffffff80000000ull;
    constexpr std::uint64_t kLowerMask = 0x7fffffffull;
    for (std::size_t i = 0; i < kN; ++i) {
      const std::uint64_t x = (state_[i] & kUpperMask) | (state_[(i + 1) % kN] & kLowerMask);
      std::uint64_t x_a = x >> 1;
      if (x & 1ull) x_a ^= kMatrixA;
      state_[i] = state_[(i + kM) % kN] ^ x_a;
    }
    index_ = 0;
  }

  std::uint64_t state_[kN] = {};
  std::size_t index_ = kN;
  bool have_gauss_ = false;
  double gauss_ = 0.0;
};

}  // namespace drystack
