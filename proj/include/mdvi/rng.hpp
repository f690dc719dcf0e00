#ifndef MDVI_RNG_HPP
#define MDVI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace mdvi {

// SplitMix64 finalizer. Counter-indexed draws below are the SplitMix64 sequence
// evaluated at an arbitrary index, which makes every variate addressable by
// (key, counter) without any sequential state.
inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline uint64_t stream_key(uint64_t base_seed, uint64_t stream) {
  return mix64(mix64(base_seed + kGolden) ^ (stream * 0xda942042e4dd58b5ULL + 0x2545f4914f6cdd1dULL));
}

// Stateless Gaussian stream: normal(i) is a pure function of (key, i).
// Used for Brownian increments; the counter layout is owned by the integrator,
// so runs at different step sizes can address the same underlying path.
class GaussianStream {
 public:
  GaussianStream(uint64_t base_seed, uint64_t stream) : key_(stream_key(base_seed, stream)) {}
  explicit GaussianStream(uint64_t key) : key_(key) {}

  double uniform(uint64_t counter) const {
    // in [0,1)
    return static_cast<double>(mix64(key_ + counter * kGolden + kGolden) >> 11) * 0x1.0p-53;
  }

  double normal(uint64_t counter) const {
    // Box-Muller, cosine branch; u1 in (0,1] so the log is finite.
    uint64_t c = 2 * counter;
    double u1 = (static_cast<double>(mix64(key_ + c * kGolden + kGolden) >> 11) + 1.0) * 0x1.0p-53;
    double u2 = static_cast<double>(mix64(key_ + (c + 1) * kGolden + kGolden) >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  uint64_t key() const { return key_; }

 private:
  uint64_t key_;
};

// Sequential convenience wrapper for sampling and property tests.
class Rng {
 public:
  explicit Rng(uint64_t seed) : s_(seed) {}

  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }           // [0,1)
  double uniform_pos() { return (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53; }  // (0,1]
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  uint64_t next() {
    s_ += kGolden;
    return mix64(s_);
  }

 private:
  uint64_t s_;
};

}  // namespace mdvi

#endif
