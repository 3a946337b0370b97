#pragma once

// Random number plumbing shared by the probe and the generators.
//
// Seeds are derived with the SplitMix64 finalizer (Steele, Lea & Flood 2014,
// also the seeding routine recommended for the xoshiro family); the stream
// generator is xoshiro256++ and normal deviates come from a 256-layer
// ziggurat. Streams are reproducible within this implementation only.

#include <array>
#include <cmath>
#include <cstdint>

namespace nqprobe {

// SplitMix64 output finalizer: a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Seed for sub-stream `index` of `master`: mix64(master + golden * (index + 1)).
constexpr std::uint64_t derive_seed(std::uint64_t master,
                                    std::uint64_t index) noexcept {
  return mix64(master + 0x9E3779B97F4A7C15ULL * (index + 1));
}

class Xoshiro256pp {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256pp(std::uint64_t seed) noexcept {
    // SplitMix64 state expansion.
    for (auto& word : s_) {
      seed += 0x9E3779B97F4A7C15ULL;
      word = mix64(seed);
    }
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // Uniform double in (0, 1].
  double uniform_open_closed() noexcept {
    return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

// Standard normal sampler (Marsaglia & Tsang ziggurat, 256 layers).
//
// Each draw takes one 64-bit word: bits 0..7 pick the layer and the top 53
// bits, read as a signed integer, give the abscissa. The rectangle test is an
// integer comparison.
class ZigguratNormal {
 public:
  double operator()(Xoshiro256pp& rng) const noexcept {
    for (;;) {
      const std::uint64_t bits = rng();
      const unsigned layer = static_cast<unsigned>(bits & 0xFF);
      const std::int64_t v = static_cast<std::int64_t>(bits) >> 11;  // [-2^52, 2^52)
      const std::int64_t mag = v < 0 ? ~v : v;
      if (mag < tables_.k[layer]) return static_cast<double>(v) * tables_.w[layer];
      double x = 0.0;
      if (resolve_outside_core(bits, rng, x)) return x;
    }
  }

 private:
  static constexpr double kR = 3.6541528853610088;
  static constexpr double kV = 0.00492867323399;
  static constexpr double kScale = 0x1.0p52;

  struct Tables {
    std::array<double, 257> x{};
    std::array<double, 257> f{};
    std::array<double, 256> w{};        // x[i] / 2^52
    std::array<std::int64_t, 256> k{};  // |v| below this lies inside layer i's core
    Tables() {
      const double f_r = std::exp(-0.5 * kR * kR);
      x[0] = kV / f_r;
      x[1] = kR;
      for (int i = 1; i < 255; ++i) {
        const double arg = std::exp(-0.5 * x[i] * x[i]) + kV / x[i];
        x[i + 1] = std::sqrt(-2.0 * std::log(arg));
      }
      x[256] = 0.0;
      for (int i = 0; i < 257; ++i) f[i] = std::exp(-0.5 * x[i] * x[i]);
      for (int i = 0; i < 256; ++i) {
        w[i] = x[i] / kScale;
        k[i] = static_cast<std::int64_t>(std::floor(x[i + 1] / x[i] * kScale));
      }
    }
  };

  // Wedge or tail test for a candidate outside its layer's core. Returns false
  // when the candidate is rejected and a fresh draw is needed.
  static bool resolve_outside_core(std::uint64_t bits, Xoshiro256pp& rng,
                                   double& x) noexcept {
    const unsigned layer = static_cast<unsigned>(bits & 0xFF);
    const std::int64_t v = static_cast<std::int64_t>(bits) >> 11;
    if (layer == 0) {
      x = tail(rng, v < 0);
      return true;
    }
    x = static_cast<double>(v) * tables_.w[layer];
    const double f0 = tables_.f[layer];
    const double f1 = tables_.f[layer + 1];
    return f1 + (f0 - f1) * rng.uniform() < std::exp(-0.5 * x * x);
  }

  static double tail(Xoshiro256pp& rng, bool negative) noexcept {
    double x = 0.0;
    double y = 0.0;
    do {
      x = std::log(rng.uniform_open_closed()) / kR;
      y = std::log(rng.uniform_open_closed());
    } while (-2.0 * y < x * x);
    return negative ? x - kR : kR - x;
  }

  static inline const Tables tables_{};
};

}  // namespace nqprobe
