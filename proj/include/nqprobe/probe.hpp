#pragma once

// Noise-quantization probe: perturb with Gaussian noise, round to integer
// levels (optionally clamped to [0,255]), average R replicas, and take the
// residual against the input.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "nqprobe/image.hpp"

namespace nqprobe {

enum class SigmaUnits {
  kLevels,      // sigma is already in units of one quantization level
  kNormalized,  // sigma is a fraction of the 256-level range
};

inline constexpr double kLevelCount = 256.0;

double sigma_to_levels(double sigma, SigmaUnits units);
SigmaUnits parse_sigma_units(const std::string& name);

struct ProbeConfig {
  double sigma_levels = 0.10 * kLevelCount;
  int replicas = 50;
  std::uint64_t master_seed = 0;
  bool clip = true;

  // Throws InvalidConfig on sigma_levels <= 0 or replicas < 1.
  void validate() const;
  bool operator==(const ProbeConfig&) const = default;
};

// Round half away from zero.
inline double round_half_away(double v) noexcept {
  const double t = static_cast<double>(static_cast<std::int64_t>(v));
  const double frac = v - t;
  return t + static_cast<double>(frac >= 0.5) - static_cast<double>(frac <= -0.5);
}

// Seed of replica r (0-based) under a master seed.
std::uint64_t replica_seed(std::uint64_t master_seed, int replica) noexcept;

// One quantized replica, integer valued. Signed so unclipped values may leave
// [0,255].
struct QuantizedImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<std::int32_t> data;
};

// round(I + N) with N ~ N(0, sigma_levels^2) i.i.d., clamped to [0,255] when
// `clip`. The noise field is a pure function of replica_seed.
QuantizedImage add_noise_quantize(const ImageBuffer& image, double sigma_levels,
                                  std::uint64_t replica_seed, bool clip);

// Delta = I - restored, in level units, row-major and channel-interleaved.
struct DifferenceMap {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> data;
  ProbeConfig config;

  std::size_t size() const noexcept { return data.size(); }
  bool empty() const noexcept { return data.empty(); }
  double at(std::size_t row, std::size_t col, std::size_t channel) const noexcept {
    return data[(row * width + col) * 3 + channel];
  }
};

struct ProbeResult {
  // Mean of the R quantized replicas. Kept as a raw plane because unclipped
  // restorations can fall outside [0,256).
  std::vector<double> restored;
  DifferenceMap delta;
};

// Replicas are accumulated as exact integer sums, so the result is
// bit-identical for any `threads` (0 = all cores).
ProbeResult run_probe(const ImageBuffer& image, const ProbeConfig& config,
                      unsigned threads = 0);

struct DeltaStats {
  static constexpr int kHistogramBins = 65;  // unit bins centred on -32..32
  std::array<double, 3> channel_mean{};
  std::array<double, 3> channel_std{};
  double mean_abs = 0.0;
  double mean = 0.0;
  std::array<double, kHistogramBins> histogram{};  // fraction of values
  double underflow = 0.0;                          // below -32.5
  double overflow = 0.0;                           // at or above 32.5
};

DeltaStats probe_statistics(const DifferenceMap& delta);

// `.dmap`: one JSON header line, then float32 little-endian samples.
void write_dmap(const std::filesystem::path& path, const DifferenceMap& delta);
DifferenceMap read_dmap(const std::filesystem::path& path);

// 128 + gain * Delta, clamped to [0,255] and rounded.
std::vector<std::uint8_t> visualize(const DifferenceMap& delta, double gain = 20.0);

}  // namespace nqprobe
