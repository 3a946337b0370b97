#pragma once

// Per-image and corpus color-distribution statistics: normalized RGB and hue
// histograms, Shannon entropy in bits, and the l2 adjacent-bin smoothness
// penalty sqrt(sum_i (h_i - h_{i-1})^2).

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "nqprobe/image.hpp"

namespace nqprobe {

inline constexpr int kRgbBins = 256;
inline constexpr int kHueBins = 64;
inline constexpr double kDefaultSaturationFloor = 0.05;

struct HistogramSet {
  std::array<std::vector<double>, 3> rgb;  // 256 bins each
  std::vector<double> hue;                 // 64 bins over [0, 360)
  std::size_t pixel_count = 0;
  double hue_excluded_fraction = 0.0;
};

// Fractional images are floored to levels first.
std::array<std::vector<double>, 3> rgb_histograms(const ImageBuffer& image);

struct Hsv {
  double hue_degrees = 0.0;  // [0, 360)
  double saturation = 0.0;
  double value = 0.0;
};

// Hexcone conversion of 8-bit RGB.
Hsv rgb_to_hsv(int r, int g, int b) noexcept;

struct HueHistogram {
  std::vector<double> bins;
  double excluded_fraction = 0.0;
};

// Pixels with saturation below `saturation_floor` are excluded. All-zero bins
// with excluded_fraction 1 when nothing qualifies.
HueHistogram hue_histogram(const ImageBuffer& image,
                           double saturation_floor = kDefaultSaturationFloor);

HistogramSet compute_histograms(const ImageBuffer& image,
                                double saturation_floor = kDefaultSaturationFloor);

double histogram_entropy(std::span<const double> hist);
double smoothness_penalty(std::span<const double> hist);

// Four histograms in order R, G, B, hue.
struct StatsSummary {
  std::array<double, 4> entropy_bits{};
  std::array<double, 4> smoothness_penalty{};

  double mean_rgb_entropy() const noexcept;
  double mean_rgb_smoothness() const noexcept;
};

StatsSummary summarize(const HistogramSet& hist);

struct CorpusSummary {
  std::vector<StatsSummary> per_image;
  StatsSummary mean;
  StatsSummary stddev;  // population standard deviation over images
  HistogramSet pooled;  // pixel-count weighted average of per-image histograms
  StatsSummary pooled_summary;
};

// Per-image work may run concurrently; results combine in index order.
CorpusSummary corpus_summary(std::span<const ImageBuffer> images,
                             unsigned threads = 0);

}  // namespace nqprobe
