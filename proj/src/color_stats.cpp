#include "nqprobe/color_stats.hpp"

#include <algorithm>
#include <cmath>

#include "nqprobe/error.hpp"
#include "nqprobe/parallel.hpp"

namespace nqprobe {

std::array<std::vector<double>, 3> rgb_histograms(const ImageBuffer& image) {
  if (image.empty()) throw InvalidInput("image has zero pixels");
  std::array<std::vector<std::size_t>, 3> counts;
  for (auto& c : counts) c.assign(kRgbBins, 0);
  const auto levels = image.floored_levels();
  for (std::size_t i = 0; i < levels.size(); ++i) ++counts[i % 3][levels[i]];
  const double n = static_cast<double>(image.pixel_count());
  std::array<std::vector<double>, 3> out;
  for (int c = 0; c < 3; ++c) {
    out[c].resize(kRgbBins);
    for (int b = 0; b < kRgbBins; ++b) out[c][b] = static_cast<double>(counts[c][b]) / n;
  }
  return out;
}

Hsv rgb_to_hsv(int r, int g, int b) noexcept {
  const int mx = std::max({r, g, b});
  const int mn = std::min({r, g, b});
  const double chroma = mx - mn;
  Hsv hsv;
  hsv.value = mx / 255.0;
  hsv.saturation = mx == 0 ? 0.0 : chroma / mx;
  if (chroma == 0.0) return hsv;
  double h = 0.0;
  if (mx == r) {
    h = std::fmod((g - b) / chroma, 6.0);
  } else if (mx == g) {
    h = (b - r) / chroma + 2.0;
  } else {
    h = (r - g) / chroma + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  if (h >= 360.0) h -= 360.0;
  hsv.hue_degrees = h;
  return hsv;
}

HueHistogram hue_histogram(const ImageBuffer& image, double saturation_floor) {
  if (image.empty()) throw InvalidInput("image has zero pixels");
  const auto levels = image.floored_levels();
  std::vector<std::size_t> counts(kHueBins, 0);
  std::size_t kept = 0;
  for (std::size_t p = 0; p < image.pixel_count(); ++p) {
    const Hsv hsv = rgb_to_hsv(levels[3 * p], levels[3 * p + 1], levels[3 * p + 2]);
    if (hsv.saturation < saturation_floor) continue;
    auto bin = static_cast<int>(hsv.hue_degrees / 360.0 * kHueBins);
    ++counts[std::clamp(bin, 0, kHueBins - 1)];
    ++kept;
  }
  HueHistogram out;
  out.bins.assign(kHueBins, 0.0);
  const double n = static_cast<double>(image.pixel_count());
  out.excluded_fraction = static_cast<double>(image.pixel_count() - kept) / n;
  if (kept > 0) {
    for (int b = 0; b < kHueBins; ++b) {
      out.bins[b] = static_cast<double>(counts[b]) / static_cast<double>(kept);
    }
  }
  return out;
}

HistogramSet compute_histograms(const ImageBuffer& image, double saturation_floor) {
  HistogramSet set;
  set.rgb = rgb_histograms(image);
  auto hue = hue_histogram(image, saturation_floor);
  set.hue = std::move(hue.bins);
  set.hue_excluded_fraction = hue.excluded_fraction;
  set.pixel_count = image.pixel_count();
  return set;
}

double histogram_entropy(std::span<const double> hist) {
  double h = 0.0;
  for (double p : hist) {
    if (p < 0.0) throw InvalidInput("histogram mass must be nonnegative");
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h == 0.0 ? 0.0 : h;  // normalize -0
}

double smoothness_penalty(std::span<const double> hist) {
  if (hist.size() < 2) throw InvalidInput("smoothness needs at least two bins");
  double s = 0.0;
  for (std::size_t i = 1; i < hist.size(); ++i) {
    const double d = hist[i] - hist[i - 1];
    s += d * d;
  }
  return std::sqrt(s);
}

double StatsSummary::mean_rgb_entropy() const noexcept {
  return (entropy_bits[0] + entropy_bits[1] + entropy_bits[2]) / 3.0;
}

double StatsSummary::mean_rgb_smoothness() const noexcept {
  return (smoothness_penalty[0] + smoothness_penalty[1] + smoothness_penalty[2]) / 3.0;
}

StatsSummary summarize(const HistogramSet& hist) {
  StatsSummary s;
  for (int c = 0; c < 3; ++c) {
    s.entropy_bits[c] = histogram_entropy(hist.rgb[c]);
    s.smoothness_penalty[c] = smoothness_penalty(hist.rgb[c]);
  }
  s.entropy_bits[3] = histogram_entropy(hist.hue);
  s.smoothness_penalty[3] = smoothness_penalty(hist.hue);
  return s;
}

CorpusSummary corpus_summary(std::span<const ImageBuffer> images, unsigned threads) {
  if (images.empty()) throw InvalidInput("corpus is empty");
  std::vector<HistogramSet> hists(images.size());
  parallel_for(images.size(), threads,
               [&](std::size_t i) { hists[i] = compute_histograms(images[i]); });

  CorpusSummary out;
  out.per_image.reserve(images.size());
  for (const auto& h : hists) out.per_image.push_back(summarize(h));

  // Moments are taken about the first image's value, so a corpus of identical
  // images has a standard deviation of exactly zero.
  const double n = static_cast<double>(images.size());
  const StatsSummary& pivot = out.per_image.front();
  for (int k = 0; k < 4; ++k) {
    double se = 0.0, se2 = 0.0, ss = 0.0, ss2 = 0.0;
    for (const auto& s : out.per_image) {
      const double de = s.entropy_bits[k] - pivot.entropy_bits[k];
      const double ds = s.smoothness_penalty[k] - pivot.smoothness_penalty[k];
      se += de;
      se2 += de * de;
      ss += ds;
      ss2 += ds * ds;
    }
    out.mean.entropy_bits[k] = pivot.entropy_bits[k] + se / n;
    out.mean.smoothness_penalty[k] = pivot.smoothness_penalty[k] + ss / n;
    out.stddev.entropy_bits[k] = std::sqrt(std::max(0.0, se2 / n - (se / n) * (se / n)));
    out.stddev.smoothness_penalty[k] = std::sqrt(std::max(0.0, ss2 / n - (ss / n) * (ss / n)));
  }

  // Pool integer counts recovered from each normalized histogram so N copies
  // of one image reproduce its histogram exactly.
  HistogramSet& pooled = out.pooled;
  for (auto& c : pooled.rgb) c.assign(kRgbBins, 0.0);
  pooled.hue.assign(kHueBins, 0.0);
  double total_px = 0.0;
  double total_hue = 0.0;
  for (const auto& h : hists) {
    const double px = static_cast<double>(h.pixel_count);
    const double kept = std::round(px * (1.0 - h.hue_excluded_fraction));
    for (int c = 0; c < 3; ++c) {
      for (int b = 0; b < kRgbBins; ++b) pooled.rgb[c][b] += std::round(px * h.rgb[c][b]);
    }
    for (int b = 0; b < kHueBins; ++b) pooled.hue[b] += std::round(kept * h.hue[b]);
    total_px += px;
    total_hue += kept;
  }
  for (auto& c : pooled.rgb) {
    for (double& v : c) v /= total_px;
  }
  if (total_hue > 0.0) {
    for (double& v : pooled.hue) v /= total_hue;
  }
  pooled.pixel_count = static_cast<std::size_t>(total_px);
  pooled.hue_excluded_fraction = (total_px - total_hue) / total_px;
  out.pooled_summary = summarize(pooled);
  return out;
}

}  // namespace nqprobe
