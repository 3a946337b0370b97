#include "nqprobe/features.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "nqprobe/color_stats.hpp"
#include "nqprobe/error.hpp"

namespace nqprobe {

namespace {

constexpr int kAbsBins = 16;
constexpr int kGrid = 4;

}  // namespace

FeatureVector extract_color_features(const DifferenceMap& delta) {
  if (delta.empty() || delta.height == 0 || delta.width == 0) {
    throw InvalidInput("difference map is empty");
  }
  std::vector<double> f;
  f.reserve(kColorFeatureCount);

  std::array<double, 3> sum{};
  std::array<double, 3> abs_sum{};
  std::array<std::size_t, kAbsBins> abs_counts{};
  const std::size_t n = delta.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = delta.data[i];
    sum[i % 3] += v;
    abs_sum[i % 3] += std::fabs(v);
    const auto bin = static_cast<int>(std::min(std::fabs(v), 15.5));
    ++abs_counts[bin];
  }
  const double per_channel = static_cast<double>(n / 3);
  std::array<double, 3> mean{};
  for (int c = 0; c < 3; ++c) mean[c] = sum[c] / per_channel;
  std::array<double, 3> m2{};
  std::array<double, 3> m3{};
  for (std::size_t i = 0; i < n; ++i) {
    const double d = delta.data[i] - mean[i % 3];
    m2[i % 3] += d * d;
    m3[i % 3] += d * d * d;
  }
  std::array<double, 3> stddev{};
  std::array<double, 3> skew{};
  for (int c = 0; c < 3; ++c) {
    stddev[c] = std::sqrt(m2[c] / per_channel);
    skew[c] = stddev[c] > 1e-12 ? (m3[c] / per_channel) / std::pow(stddev[c], 3) : 0.0;
  }
  for (int c = 0; c < 3; ++c) f.push_back(mean[c]);
  for (int c = 0; c < 3; ++c) f.push_back(stddev[c]);
  for (int c = 0; c < 3; ++c) f.push_back(abs_sum[c] / per_channel);
  for (int c = 0; c < 3; ++c) f.push_back(skew[c]);
  for (int b = 0; b < kAbsBins; ++b) {
    f.push_back(static_cast<double>(abs_counts[b]) / static_cast<double>(n));
  }

  std::array<double, kGrid * kGrid> blocks{};
  for (int by = 0; by < kGrid; ++by) {
    const std::size_t y0 = by * delta.height / kGrid;
    const std::size_t y1 = (by + 1) * delta.height / kGrid;
    for (int bx = 0; bx < kGrid; ++bx) {
      const std::size_t x0 = bx * delta.width / kGrid;
      const std::size_t x1 = (bx + 1) * delta.width / kGrid;
      double s = 0.0;
      std::size_t count = 0;
      for (std::size_t y = y0; y < y1; ++y) {
        for (std::size_t x = x0; x < x1; ++x) {
          for (int c = 0; c < 3; ++c) s += std::fabs(delta.at(y, x, c));
          count += 3;
        }
      }
      blocks[by * kGrid + bx] = count ? s / static_cast<double>(count) : 0.0;
    }
  }
  f.insert(f.end(), blocks.begin(), blocks.end());
  double bmean = 0.0;
  for (double b : blocks) bmean += b;
  bmean /= blocks.size();
  double bvar = 0.0;
  for (double b : blocks) bvar += (b - bmean) * (b - bmean);
  f.push_back(bmean);
  f.push_back(std::sqrt(bvar / blocks.size()));
  f.push_back(*std::max_element(blocks.begin(), blocks.end()));
  f.push_back(*std::min_element(blocks.begin(), blocks.end()));

  return {std::move(f), kColorSpecId};
}

FeatureVector extract_visual_features(const ImageBuffer& image) {
  if (image.empty()) throw InvalidInput("image has zero pixels");
  const HistogramSet hist = compute_histograms(image);
  const StatsSummary summary = summarize(hist);

  std::vector<double> f;
  f.reserve(kVisualFeatureCount);
  for (int c = 0; c < 3; ++c) f.push_back(summary.entropy_bits[c]);
  for (int c = 0; c < 3; ++c) f.push_back(summary.smoothness_penalty[c]);
  f.push_back(summary.entropy_bits[3]);
  f.push_back(summary.smoothness_penalty[3]);
  f.push_back(hist.hue_excluded_fraction);
  for (int c = 0; c < 3; ++c) {
    const auto occupied = std::count_if(hist.rgb[c].begin(), hist.rgb[c].end(),
                                        [](double p) { return p > 0.0; });
    f.push_back(static_cast<double>(occupied) / kRgbBins);
  }
  f.push_back(*std::max_element(hist.hue.begin(), hist.hue.end()));

  const auto levels = image.floored_levels();
  const std::size_t pixels = image.pixel_count();
  double saturation = 0.0;
  std::array<double, 3> sum{};
  std::array<double, 3> sum_sq{};
  for (std::size_t p = 0; p < pixels; ++p) {
    const int r = levels[3 * p];
    const int g = levels[3 * p + 1];
    const int b = levels[3 * p + 2];
    saturation += rgb_to_hsv(r, g, b).saturation;
    const std::array<int, 3> rgb{r, g, b};
    for (int c = 0; c < 3; ++c) {
      sum[c] += rgb[c];
      sum_sq[c] += static_cast<double>(rgb[c]) * rgb[c];
    }
  }
  const double np = static_cast<double>(pixels);
  f.push_back(saturation / np);
  f.insert(f.end(), hist.hue.begin(), hist.hue.end());
  std::array<double, 3> mean{};
  for (int c = 0; c < 3; ++c) {
    mean[c] = sum[c] / np;
    f.push_back(mean[c]);
  }
  for (int c = 0; c < 3; ++c) {
    f.push_back(std::sqrt(std::max(sum_sq[c] / np - mean[c] * mean[c], 0.0)));
  }
  return {std::move(f), kVisualSpecId};
}

std::size_t registered_length(const std::string& spec_id) {
  if (spec_id == kVisualSpecId) return kVisualFeatureCount;
  if (spec_id == kColorSpecId) return kColorFeatureCount;
  if (spec_id == std::string(kVisualSpecId) + "+" + kColorSpecId) {
    return kVisualFeatureCount + kColorFeatureCount;
  }
  return 0;
}

FeatureVector fuse(const FeatureVector& visual, const FeatureVector& color) {
  for (const FeatureVector* fv : {&visual, &color}) {
    const std::size_t expected = registered_length(fv->spec_id);
    if (!fv->empty() && expected != 0 && expected != fv->size()) {
      throw InvalidInput("feature vector '" + fv->spec_id + "' has length " +
                         std::to_string(fv->size()) + ", expected " +
                         std::to_string(expected));
    }
  }
  if (color.empty()) return visual;
  if (visual.empty()) return color;
  if (visual.spec_id == kColorSpecId || color.spec_id == kVisualSpecId) {
    throw InvalidInput("fuse expects visual features first, then color features");
  }
  FeatureVector out;
  out.values.reserve(visual.size() + color.size());
  out.values = visual.values;
  out.values.insert(out.values.end(), color.values.begin(), color.values.end());
  out.spec_id = visual.spec_id + "+" + color.spec_id;
  return out;
}

}  // namespace nqprobe
