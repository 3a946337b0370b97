#pragma once

// Handcrafted stand-ins for the two feature branches: a visual branch over
// the image's color statistics and a color branch over the probe residual.

#include <cstddef>
#include <string>
#include <vector>

#include "nqprobe/image.hpp"
#include "nqprobe/probe.hpp"

namespace nqprobe {

inline constexpr const char* kVisualSpecId = "visual-v1";
inline constexpr const char* kColorSpecId = "color-v1";
inline constexpr std::size_t kVisualFeatureCount = 84;
inline constexpr std::size_t kColorFeatureCount = 48;

struct FeatureVector {
  std::vector<double> values;
  std::string spec_id;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
  bool operator==(const FeatureVector&) const = default;
};

// Layout (48):
//   [0,3) mean, [3,6) std, [6,9) mean |d|, [9,12) E[d^3]/std^3 per channel
//   [12,28) 16-bin |d| histogram over [0,16), last bin absorbs larger values
//   [28,44) 4x4 block means of |d| (channels averaged), row-major
//   [44,48) mean, std, max, min of those block means
FeatureVector extract_color_features(const DifferenceMap& delta);

// Layout (84):
//   [0,3) RGB entropy, [3,6) RGB smoothness, 6 hue entropy, 7 hue smoothness,
//   8 hue excluded fraction, [9,12) fraction of occupied RGB bins,
//   12 largest hue-bin mass, 13 mean HSV saturation,
//   [14,78) hue histogram, [78,81) channel mean, [81,84) channel std
FeatureVector extract_visual_features(const ImageBuffer& image);

// Visual features first. Either side may be empty, in which case the other is
// returned unchanged. Throws InvalidInput when the sides are swapped or a
// registered spec has the wrong length.
FeatureVector fuse(const FeatureVector& visual, const FeatureVector& color);

// Number of values a spec id stands for, or 0 if the id is unknown.
std::size_t registered_length(const std::string& spec_id);

}  // namespace nqprobe
