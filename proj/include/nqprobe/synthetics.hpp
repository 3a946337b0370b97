#pragma once

// Seeded synthetic corpora with controlled color distributions: broad
// "smooth" palettes labeled real, peaked low-entropy palettes labeled fake,
// and fractional-intensity fields for checking the bias theory directly.

#include <cstddef>
#include <cstdint>

#include "nqprobe/dataset.hpp"
#include "nqprobe/image.hpp"

namespace nqprobe {

enum class SynthKind { kSmooth, kPeaked, kFractionalConstant, kFractionalSine };

struct SmoothParams {
  int knots = 6;            // spline control points per axis
  int blur_radius = 1;      // box radius applied to the grain noise
  double grain_sigma = 3.0; // grain amplitude in levels before the stretch
};

struct PeakedParams {
  int palette_size = 6;       // K
  double concentration = 0.6; // 0: palette spans the cube, ->1: clustered
  double jitter_sigma = 2.0;  // per-channel Gaussian jitter, levels
  int seeds_per_color = 3;    // region-growth seeds per palette entry
};

struct FractionalParams {
  double base_level = 100.0;
  double offset = 0.25;  // fractional_constant
  double period = 0.0;   // fractional_sine, columns; 0 means the image width
};

struct SynthSpec {
  SynthKind kind = SynthKind::kSmooth;
  std::size_t width = 128;
  std::size_t height = 128;
  std::uint64_t seed = 0;
  SmoothParams smooth;
  PeakedParams peaked;
  FractionalParams fractional;

  // Throws InvalidInput on dimensions < 8, K < 2, offset outside [0,1), or a
  // base level that would reach a clipping boundary.
  void validate() const;
};

ImageBuffer gen_smooth(const SynthSpec& spec);
ImageBuffer gen_peaked(const SynthSpec& spec);
ImageBuffer gen_fractional(const SynthSpec& spec);
ImageBuffer generate(const SynthSpec& spec);

// `count_per_class` smooth items (real) followed by the same number of peaked
// items (fake). Item seeds are pre-derived from `seed`, so the output does not
// depend on the thread count.
LabeledDataset gen_dataset(std::size_t count_per_class, const SynthSpec& real_template,
                           const SynthSpec& fake_template, std::uint64_t seed,
                           unsigned threads = 0);

}  // namespace nqprobe
