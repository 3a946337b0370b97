#include "nqprobe/features.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "nqprobe/error.hpp"
#include "nqprobe/rng.hpp"
#include "nqprobe/synthetics.hpp"

namespace nqprobe {
namespace {

DifferenceMap constant_map(std::size_t h, std::size_t w, double v) {
  return {h, w, std::vector<double>(h * w * 3, v), {}};
}

TEST(ColorFeatures, LengthAndSpec) {
  const auto f = extract_color_features(constant_map(8, 8, 0.0));
  EXPECT_EQ(f.size(), kColorFeatureCount);
  EXPECT_EQ(f.spec_id, kColorSpecId);
  EXPECT_THROW(extract_color_features(DifferenceMap{}), InvalidInput);
}

TEST(ColorFeatures, ZeroMap) {
  const auto f = extract_color_features(constant_map(8, 8, 0.0)).values;
  for (int i = 0; i < 12; ++i) EXPECT_EQ(f[i], 0.0) << i;
  EXPECT_EQ(f[12], 1.0);
  for (int i = 13; i < 28; ++i) EXPECT_EQ(f[i], 0.0);
  for (int i = 28; i < 48; ++i) EXPECT_EQ(f[i], 0.0);
}

TEST(ColorFeatures, ConstantTwo) {
  const auto f = extract_color_features(constant_map(12, 10, 2.0)).values;
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(f[c], 2.0);
    EXPECT_EQ(f[3 + c], 0.0);
    EXPECT_EQ(f[6 + c], 2.0);
    EXPECT_EQ(f[9 + c], 0.0);
  }
  EXPECT_EQ(f[12 + 2], 1.0);
  EXPECT_EQ(f[44], 2.0);
  EXPECT_EQ(f[45], 0.0);
  EXPECT_EQ(f[46], 2.0);
  EXPECT_EQ(f[47], 2.0);
}

TEST(ColorFeatures, BlockLayoutIsRowMajor) {
  DifferenceMap d = constant_map(8, 8, 0.0);
  // Top-right 2x2 block (rows 0-1, cols 6-7) set to -4 in every channel.
  for (std::size_t y = 0; y < 2; ++y) {
    for (std::size_t x = 6; x < 8; ++x) {
      for (int c = 0; c < 3; ++c) d.data[(y * 8 + x) * 3 + c] = -4.0;
    }
  }
  const auto f = extract_color_features(d).values;
  EXPECT_EQ(f[28 + 3], 4.0);
  EXPECT_EQ(f[28 + 0], 0.0);
  EXPECT_EQ(f[46], 4.0);
  EXPECT_EQ(f[47], 0.0);
  EXPECT_DOUBLE_EQ(f[44], 0.25);
  // 12 of 192 values have |d| = 4; the rest are zero.
  EXPECT_DOUBLE_EQ(f[12 + 4], 12.0 / 192.0);
  EXPECT_DOUBLE_EQ(f[12], 180.0 / 192.0);
}

TEST(ColorFeatures, SkewSignAndLargeValueBin) {
  DifferenceMap d = constant_map(4, 4, 0.0);
  d.data[0] = 30.0;  // channel 0, right tail
  const auto f = extract_color_features(d).values;
  EXPECT_GT(f[9], 0.0);
  EXPECT_EQ(f[10], 0.0);
  EXPECT_DOUBLE_EQ(f[12 + 15], 1.0 / 48.0);
  // Skewness of a single spike among 16 values: (n - 2) / sqrt(n - 1).
  EXPECT_NEAR(f[9], 14.0 / std::sqrt(15.0), 1e-12);
}

TEST(ColorFeatures, SaturatedBlackExceedsMidGrayMeanAbs) {
  ProbeConfig c;
  const auto black = extract_color_features(
      run_probe(ImageBuffer::constant_levels(64, 64, 0), c, 0).delta);
  const auto gray = extract_color_features(
      run_probe(ImageBuffer::constant_levels(64, 64, 128), c, 0).delta);
  for (int ch = 0; ch < 3; ++ch) {
    EXPECT_GE(black.values[6 + ch] - gray.values[6 + ch], 5.0);
  }
}

TEST(VisualFeatures, LengthAndSpec) {
  const auto f = extract_visual_features(ImageBuffer::constant_levels(8, 8, 100));
  EXPECT_EQ(f.size(), kVisualFeatureCount);
  EXPECT_EQ(f.spec_id, kVisualSpecId);
  EXPECT_THROW(extract_visual_features(ImageBuffer{}), InvalidInput);
}

TEST(VisualFeatures, ConstantGray) {
  const auto f = extract_visual_features(ImageBuffer::constant_levels(8, 8, 100)).values;
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(f[c], 0.0);
    EXPECT_DOUBLE_EQ(f[3 + c], std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(f[9 + c], 1.0 / 256.0);
    EXPECT_EQ(f[78 + c], 100.0);
    EXPECT_EQ(f[81 + c], 0.0);
  }
  EXPECT_EQ(f[8], 1.0);
  EXPECT_EQ(f[12], 0.0);
  EXPECT_EQ(f[13], 0.0);
}

TEST(VisualFeatures, UniformHistograms) {
  std::vector<std::uint8_t> data;
  for (int i = 0; i < 256; ++i) {
    data.push_back(static_cast<std::uint8_t>(i));
    data.push_back(static_cast<std::uint8_t>((i + 85) % 256));
    data.push_back(static_cast<std::uint8_t>((i + 170) % 256));
  }
  const auto f = extract_visual_features(ImageBuffer::from_levels(16, 16, data)).values;
  for (int c = 0; c < 3; ++c) {
    EXPECT_EQ(f[c], 8.0);
    EXPECT_EQ(f[3 + c], 0.0);
    EXPECT_EQ(f[9 + c], 1.0);
    EXPECT_DOUBLE_EQ(f[78 + c], 127.5);
  }
  const double hue_mass = std::accumulate(f.begin() + 14, f.begin() + 78, 0.0);
  EXPECT_NEAR(hue_mass, 1.0 - f[8], 1e-12);
}

TEST(VisualFeatures, PeakedBelowSmoothEntropy) {
  SynthSpec smooth;
  SynthSpec peaked;
  peaked.kind = SynthKind::kPeaked;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    smooth.seed = peaked.seed = seed;
    const auto fs = extract_visual_features(generate(smooth)).values;
    const auto fp = extract_visual_features(generate(peaked)).values;
    EXPECT_LT(fp[0] + fp[1] + fp[2], fs[0] + fs[1] + fs[2]) << seed;
  }
}

TEST(Features, DeterministicExtraction) {
  SynthSpec s;
  s.seed = 4;
  const auto img = generate(s);
  EXPECT_EQ(extract_visual_features(img), extract_visual_features(img));
  ProbeConfig c;
  c.replicas = 5;
  const auto d = run_probe(img, c, 2).delta;
  EXPECT_EQ(extract_color_features(d), extract_color_features(d));
  for (double v : extract_color_features(d).values) EXPECT_TRUE(std::isfinite(v));
}

TEST(Fuse, ConcatenatesVisualFirst) {
  const auto fv = extract_visual_features(ImageBuffer::constant_levels(8, 8, 3));
  const auto fc = extract_color_features(constant_map(8, 8, 1.5));
  const auto fused = fuse(fv, fc);
  ASSERT_EQ(fused.size(), 132u);
  EXPECT_EQ(fused.values[0], fv.values[0]);
  EXPECT_EQ(fused.values[84], fc.values[0]);
  EXPECT_EQ(fused.spec_id, "visual-v1+color-v1");
  EXPECT_EQ(registered_length(fused.spec_id), 132u);
}

TEST(Fuse, EmptySideIsIdentity) {
  const auto fv = extract_visual_features(ImageBuffer::constant_levels(8, 8, 3));
  const auto fc = extract_color_features(constant_map(8, 8, 1.5));
  EXPECT_EQ(fuse(fv, FeatureVector{}), fv);
  EXPECT_EQ(fuse(FeatureVector{}, fc), fc);
}

TEST(Fuse, RejectsMismatchedSpecs) {
  const auto fv = extract_visual_features(ImageBuffer::constant_levels(8, 8, 3));
  const auto fc = extract_color_features(constant_map(8, 8, 1.5));
  EXPECT_THROW(fuse(fc, fv), InvalidInput);
  FeatureVector truncated = fv;
  truncated.values.pop_back();
  EXPECT_THROW(fuse(truncated, fc), InvalidInput);
  EXPECT_EQ(registered_length("visual-v2"), 0u);
}

}  // namespace
}  // namespace nqprobe
