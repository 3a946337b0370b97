#include "nqprobe/synthetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <vector>

#include "nqprobe/error.hpp"
#include "nqprobe/parallel.hpp"
#include "nqprobe/probe.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {

void SynthSpec::validate() const {
  if (width < 8 || height < 8) throw InvalidInput("synthetic images need at least 8x8 pixels");
  switch (kind) {
    case SynthKind::kSmooth:
      if (smooth.knots < 2) throw InvalidInput("smooth fields need at least 2 knots");
      if (smooth.blur_radius < 0 || smooth.grain_sigma < 0.0) {
        throw InvalidInput("blur radius and grain must be nonnegative");
      }
      break;
    case SynthKind::kPeaked:
      if (peaked.palette_size < 2) throw InvalidInput("palette size K must be at least 2");
      if (peaked.concentration < 0.0 || peaked.concentration >= 1.0) {
        throw InvalidInput("concentration must lie in [0,1)");
      }
      if (peaked.jitter_sigma < 0.0 || peaked.seeds_per_color < 1) {
        throw InvalidInput("bad jitter or seed count");
      }
      break;
    case SynthKind::kFractionalConstant:
    case SynthKind::kFractionalSine:
      if (!(fractional.offset >= 0.0 && fractional.offset < 1.0)) {
        throw InvalidInput("fractional offset must lie in [0,1)");
      }
      if (fractional.base_level + 1.0 < 1.0 || fractional.base_level + 1.0 > 254.0) {
        throw InvalidInput("base_level + 1 must stay in [1,254]");
      }
      if (fractional.period < 0.0) throw InvalidInput("period must be nonnegative");
      break;
  }
}

namespace {

// Uniform Catmull-Rom weights for local coordinate t in [0,1).
std::array<double, 4> catmull_rom(double t) {
  const double t2 = t * t;
  const double t3 = t2 * t;
  return {0.5 * (-t3 + 2 * t2 - t), 0.5 * (3 * t3 - 5 * t2 + 2),
          0.5 * (-3 * t3 + 4 * t2 + t), 0.5 * (t3 - t2)};
}

// Spline surface through a (knots+2)^2 grid of random control values, so the
// interior spans `knots` cells across the image.
std::vector<double> spline_field(std::size_t h, std::size_t w, int knots,
                                 Xoshiro256pp& rng) {
  const int g = knots + 3;
  std::vector<double> ctrl(static_cast<std::size_t>(g) * g);
  for (double& c : ctrl) c = rng.uniform();
  std::vector<double> field(h * w);
  for (std::size_t y = 0; y < h; ++y) {
    const double fy = (static_cast<double>(y) + 0.5) / h * knots;
    const int iy = static_cast<int>(fy);
    const auto wy = catmull_rom(fy - iy);
    for (std::size_t x = 0; x < w; ++x) {
      const double fx = (static_cast<double>(x) + 0.5) / w * knots;
      const int ix = static_cast<int>(fx);
      const auto wx = catmull_rom(fx - ix);
      double v = 0.0;
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          v += wy[a] * wx[b] * ctrl[static_cast<std::size_t>(iy + a) * g + (ix + b)];
        }
      }
      field[y * w + x] = v;
    }
  }
  return field;
}

void box_blur(std::vector<double>& f, std::size_t h, std::size_t w, int radius) {
  if (radius <= 0) return;
  std::vector<double> tmp(f.size());
  const auto r = static_cast<std::ptrdiff_t>(radius);
  auto pass = [&](const std::vector<double>& src, std::vector<double>& dst, bool rows) {
    const std::size_t outer = rows ? h : w;
    const std::size_t inner = rows ? w : h;
    for (std::size_t o = 0; o < outer; ++o) {
      for (std::size_t i = 0; i < inner; ++i) {
        double s = 0.0;
        int n = 0;
        for (std::ptrdiff_t k = -r; k <= r; ++k) {
          const std::ptrdiff_t j = static_cast<std::ptrdiff_t>(i) + k;
          if (j < 0 || j >= static_cast<std::ptrdiff_t>(inner)) continue;
          s += rows ? src[o * w + j] : src[j * w + o];
          ++n;
        }
        (rows ? dst[o * w + i] : dst[i * w + o]) = s / n;
      }
    }
  };
  pass(f, tmp, true);
  pass(tmp, f, false);
}

std::uint8_t to_level(double v) {
  return static_cast<std::uint8_t>(std::clamp(round_half_away(v), 0.0, 255.0));
}

}  // namespace

ImageBuffer gen_smooth(const SynthSpec& spec) {
  if (spec.kind != SynthKind::kSmooth) throw InvalidInput("gen_smooth needs kind=smooth");
  spec.validate();
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  Xoshiro256pp rng(spec.seed);
  const ZigguratNormal normal;
  std::vector<std::uint8_t> data(h * w * 3);
  for (int c = 0; c < 3; ++c) {
    auto field = spline_field(h, w, spec.smooth.knots, rng);
    auto lo = *std::min_element(field.begin(), field.end());
    auto hi = *std::max_element(field.begin(), field.end());
    const double span = std::max(hi - lo, 1e-12);
    std::vector<double> grain(h * w);
    for (double& g : grain) g = normal(rng);
    box_blur(grain, h, w, spec.smooth.blur_radius);
    for (std::size_t i = 0; i < field.size(); ++i) {
      field[i] = (field[i] - lo) / span * 255.0 + spec.smooth.grain_sigma * grain[i];
    }
    lo = *std::min_element(field.begin(), field.end());
    hi = *std::max_element(field.begin(), field.end());
    const double scale = 255.0 / std::max(hi - lo, 1e-12);
    for (std::size_t i = 0; i < field.size(); ++i) {
      data[3 * i + c] = to_level((field[i] - lo) * scale);
    }
  }
  return ImageBuffer::from_levels(h, w, std::move(data));
}

ImageBuffer gen_peaked(const SynthSpec& spec) {
  if (spec.kind != SynthKind::kPeaked) throw InvalidInput("gen_peaked needs kind=peaked");
  spec.validate();
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  const auto& p = spec.peaked;
  Xoshiro256pp rng(spec.seed);
  const ZigguratNormal normal;

  // Palette: colors scattered around a random center, spread shrinking with
  // concentration. Levels are kept distinct per channel.
  const std::size_t k = static_cast<std::size_t>(p.palette_size);
  std::vector<std::array<int, 3>> palette(k);
  const double spread = 255.0 * (1.0 - p.concentration);
  for (int c = 0; c < 3; ++c) {
    const double center = spread / 2.0 + rng.uniform() * (255.0 - spread);
    std::vector<int> used;
    for (std::size_t i = 0; i < k; ++i) {
      int level = 0;
      int attempts = 0;
      do {
        level = static_cast<int>(std::clamp(
            std::floor(center + (rng.uniform() - 0.5) * spread + 0.5), 0.0, 255.0));
      } while (std::find(used.begin(), used.end(), level) != used.end() && used.size() < 256 &&
               ++attempts < 1000);
      used.push_back(level);
      palette[i][c] = level;
    }
  }

  // Seeded region growth: random frontier expansion from several seeds per
  // palette entry.
  constexpr int kUnset = -1;
  std::vector<int> owner(h * w, kUnset);
  std::vector<std::size_t> frontier;
  const std::size_t seeds = k * static_cast<std::size_t>(p.seeds_per_color);
  for (std::size_t s = 0; s < seeds; ++s) {
    std::size_t pos = 0;
    do {
      pos = static_cast<std::size_t>(rng.uniform() * static_cast<double>(h * w));
    } while (owner[pos] != kUnset);
    owner[pos] = static_cast<int>(s % k);
    frontier.push_back(pos);
  }
  while (!frontier.empty()) {
    const auto pick = static_cast<std::size_t>(rng.uniform() * static_cast<double>(frontier.size()));
    const std::size_t pos = frontier[pick];
    frontier[pick] = frontier.back();
    frontier.pop_back();
    const std::size_t y = pos / w;
    const std::size_t x = pos % w;
    const std::array<std::pair<std::size_t, bool>, 4> nbrs{{
        {pos - w, y > 0}, {pos + w, y + 1 < h}, {pos - 1, x > 0}, {pos + 1, x + 1 < w}}};
    for (const auto& [q, ok] : nbrs) {
      if (ok && owner[q] == kUnset) {
        owner[q] = owner[pos];
        frontier.push_back(q);
      }
    }
  }

  std::vector<std::uint8_t> data(h * w * 3);
  for (std::size_t i = 0; i < h * w; ++i) {
    const auto& color = palette[static_cast<std::size_t>(owner[i])];
    for (int c = 0; c < 3; ++c) {
      const double jitter = p.jitter_sigma > 0.0 ? p.jitter_sigma * normal(rng) : 0.0;
      data[3 * i + c] = to_level(color[c] + jitter);
    }
  }
  return ImageBuffer::from_levels(h, w, std::move(data));
}

ImageBuffer gen_fractional(const SynthSpec& spec) {
  if (spec.kind != SynthKind::kFractionalConstant && spec.kind != SynthKind::kFractionalSine) {
    throw InvalidInput("gen_fractional needs a fractional kind");
  }
  spec.validate();
  const std::size_t h = spec.height;
  const std::size_t w = spec.width;
  const auto& f = spec.fractional;
  if (spec.kind == SynthKind::kFractionalConstant) {
    return ImageBuffer::constant_fractional(h, w, f.base_level + f.offset);
  }
  const double period = f.period > 0.0 ? f.period : static_cast<double>(w);
  std::vector<double> data(h * w * 3);
  for (std::size_t x = 0; x < w; ++x) {
    const double v =
        f.base_level + 0.5 + 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(x) / period);
    for (std::size_t y = 0; y < h; ++y) {
      for (int c = 0; c < 3; ++c) data[(y * w + x) * 3 + c] = v;
    }
  }
  return ImageBuffer::from_fractional(h, w, std::move(data));
}

ImageBuffer generate(const SynthSpec& spec) {
  switch (spec.kind) {
    case SynthKind::kSmooth:
      return gen_smooth(spec);
    case SynthKind::kPeaked:
      return gen_peaked(spec);
    case SynthKind::kFractionalConstant:
    case SynthKind::kFractionalSine:
      return gen_fractional(spec);
  }
  throw InvalidInput("unknown synthetic kind");
}

LabeledDataset gen_dataset(std::size_t count_per_class, const SynthSpec& real_template,
                           const SynthSpec& fake_template, std::uint64_t seed,
                           unsigned threads) {
  if (count_per_class < 1) throw InvalidInput("count per class must be at least 1");
  real_template.validate();
  fake_template.validate();
  LabeledDataset ds;
  ds.items.resize(2 * count_per_class);
  const std::uint64_t real_root = derive_seed(seed, 0);
  const std::uint64_t fake_root = derive_seed(seed, 1);
  parallel_for(ds.items.size(), threads, [&](std::size_t i) {
    const bool fake = i >= count_per_class;
    const std::size_t j = fake ? i - count_per_class : i;
    SynthSpec spec = fake ? fake_template : real_template;
    spec.seed = derive_seed(fake ? fake_root : real_root, j);
    ds.items[i] = {generate(spec), fake ? Label::kFake : Label::kReal,
                   fake ? "peaked" : "smooth"};
  });
  return ds;
}

}  // namespace nqprobe
