#include "nqprobe/bias_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "nqprobe/error.hpp"
#include "nqprobe/probe.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {

namespace {

void require_sigma(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidInput("sigma must be a positive finite number");
  }
}

double frac(double v) noexcept {
  const double f = v - std::floor(v);
  return f >= 1.0 ? 0.0 : f;
}

}  // namespace

double normal_cdf(double z) noexcept {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

double exact_bias_unclipped(double x, double sigma_levels) {
  require_sigma(sigma_levels);
  const double reach = std::ceil(10.0 * sigma_levels) + 2.0;
  const auto lo = static_cast<long long>(std::floor(x - reach));
  const auto hi = static_cast<long long>(std::ceil(x + reach));
  double sum = 0.0;
  for (long long y = lo; y <= hi; ++y) {
    const double d = static_cast<double>(y) - x;
    if (std::fabs(d) > reach) continue;
    // P(Y = y) = Phi((d + 0.5)/s) - Phi((d - 0.5)/s), written with erfc on the
    // side that keeps significant digits in the tails.
    double p = 0.0;
    if (d >= 0.0) {
      p = 0.5 * (std::erfc((d - 0.5) / (sigma_levels * std::numbers::sqrt2)) -
                 std::erfc((d + 0.5) / (sigma_levels * std::numbers::sqrt2)));
    } else {
      p = 0.5 * (std::erfc(-(d + 0.5) / (sigma_levels * std::numbers::sqrt2)) -
                 std::erfc(-(d - 0.5) / (sigma_levels * std::numbers::sqrt2)));
    }
    sum += d * p;
  }
  return sum;
}

double first_harmonic_amplitude(double sigma_levels) noexcept {
  const double pi = std::numbers::pi;
  return std::exp(-2.0 * pi * pi * sigma_levels * sigma_levels) / pi;
}

namespace {

double fourier_envelope(int m, double sigma_levels) noexcept {
  const double pi = std::numbers::pi;
  const double mm = static_cast<double>(m);
  return std::exp(-2.0 * pi * pi * sigma_levels * sigma_levels * mm * mm) / (mm * pi);
}

}  // namespace

double fourier_bias(double x, double sigma_levels, int order) {
  require_sigma(sigma_levels);
  if (order < 1) throw InvalidInput("Fourier order must be at least 1");
  double sum = 0.0;
  for (int m = 1; m <= order; ++m) {
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    sum += sign * fourier_envelope(m, sigma_levels) *
           std::sin(2.0 * std::numbers::pi * m * x);
  }
  return sum;
}

int adaptive_fourier_order(double sigma_levels, int order) {
  require_sigma(sigma_levels);
  if (order < 1) throw InvalidInput("Fourier order must be at least 1");
  int m = order;
  while (fourier_envelope(m, sigma_levels) > 1e-12 && m < kMaxFourierOrder) ++m;
  return m;
}

double exact_bias_clipped(double x, double sigma_levels, int levels) {
  require_sigma(sigma_levels);
  if (levels < 2) throw InvalidInput("need at least two levels");
  if (!(x >= 0.0 && x < static_cast<double>(levels))) {
    throw InvalidInput("level value outside [0, L): " + std::to_string(x));
  }
  const double top = static_cast<double>(levels - 1);
  const double s = sigma_levels;
  // Interior bins y = 1..L-2 plus absorbing end bins.
  double expected = top * (1.0 - normal_cdf((top - 0.5 - x) / s));
  for (int y = 1; y < levels - 1; ++y) {
    const double yd = static_cast<double>(y);
    const double d = yd - x;
    if (std::fabs(d) > 10.0 * s + 2.0) continue;
    double p = 0.0;
    if (d >= 0.0) {
      p = 0.5 * (std::erfc((d - 0.5) / (s * std::numbers::sqrt2)) -
                 std::erfc((d + 0.5) / (s * std::numbers::sqrt2)));
    } else {
      p = 0.5 * (std::erfc(-(d + 0.5) / (s * std::numbers::sqrt2)) -
                 std::erfc(-(d - 0.5) / (s * std::numbers::sqrt2)));
    }
    expected += yd * p;
  }
  return expected - x;
}

MonteCarloEstimate monte_carlo_bias(double x, double sigma_levels,
                                    std::size_t samples, std::uint64_t seed,
                                    bool clip) {
  require_sigma(sigma_levels);
  if (samples < 1000) throw InvalidInput("Monte-Carlo needs at least 1000 samples");
  std::mt19937_64 engine(seed);
  std::normal_distribution<double> normal(0.0, sigma_levels);
  // Welford running mean and variance.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    double y = std::round(x + normal(engine));
    if (clip) y = std::clamp(y, 0.0, static_cast<double>(kLevels - 1));
    const double b = y - x;
    const double delta = b - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (b - mean);
  }
  const double n = static_cast<double>(samples);
  const double variance = std::max(m2 / (n - 1.0), (n - 1.0) / (n * n));
  return {mean, std::sqrt(variance / n)};
}

void DistributionSpec::validate() const {
  if (values.size() != mass.size() || values.empty()) {
    throw InvalidInput("distribution needs matching, non-empty values and mass");
  }
  double total = 0.0;
  for (double m : mass) {
    if (!(m >= 0.0)) throw InvalidInput("distribution mass must be nonnegative");
    total += m;
  }
  if (std::fabs(total - 1.0) > 1e-12) {
    throw InvalidInput("distribution mass must sum to 1");
  }
}

DistributionSpec DistributionSpec::uniform_fractional(int per_level, int levels) {
  if (per_level < 1 || levels < 1) throw InvalidInput("bad uniform partition");
  DistributionSpec d;
  const std::size_t n = static_cast<std::size_t>(per_level) * levels;
  d.values.reserve(n);
  for (int v = 0; v < levels; ++v) {
    for (int k = 0; k < per_level; ++k) {
      d.values.push_back(v + static_cast<double>(k) / per_level);
    }
  }
  d.mass.assign(n, 1.0 / static_cast<double>(n));
  return d;
}

DistributionSpec DistributionSpec::point_mass(double value) {
  return {{value}, {1.0}};
}

DistributionSpec DistributionSpec::from_histogram(const std::vector<double>& hist) {
  const double total = std::accumulate(hist.begin(), hist.end(), 0.0);
  if (!(total > 0.0)) throw InvalidInput("histogram has no mass");
  DistributionSpec d;
  for (std::size_t i = 0; i < hist.size(); ++i) {
    if (hist[i] < 0.0) throw InvalidInput("histogram mass must be nonnegative");
    d.values.push_back(static_cast<double>(i));
    d.mass.push_back(hist[i] / total);
  }
  return d;
}

double predicted_delta_mean(const DistributionSpec& dist, double sigma_levels,
                            bool clip) {
  dist.validate();
  require_sigma(sigma_levels);
  double sum = 0.0;
  for (std::size_t i = 0; i < dist.values.size(); ++i) {
    if (dist.mass[i] == 0.0) continue;
    const double v = dist.values[i];
    const double b = clip ? exact_bias_clipped(v, sigma_levels)
                          : exact_bias_unclipped(frac(v), sigma_levels);
    sum += dist.mass[i] * b;
  }
  return -sum;
}

double nonuniformity_score(const DistributionSpec& dist, double sigma_levels) {
  dist.validate();
  require_sigma(sigma_levels);
  double s = 0.0;
  for (std::size_t i = 0; i < dist.values.size(); ++i) {
    s += dist.mass[i] * std::sin(2.0 * std::numbers::pi * frac(dist.values[i]));
  }
  return std::fabs(first_harmonic_amplitude(sigma_levels) * s);
}

BiasProfile compute_bias_profile(double sigma_levels, int points, int order,
                                 std::size_t mc_samples, std::uint64_t seed) {
  require_sigma(sigma_levels);
  if (points < 1) throw InvalidInput("grid must have at least one point");
  BiasProfile p;
  p.sigma_levels = sigma_levels;
  p.fourier_order = adaptive_fourier_order(sigma_levels, order);
  if (mc_samples > 0) p.monte_carlo.emplace();
  for (int i = 0; i < points; ++i) {
    const double x = static_cast<double>(i) / points;
    p.x_grid.push_back(x);
    p.exact.push_back(exact_bias_unclipped(x, sigma_levels));
    p.fourier.push_back(fourier_bias(x, sigma_levels, p.fourier_order));
    if (mc_samples > 0) {
      p.monte_carlo->push_back(monte_carlo_bias(
          x, sigma_levels, mc_samples, derive_seed(seed, static_cast<std::uint64_t>(i)),
          false));
    }
  }
  return p;
}

double bias_period_integral(double sigma_levels, int points) {
  if (points < 2) throw InvalidInput("quadrature needs at least two nodes");
  double sum = 0.0;
  for (int i = 0; i < points; ++i) {
    sum += exact_bias_unclipped(static_cast<double>(i) / points, sigma_levels);
  }
  return sum / points;
}

}  // namespace nqprobe
