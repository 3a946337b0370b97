#pragma once

// Quantization-restoration bias B(x; sigma) = E[round(x + N)] - x for
// N ~ N(0, sigma^2), computed three independent ways, plus the clipped
// variant and distribution-level predictions of the probe's mean residual.
//
// Sign convention, checked against the sigma -> 0 sawtooth round(x) - x:
//   B(x; sigma) = sum_{m>=1} (-1)^m / (m pi) exp(-2 pi^2 sigma^2 m^2) sin(2 pi m x)
// so the first harmonic is -C(sigma) sin(2 pi x), C = exp(-2 pi^2 sigma^2) / pi.

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

namespace nqprobe {

inline constexpr int kLevels = 256;

// Standard normal CDF.
double normal_cdf(double z) noexcept;

// Exact sum over y of (y - x) P(Y = y | x), truncated to |y - x| <= ceil(10
// sigma) + 2. Accepts any real x (the bias is 1-periodic).
double exact_bias_unclipped(double x, double sigma_levels);

// Truncated series with exactly `order` harmonics.
double fourier_bias(double x, double sigma_levels, int order);

inline constexpr int kMaxFourierOrder = 1000000;

// Smallest M >= order whose harmonic envelope exp(-2 pi^2 sigma^2 M^2) / (M pi)
// is at most 1e-12 (capped at kMaxFourierOrder).
int adaptive_fourier_order(double sigma_levels, int order);

// C(sigma) = exp(-2 pi^2 sigma^2) / pi.
double first_harmonic_amplitude(double sigma_levels) noexcept;

// E[clip(round(x + N), 0, levels - 1)] - x, with the end bins absorbing the
// tails. x must lie in [0, levels).
double exact_bias_clipped(double x, double sigma_levels, int levels = kLevels);

struct MonteCarloEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
};

// Sample-mean bias over `samples` draws (>= 1000). Uses std::mt19937_64 and
// std::normal_distribution so it shares no sampling code with the probe.
//
// The reported standard error floors the sample variance at (n - 1) / n^2,
// the variance one unit outlier would produce. Y is integer valued, so a run
// that never sees a rare bin would otherwise report SE = 0.
MonteCarloEstimate monte_carlo_bias(double x, double sigma_levels,
                                    std::size_t samples, std::uint64_t seed,
                                    bool clip);

// Distribution over level values: point masses at `values` with weights
// `mass`, which must be nonnegative and sum to 1 (within 1e-12).
struct DistributionSpec {
  std::vector<double> values;
  std::vector<double> mass;

  void validate() const;

  // 256 levels, each split into `per_level` equally spaced fractional points.
  static DistributionSpec uniform_fractional(int per_level, int levels = kLevels);
  static DistributionSpec point_mass(double value);
  // Histogram over integer levels 0..255 (normalized internally).
  static DistributionSpec from_histogram(const std::vector<double>& hist);
};

// Theory prediction of the global mean Delta for i.i.d. pixels drawn from
// `dist`: -sum_v mass(v) B(v), clipped or unclipped.
double predicted_delta_mean(const DistributionSpec& dist, double sigma_levels,
                            bool clip);

// |C(sigma) sum_v mass(v) sin(2 pi frac(v))|.
double nonuniformity_score(const DistributionSpec& dist, double sigma_levels);

struct BiasProfile {
  double sigma_levels = 0.0;
  int fourier_order = 50;
  std::vector<double> x_grid;
  std::vector<double> exact;
  std::vector<double> fourier;
  std::optional<std::vector<MonteCarloEstimate>> monte_carlo;
};

// Grid x_i = i / points. The Fourier column uses
// adaptive_fourier_order(sigma, order) harmonics, recorded in fourier_order.
// A non-zero `mc_samples` fills the Monte-Carlo column,
// with seeds derived per grid point from `seed`.
BiasProfile compute_bias_profile(double sigma_levels, int points, int order,
                                 std::size_t mc_samples, std::uint64_t seed);

// Periodic trapezoidal rule with `points` nodes for the integral of
// exact_bias_unclipped over one period.
double bias_period_integral(double sigma_levels, int points = 4096);

}  // namespace nqprobe
