#include "nqprobe/verification.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nqprobe/bias_oracle.hpp"
#include "nqprobe/probe.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << v;
  return os.str();
}

}  // namespace

std::vector<CheckResult> verify_bias_oracles(std::size_t mc_samples, int grid_points,
                                             std::uint64_t seed) {
  std::vector<CheckResult> out;
  const double sigmas[] = {0.05, 0.10, 0.20, 0.50};

  for (std::size_t s = 0; s < std::size(sigmas); ++s) {
    const double sigma = sigmas[s];
    const auto profile = compute_bias_profile(sigma, grid_points, 50, mc_samples,
                                              derive_seed(seed, s));
    double worst_fourier = 0.0;
    double worst_z = 0.0;
    for (std::size_t i = 0; i < profile.x_grid.size(); ++i) {
      worst_fourier = std::max(worst_fourier, std::fabs(profile.exact[i] - profile.fourier[i]));
      const auto& mc = (*profile.monte_carlo)[i];
      worst_z = std::max(worst_z, std::fabs(mc.estimate - profile.exact[i]) / mc.standard_error);
    }
    out.push_back({"exact-vs-fourier sigma=" + fmt(sigma), worst_fourier < 1e-8,
                   "max |diff| " + fmt(worst_fourier) + " (< 1e-8)"});
    out.push_back({"exact-vs-montecarlo sigma=" + fmt(sigma), worst_z < 4.0,
                   "max |z| " + fmt(worst_z) + " (< 4)"});

    const double integral = bias_period_integral(sigma);
    out.push_back({"period-integral sigma=" + fmt(sigma), std::fabs(integral) < 1e-10,
                   "|integral| " + fmt(std::fabs(integral)) + " (< 1e-10)"});

    double worst_odd = 0.0;
    for (int i = 1; i < grid_points; ++i) {
      const double x = static_cast<double>(i) / grid_points;
      worst_odd = std::max(worst_odd, std::fabs(exact_bias_unclipped(x, sigma) +
                                                exact_bias_unclipped(1.0 - x, sigma)));
    }
    out.push_back({"odd-symmetry sigma=" + fmt(sigma), worst_odd < 1e-12,
                   "max |B(x)+B(1-x)| " + fmt(worst_odd) + " (< 1e-12)"});
  }

  double worst_saw = 0.0;
  for (double x : {0.1, 0.2, 0.25, 0.3, 0.4}) {
    worst_saw = std::max(worst_saw,
                         std::fabs(exact_bias_unclipped(x, 1e-4) - (round_half_away(x) - x)));
  }
  out.push_back({"sawtooth-limit sigma=1e-4", worst_saw < 1e-3,
                 "max |B - (round(x)-x)| " + fmt(worst_saw) + " (< 1e-3)"});

  // The Fourier sign convention must agree with the sawtooth at small sigma.
  const double series = fourier_bias(0.25, 0.10, 50);
  out.push_back({"fourier-sign", series < 0.0 && std::fabs(series - exact_bias_unclipped(0.25, 0.10)) < 1e-8,
                 "fourier(0.25, 0.10) = " + fmt(series)});

  double worst_clip = 0.0;
  const double sigma = 2.0;
  for (double x = 13.0; x < 255.0 - 13.0; x += 0.37) {
    worst_clip = std::max(worst_clip, std::fabs(exact_bias_clipped(x, sigma) -
                                                exact_bias_unclipped(x - std::floor(x), sigma)));
  }
  out.push_back({"clipped-vs-unclipped interior sigma=2", worst_clip < 1e-6,
                 "max |diff| " + fmt(worst_clip) + " (< 1e-6)"});
  return out;
}

}  // namespace nqprobe
