#include "nqprobe/bias_oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "nqprobe/error.hpp"
#include "test_oracles.hpp"

namespace nqprobe {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(ExactBiasUnclipped, SymmetryPointsAreZero) {
  for (double s : {0.05, 0.1, 0.3, 1.0, 25.6}) {
    EXPECT_NEAR(exact_bias_unclipped(0.0, s), 0.0, 1e-14);
    EXPECT_NEAR(exact_bias_unclipped(0.5, s), 0.0, 1e-14);
  }
}

TEST(ExactBiasUnclipped, QuarterOffsetAtSigmaTenth) {
  const double b = exact_bias_unclipped(0.25, 0.10);
  EXPECT_LT(b, -0.24);
  EXPECT_GT(b, -0.25);
  EXPECT_NEAR(b, testing::reference_bias(0.25, 0.10, false), 1e-10);
}

TEST(ExactBiasUnclipped, AgreesWithQuadratureOracle) {
  for (double s : {0.05, 0.1, 0.2, 0.5, 1.3}) {
    for (double x = 0.0; x < 1.0; x += 1.0 / 13.0) {
      ASSERT_NEAR(exact_bias_unclipped(x, s), testing::reference_bias(x, s, false), 1e-10)
          << "x=" << x << " sigma=" << s;
    }
  }
}

TEST(ExactBiasUnclipped, PeriodicInX) {
  for (double x : {0.1, 0.37, 0.8}) {
    EXPECT_NEAR(exact_bias_unclipped(x + 7.0, 0.2), exact_bias_unclipped(x, 0.2), 1e-12);
    EXPECT_NEAR(exact_bias_unclipped(x - 3.0, 0.2), exact_bias_unclipped(x, 0.2), 1e-12);
  }
}

TEST(ExactBiasUnclipped, InvalidSigma) {
  EXPECT_THROW(exact_bias_unclipped(0.2, 0.0), InvalidInput);
  EXPECT_THROW(exact_bias_unclipped(0.2, -1.0), InvalidInput);
  EXPECT_THROW(fourier_bias(0.2, 0.0, 5), InvalidInput);
  EXPECT_THROW(fourier_bias(0.2, 0.1, 0), InvalidInput);
}

TEST(ExactBiasUnclipped, OddSymmetry) {
  for (double s : {0.05, 0.1, 0.2, 0.5}) {
    for (int i = 1; i < 64; ++i) {
      const double x = i / 64.0;
      ASSERT_NEAR(exact_bias_unclipped(x, s), -exact_bias_unclipped(1.0 - x, s), 1e-12);
    }
  }
}

TEST(ExactBiasUnclipped, SawtoothLimit) {
  for (double x = 0.005; x < 1.0; x += 0.01) {
    if (std::fabs(x - 0.5) <= 1e-2) continue;
    ASSERT_NEAR(exact_bias_unclipped(x, 1e-4), std::round(x) - x, 1e-3) << x;
  }
}

TEST(ExactBiasUnclipped, LargeSigmaDecay) {
  for (double s : {1.0, 2.0, 25.6}) {
    for (double x = 0.0; x < 1.0; x += 0.05) {
      ASSERT_LT(std::fabs(exact_bias_unclipped(x, s)), 1e-4);
      ASSERT_LE(std::fabs(exact_bias_unclipped(x, s)),
                1.01 * std::exp(-2 * kPi * kPi * s * s) / kPi + 1e-13);  // summation roundoff floor
    }
  }
}

TEST(FourierBias, FirstHarmonicCarriesNegativeSign) {
  const double c = std::exp(-2.0 * kPi * kPi * 0.01) / kPi;
  EXPECT_NEAR(c, 0.261, 5e-4);
  EXPECT_DOUBLE_EQ(fourier_bias(0.25, 0.10, 1), -c);
  EXPECT_DOUBLE_EQ(first_harmonic_amplitude(0.10), c);
}

TEST(FourierBias, ZeroAtIntegers) {
  for (int m : {1, 5, 50}) EXPECT_EQ(fourier_bias(0.0, 0.3, m), 0.0);
}

TEST(FourierBias, FiftyTermsMatchExact) {
  EXPECT_NEAR(fourier_bias(0.25, 0.10, 50), exact_bias_unclipped(0.25, 0.10), 1e-8);
}

TEST(FourierBias, SeriesTermsMatchTheirClosedForm) {
  const double x = 0.17, s = 0.07;
  for (int m = 1; m <= 6; ++m) {
    const double term = fourier_bias(x, s, m) - (m > 1 ? fourier_bias(x, s, m - 1) : 0.0);
    const double expected =
        (m % 2 ? -1.0 : 1.0) / (m * kPi) * std::exp(-2 * kPi * kPi * s * s * m * m) *
        std::sin(2 * kPi * m * x);
    EXPECT_NEAR(term, expected, 1e-15);
  }
}

TEST(AdaptiveOrder, ExtendsOnlyWhileTermsAreLarge) {
  EXPECT_EQ(adaptive_fourier_order(0.1, 50), 50);
  EXPECT_EQ(adaptive_fourier_order(0.5, 3), 3);
  const int m = adaptive_fourier_order(0.01, 50);
  EXPECT_GT(m, 50);
  const double envelope = std::exp(-2 * kPi * kPi * 1e-4 * m * m) / (m * kPi);
  EXPECT_LE(envelope, 1e-12);
  const double before = std::exp(-2 * kPi * kPi * 1e-4 * (m - 1) * (m - 1)) / ((m - 1) * kPi);
  EXPECT_GT(before, 1e-12);
}

TEST(ExactBiasClipped, MidGrayMatchesUnclipped) {
  EXPECT_NEAR(exact_bias_clipped(128.0, 25.6), exact_bias_unclipped(0.0, 25.6), 1e-6);
}

TEST(ExactBiasClipped, EndBinsPullTowardTheMiddle) {
  const double half_normal = 25.6 / std::sqrt(2.0 * kPi);
  EXPECT_NEAR(exact_bias_clipped(0.0, 25.6), half_normal, 0.05);
  EXPECT_NEAR(exact_bias_clipped(255.0, 25.6), -half_normal, 0.05);
  EXPECT_NEAR(exact_bias_clipped(0.0, 25.6), -exact_bias_clipped(255.0, 25.6), 1e-12);
  for (double x : {0.0, 3.7, 40.0, 128.0, 200.2, 255.0}) {
    EXPECT_NEAR(exact_bias_clipped(x, 25.6), testing::reference_bias(x, 25.6, true), 1e-9)
        << x;
  }
}

TEST(ExactBiasClipped, DomainChecked) {
  EXPECT_THROW(exact_bias_clipped(-0.1, 1.0), InvalidInput);
  EXPECT_THROW(exact_bias_clipped(256.0, 1.0), InvalidInput);
  EXPECT_THROW(exact_bias_clipped(10.0, 0.0), InvalidInput);
}

TEST(MonteCarloBias, AgreesWithExactWithinFourSe) {
  const auto a = monte_carlo_bias(0.25, 0.10, 1000000, 3, false);
  EXPECT_LT(std::fabs(a.estimate - exact_bias_unclipped(0.25, 0.10)), 4 * a.standard_error);
  const auto b = monte_carlo_bias(0.5, 1.0, 1000000, 4, false);
  EXPECT_LT(std::fabs(b.estimate), 4 * b.standard_error);
  const auto c = monte_carlo_bias(0.0, 25.6, 1000000, 5, true);
  EXPECT_LT(std::fabs(c.estimate - exact_bias_clipped(0.0, 25.6)), 4 * c.standard_error);
}

TEST(MonteCarloBias, StandardErrorFloorForDegenerateRuns) {
  // At sigma 0.05 and x = 0.25 an upward rounding needs a 5-sigma draw, so a
  // short run usually sees none; the floored SE stays positive.
  const auto r = monte_carlo_bias(0.25, 0.05, 1000, 1, false);
  EXPECT_GT(r.standard_error, 0.0);
  EXPECT_NEAR(r.standard_error, std::sqrt(999.0 / 1e6 / 1000.0), 1e-3);
}

TEST(MonteCarloBias, RejectsSmallSampleCounts) {
  EXPECT_THROW(monte_carlo_bias(0.2, 0.1, 999, 1, false), InvalidInput);
}

TEST(MonteCarloBias, SeedDeterminism) {
  const auto a = monte_carlo_bias(0.3, 0.2, 5000, 8, false);
  const auto b = monte_carlo_bias(0.3, 0.2, 5000, 8, false);
  EXPECT_EQ(a.estimate, b.estimate);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(DistributionSpec, Validation) {
  EXPECT_THROW((DistributionSpec{{1.0}, {0.5}}).validate(), InvalidInput);
  EXPECT_THROW((DistributionSpec{{1.0, 2.0}, {1.5, -0.5}}).validate(), InvalidInput);
  EXPECT_THROW((DistributionSpec{{1.0}, {1.0, 0.0}}).validate(), InvalidInput);
  EXPECT_THROW((DistributionSpec{}).validate(), InvalidInput);
  EXPECT_NO_THROW(DistributionSpec::uniform_fractional(8).validate());
  EXPECT_THROW(DistributionSpec::from_histogram({0.0, 0.0}), InvalidInput);
  EXPECT_THROW(DistributionSpec::from_histogram({1.0, -1.0, 1.0}), InvalidInput);
}

TEST(PredictedDeltaMean, UniformFractionalIsZero) {
  const auto d = DistributionSpec::uniform_fractional(16);
  EXPECT_NEAR(predicted_delta_mean(d, 0.1, false), 0.0, 1e-10);
  EXPECT_NEAR(predicted_delta_mean(d, 0.3, false), 0.0, 1e-10);
}

TEST(PredictedDeltaMean, PointMasses) {
  EXPECT_NEAR(predicted_delta_mean(DistributionSpec::point_mass(0.25), 0.1, false),
              -exact_bias_unclipped(0.25, 0.1), 1e-15);
  EXPECT_NEAR(predicted_delta_mean(DistributionSpec::point_mass(100.25), 0.1, false),
              0.2438, 1e-3);
  EXPECT_NEAR(predicted_delta_mean(DistributionSpec::point_mass(0.0), 25.6, true),
              -10.21, 0.01);
}

TEST(PredictedDeltaMean, HistogramMixture) {
  std::vector<double> hist(256, 0.0);
  hist[0] = 1.0;
  hist[255] = 1.0;
  EXPECT_NEAR(predicted_delta_mean(DistributionSpec::from_histogram(hist), 25.6, true), 0.0,
              1e-12);
  hist[255] = 0.0;
  hist[128] = 3.0;
  EXPECT_NEAR(predicted_delta_mean(DistributionSpec::from_histogram(hist), 25.6, true),
              -0.25 * exact_bias_clipped(0.0, 25.6), 1e-6);
}

TEST(NonuniformityScore, Examples) {
  EXPECT_NEAR(nonuniformity_score(DistributionSpec::uniform_fractional(16), 0.1), 0.0, 1e-15);
  EXPECT_NEAR(nonuniformity_score(DistributionSpec::point_mass(3.25), 0.1), 0.261, 5e-4);
  EXPECT_NEAR(nonuniformity_score(DistributionSpec::point_mass(0.25), 0.5),
              std::exp(-kPi * kPi / 2) / kPi, 1e-15);
  EXPECT_NEAR(std::exp(-kPi * kPi / 2) / kPi, 0.00229, 1e-5);
}

TEST(BiasProfile, GridAndColumns) {
  const auto p = compute_bias_profile(0.1, 16, 50, 2000, 9);
  ASSERT_EQ(p.x_grid.size(), 16u);
  ASSERT_TRUE(p.monte_carlo.has_value());
  EXPECT_EQ(p.monte_carlo->size(), 16u);
  EXPECT_EQ(p.fourier_order, 50);
  for (int i = 0; i < 16; ++i) {
    EXPECT_DOUBLE_EQ(p.x_grid[i], i / 16.0);
    EXPECT_NEAR(p.exact[i], p.fourier[i], 1e-8);
  }
  EXPECT_FALSE(compute_bias_profile(0.1, 4, 50, 0, 9).monte_carlo.has_value());
  EXPECT_THROW(compute_bias_profile(0.1, 0, 50, 0, 9), InvalidInput);
}

TEST(BiasPeriodIntegral, VanishesForEachSigma) {
  for (double s : {0.05, 0.1, 0.2, 0.5}) EXPECT_LT(std::fabs(bias_period_integral(s)), 1e-10);
  EXPECT_THROW(bias_period_integral(0.1, 1), InvalidInput);
}

}  // namespace
}  // namespace nqprobe
