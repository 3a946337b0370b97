#include "nqprobe/metrics.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "nqprobe/error.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {
namespace {

// Pairwise definition: P(s+ > s-) + 0.5 P(s+ = s-).
double pairwise_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// Step-interpolated AP: for each distinct threshold t (descending), precision
// and recall of the rule "score >= t".
double threshold_ap(const std::vector<double>& s, const std::vector<int>& y) {
  std::vector<double> thresholds = s;
  std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
  double positives = 0;
  for (int v : y) positives += v;
  double ap = 0.0, prev_recall = 0.0;
  for (double t : thresholds) {
    double tp = 0, predicted = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) {
        predicted += 1;
        tp += y[i];
      }
    }
    const double recall = tp / positives;
    ap += (recall - prev_recall) * (tp / predicted);
    prev_recall = recall;
  }
  return ap;
}

struct Sample {
  std::vector<double> scores;
  std::vector<int> labels;
};

Sample random_sample(std::uint64_t seed, std::size_t n, int levels = 0) {
  Xoshiro256pp rng(seed);
  Sample s;
  for (std::size_t i = 0; i < n; ++i) {
    s.labels.push_back(static_cast<int>(rng() & 1));
    double v = rng.uniform() + 0.3 * s.labels.back();
    if (levels > 0) v = std::floor(v * levels) / levels;  // force ties
    s.scores.push_back(v);
  }
  s.labels[0] = 0;
  s.labels[1] = 1;
  return s;
}

TEST(Accuracy, ThresholdTieCountsAsFake) {
  const std::vector<double> s{0.5, 0.49, 0.9, 0.1};
  const std::vector<int> y{1, 0, 1, 0};
  EXPECT_EQ(accuracy(s, y), 1.0);
  const std::vector<int> flipped{0, 1, 0, 1};
  EXPECT_EQ(accuracy(s, flipped), 0.0);
  EXPECT_THROW(accuracy(std::vector<double>{}, std::vector<int>{}), InvalidInput);
  EXPECT_THROW(accuracy(s, std::vector<int>{1}), InvalidInput);
}

TEST(Metrics, PerfectScorer) {
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < 10; ++i) {
    s.push_back(i % 2 ? 0.9 : 0.1);
    y.push_back(i % 2);
  }
  EXPECT_EQ(accuracy(s, y), 1.0);
  EXPECT_EQ(average_precision(s, y), 1.0);
  EXPECT_EQ(roc_auc(s, y), 1.0);
}

TEST(Metrics, ConstantScorerAucIsHalf) {
  const std::vector<double> s(20, 0.5);
  std::vector<int> y(20, 0);
  for (int i = 0; i < 10; ++i) y[i] = 1;
  EXPECT_EQ(roc_auc(s, y), 0.5);
  EXPECT_EQ(average_precision(s, y), 0.5);
}

TEST(Metrics, RandomScoresAucNearHalf) {
  Xoshiro256pp rng(77);
  std::vector<double> s;
  std::vector<int> y;
  for (int i = 0; i < 2000; ++i) {
    s.push_back(rng.uniform());
    y.push_back(i < 1000 ? 1 : 0);
  }
  EXPECT_NEAR(roc_auc(s, y), 0.5, 0.05);
}

TEST(Metrics, SingleClassIsUndefined) {
  const std::vector<double> s{0.2, 0.7};
  const std::vector<int> y{1, 1};
  EXPECT_THROW(average_precision(s, y), InvalidInput);
  EXPECT_THROW(roc_auc(s, y), InvalidInput);
  EXPECT_EQ(accuracy(s, y), 0.5);
}

TEST(Metrics, MatchBruteForceDefinitions) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    for (int levels : {0, 7}) {
      const auto s = random_sample(seed, 60, levels);
      EXPECT_NEAR(roc_auc(s.scores, s.labels), pairwise_auc(s.scores, s.labels), 1e-12);
      EXPECT_NEAR(average_precision(s.scores, s.labels), threshold_ap(s.scores, s.labels),
                  1e-12);
    }
  }
}

TEST(Metrics, KnownSmallCase) {
  // Ranking: + - + - ; AP = 1 * 0.5 + (2/3) * 0.5.
  const std::vector<double> s{0.9, 0.8, 0.7, 0.6};
  const std::vector<int> y{1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(average_precision(s, y), 0.5 + 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(roc_auc(s, y), 0.75);
}

TEST(Metrics, InvariantUnderStrictlyMonotoneTransforms) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = random_sample(seed, 200, seed % 2 ? 9 : 0);
    std::vector<double> a, b;
    for (double v : s.scores) {
      a.push_back(std::exp(3.0 * v) - 4.0);
      b.push_back(1.0 / (1.0 + std::exp(-10.0 * (v - 0.4))));
    }
    const double auc = roc_auc(s.scores, s.labels);
    const double ap = average_precision(s.scores, s.labels);
    EXPECT_DOUBLE_EQ(roc_auc(a, s.labels), auc);
    EXPECT_DOUBLE_EQ(roc_auc(b, s.labels), auc);
    EXPECT_DOUBLE_EQ(average_precision(a, s.labels), ap);
    EXPECT_DOUBLE_EQ(average_precision(b, s.labels), ap);
  }
}

TEST(Metrics, ReversedScoresComplementAuc) {
  const auto s = random_sample(3, 150);
  std::vector<double> neg;
  for (double v : s.scores) neg.push_back(-v);
  EXPECT_NEAR(roc_auc(neg, s.labels), 1.0 - roc_auc(s.scores, s.labels), 1e-12);
}

}  // namespace
}  // namespace nqprobe
