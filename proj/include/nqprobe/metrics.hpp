#pragma once

#include <span>

namespace nqprobe {

// Labels: 1 = fake (positive), 0 = real. A score >= threshold counts as fake.
double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold = 0.5);

// Area under the precision-recall curve as the step sum over distinct score
// thresholds, sum_k (R_k - R_{k-1}) P_k. Tied scores enter together.
// Throws InvalidInput unless both classes are present.
double average_precision(std::span<const double> scores, std::span<const int> labels);

// Mann-Whitney rank statistic with average ranks for ties.
// Throws InvalidInput unless both classes are present.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace nqprobe
