#include "nqprobe/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "nqprobe/error.hpp"

namespace nqprobe {

namespace {

void check_sizes(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw InvalidInput("scores and labels differ in length");
  }
  if (scores.empty()) throw InvalidInput("no scores to evaluate");
}

std::size_t count_positives(std::span<const int> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void require_both_classes(std::size_t positives, std::size_t total) {
  if (positives == 0 || positives == total) {
    throw InvalidInput("AP/AUC undefined: only one class present");
  }
}

std::vector<std::size_t> order_by_score_desc(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

}  // namespace

double accuracy(std::span<const double> scores, std::span<const int> labels,
                double threshold) {
  check_sizes(scores, labels);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int predicted = scores[i] >= threshold ? 1 : 0;
    if (predicted == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

double average_precision(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  const std::size_t positives = count_positives(labels);
  require_both_classes(positives, labels.size());
  const auto order = order_by_score_desc(scores);
  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0;
  std::size_t seen = 0;
  for (std::size_t k = 0; k < order.size();) {
    const double s = scores[order[k]];
    for (; k < order.size() && scores[order[k]] == s; ++k) {
      ++seen;
      if (labels[order[k]] == 1) ++tp;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  check_sizes(scores, labels);
  const std::size_t positives = count_positives(labels);
  const std::size_t negatives = labels.size() - positives;
  require_both_classes(positives, labels.size());

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double positive_rank_sum = 0.0;
  for (std::size_t k = 0; k < order.size();) {
    std::size_t j = k;
    while (j < order.size() && scores[order[j]] == scores[order[k]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(k + 1 + j);  // 1-based
    for (std::size_t t = k; t < j; ++t) {
      if (labels[order[t]] == 1) positive_rank_sum += avg_rank;
    }
    k = j;
  }
  const double np = static_cast<double>(positives);
  const double nn = static_cast<double>(negatives);
  return (positive_rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

}  // namespace nqprobe
