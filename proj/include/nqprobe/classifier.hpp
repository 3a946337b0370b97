#pragma once

// Shallow detection head over fused features: logistic regression or one
// tanh hidden layer, trained by mini-batch gradient descent on mean binary
// cross-entropy with an L2 penalty on non-bias weights.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nqprobe/dataset.hpp"
#include "nqprobe/features.hpp"
#include "nqprobe/probe.hpp"

namespace nqprobe {

enum class Branches { kFused, kVisualOnly, kColorOnly };

const char* branches_name(Branches b) noexcept;
std::string spec_id_for(Branches b);

struct Normalization {
  std::vector<double> mean;
  std::vector<double> scale;  // strictly positive
};

// Parameter layout in `params`:
//   linear:  [w_0 .. w_{d-1}, b]
//   hidden:  [W1 (h x d, row-major), b1 (h), w2 (h), b2]
struct ClassifierModel {
  static constexpr int kVersion = 1;

  std::string feature_spec_id;
  std::size_t input_dim = 0;
  std::size_t hidden_width = 0;  // 0 = linear head
  std::vector<double> params;
  Normalization normalization;
  ProbeConfig probe_config;
  std::vector<double> loss_trajectory;

  std::size_t parameter_count() const noexcept;
  // Indices into params that are biases (not L2 penalized).
  bool is_bias(std::size_t index) const noexcept;
  void validate() const;

  // Zero-weight model with identity normalization.
  static ClassifierModel zeros(std::string spec_id, std::size_t input_dim,
                               std::size_t hidden_width = 0);
};

struct TrainingHyper {
  double learning_rate = 0.1;
  int epochs = 200;
  std::size_t batch_size = 64;
  std::size_t hidden_width = 0;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 1;
};

// Rows of raw (un-normalized) feature values with 0/1 labels.
struct FeatureTable {
  std::string spec_id;
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> gradient;
};

// Raw-feature logit and probability.
double logit(const ClassifierModel& model, std::span<const double> raw_features);
double score(const ClassifierModel& model, std::span<const double> raw_features);

// Mean BCE over the rows plus 0.5 * l2 * |w|^2, and its analytic gradient.
LossAndGradient loss_and_gradient(const ClassifierModel& model, const FeatureTable& batch,
                                  double l2_penalty);
double loss(const ClassifierModel& model, const FeatureTable& batch, double l2_penalty);

// Fits normalization on `table`, then trains. After every epoch the full
// training loss is evaluated; an increase restores the previous parameters
// and halves the learning rate, so loss_trajectory is non-increasing and has
// epochs + 1 entries. Throws InvalidInput for a single-class table and
// TrainingFailure if the loss becomes non-finite.
ClassifierModel train_head(const FeatureTable& table, const TrainingHyper& hyper,
                           const ProbeConfig& probe_config = {});

// Same schedule starting from `init` (normalization kept as given).
ClassifierModel train_from(ClassifierModel init, const FeatureTable& table,
                           const TrainingHyper& hyper);

// Max over parameters of |g_a - g_n| / max(|g_a|, |g_n|, 1e-12), with g_n the
// central difference at step epsilon in [1e-7, 1e-3].
double gradient_check(const ClassifierModel& model, const FeatureTable& batch,
                      double epsilon, double l2_penalty = 0.0);

// Features of one image under `branches`; runs the probe only when needed.
FeatureVector extract_features(const ImageBuffer& image, const ProbeConfig& probe_config,
                               Branches branches);

// Visual and color features for every item, computed once and shared by the
// branch ablations.
struct DatasetFeatures {
  std::vector<FeatureVector> visual;
  std::vector<FeatureVector> color;
  std::vector<int> labels;

  FeatureTable table(Branches branches) const;
};

DatasetFeatures extract_dataset_features(const LabeledDataset& dataset,
                                         const ProbeConfig& probe_config,
                                         unsigned threads = 0);

ClassifierModel train(const LabeledDataset& dataset, const ProbeConfig& probe_config,
                      const TrainingHyper& hyper, Branches branches = Branches::kFused,
                      unsigned threads = 0);

// Logistic score in (0,1). Throws InvalidInput if the model's feature spec is
// not one the extractors produce.
double predict(const ClassifierModel& model, const ImageBuffer& image,
               const ProbeConfig& probe_config);

struct EvaluationReport {
  double accuracy = 0.0;
  std::optional<double> average_precision;
  std::optional<double> roc_auc;
  std::string undefined_reason;  // set when AP/AUC are missing
  std::vector<double> scores;
};

EvaluationReport evaluate_scores(std::span<const double> scores, std::span<const int> labels);
EvaluationReport evaluate(const ClassifierModel& model, const LabeledDataset& dataset,
                          const ProbeConfig& probe_config, unsigned threads = 0);
EvaluationReport evaluate_table(const ClassifierModel& model, const FeatureTable& table);

void save_model(const std::filesystem::path& path, const ClassifierModel& model);
ClassifierModel load_model(const std::filesystem::path& path);

}  // namespace nqprobe
