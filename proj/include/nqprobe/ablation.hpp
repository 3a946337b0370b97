#pragma once

#include <string>
#include <vector>

#include "nqprobe/classifier.hpp"
#include "nqprobe/dataset.hpp"
#include "nqprobe/probe.hpp"

namespace nqprobe {

struct AblationRow {
  std::string group;  // "branch", "replicas" or "sigma"
  Branches branches = Branches::kFused;
  double sigma_levels = 0.0;
  int replicas = 0;
  double accuracy = 0.0;
  double roc_auc = 0.0;
};

struct AblationPlan {
  ProbeConfig base;                    // default probe settings
  std::vector<int> replica_sweep;      // at base sigma, full model
  std::vector<double> sigma_sweep;     // in levels, at base replicas, full model
  TrainingHyper hyper;
};

// Branch rows (full / image-only / color-only at the base config) followed by
// the replica and sigma sweeps. Features at each probe setting are extracted
// once and shared across branch variants.
std::vector<AblationRow> run_ablation(const LabeledDataset& train_set,
                                      const LabeledDataset& test_set,
                                      const AblationPlan& plan, unsigned threads = 0);

}  // namespace nqprobe
