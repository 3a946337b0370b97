#include "nqprobe/ablation.hpp"

#include <map>

namespace nqprobe {

namespace {

AblationRow score_row(const DatasetFeatures& train_f, const DatasetFeatures& test_f,
                      Branches branches, const ProbeConfig& pc, const TrainingHyper& hyper,
                      std::string group) {
  const auto model = train_head(train_f.table(branches), hyper, pc);
  const auto report = evaluate_table(model, test_f.table(branches));
  return {std::move(group), branches, pc.sigma_levels, pc.replicas, report.accuracy,
          report.roc_auc.value_or(0.0)};
}

}  // namespace

std::vector<AblationRow> run_ablation(const LabeledDataset& train_set,
                                      const LabeledDataset& test_set,
                                      const AblationPlan& plan, unsigned threads) {
  // Cache features per (sigma, replicas) so repeated settings are free.
  std::map<std::pair<double, int>, std::pair<DatasetFeatures, DatasetFeatures>> cache;
  auto features_for = [&](const ProbeConfig& pc) -> const auto& {
    const auto key = std::make_pair(pc.sigma_levels, pc.replicas);
    auto it = cache.find(key);
    if (it == cache.end()) {
      it = cache
               .emplace(key, std::make_pair(extract_dataset_features(train_set, pc, threads),
                                            extract_dataset_features(test_set, pc, threads)))
               .first;
    }
    return it->second;
  };

  std::vector<AblationRow> rows;
  {
    const auto& [tr, te] = features_for(plan.base);
    for (Branches b : {Branches::kFused, Branches::kVisualOnly, Branches::kColorOnly}) {
      rows.push_back(score_row(tr, te, b, plan.base, plan.hyper, "branch"));
    }
  }
  for (int r : plan.replica_sweep) {
    ProbeConfig pc = plan.base;
    pc.replicas = r;
    const auto& [tr, te] = features_for(pc);
    rows.push_back(score_row(tr, te, Branches::kFused, pc, plan.hyper, "replicas"));
  }
  for (double s : plan.sigma_sweep) {
    ProbeConfig pc = plan.base;
    pc.sigma_levels = s;
    const auto& [tr, te] = features_for(pc);
    rows.push_back(score_row(tr, te, Branches::kFused, pc, plan.hyper, "sigma"));
  }
  return rows;
}

}  // namespace nqprobe
