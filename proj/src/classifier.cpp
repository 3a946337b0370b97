#include "nqprobe/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <nlohmann/json.hpp>

#include "nqprobe/error.hpp"
#include "nqprobe/metrics.hpp"
#include "nqprobe/parallel.hpp"
#include "nqprobe/rng.hpp"

namespace nqprobe {

const char* branches_name(Branches b) noexcept {
  switch (b) {
    case Branches::kFused:
      return "full";
    case Branches::kVisualOnly:
      return "image-only";
    case Branches::kColorOnly:
      return "color-only";
  }
  return "?";
}

std::string spec_id_for(Branches b) {
  switch (b) {
    case Branches::kVisualOnly:
      return kVisualSpecId;
    case Branches::kColorOnly:
      return kColorSpecId;
    case Branches::kFused:
      break;
  }
  return std::string(kVisualSpecId) + "+" + kColorSpecId;
}

namespace {

Branches branches_for_spec(const std::string& spec_id) {
  for (Branches b : {Branches::kFused, Branches::kVisualOnly, Branches::kColorOnly}) {
    if (spec_id_for(b) == spec_id) return b;
  }
  throw InvalidInput("model feature spec '" + spec_id + "' has no registered extractor");
}

double sigmoid(double z) noexcept {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + e^z) - y z
double bce_from_logit(double z, int y) noexcept {
  const double softplus = std::max(z, 0.0) + std::log1p(std::exp(-std::fabs(z)));
  return softplus - static_cast<double>(y) * z;
}

// Un-normalized parameter-space views.
struct Layout {
  std::size_t d;
  std::size_t h;
  std::size_t w1() const { return 0; }
  std::size_t b1() const { return h * d; }
  std::size_t w2() const { return h * d + h; }
  std::size_t b2() const { return h * d + 2 * h; }
};

void normalize_into(const Normalization& norm, std::span<const double> raw,
                    std::vector<double>& out) {
  out.resize(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = (raw[i] - norm.mean[i]) / norm.scale[i];
  }
}

// Forward pass on normalized inputs; fills hidden activations when present.
double forward(const ClassifierModel& m, std::span<const double> x,
               std::vector<double>* activations) {
  const auto& p = m.params;
  if (m.hidden_width == 0) {
    double z = p[m.input_dim];
    for (std::size_t i = 0; i < m.input_dim; ++i) z += p[i] * x[i];
    return z;
  }
  const Layout L{m.input_dim, m.hidden_width};
  double z = p[L.b2()];
  if (activations) activations->resize(L.h);
  for (std::size_t j = 0; j < L.h; ++j) {
    double pre = p[L.b1() + j];
    const double* row = p.data() + L.w1() + j * L.d;
    for (std::size_t i = 0; i < L.d; ++i) pre += row[i] * x[i];
    const double a = std::tanh(pre);
    if (activations) (*activations)[j] = a;
    z += p[L.w2() + j] * a;
  }
  return z;
}

void check_table(const ClassifierModel& m, const FeatureTable& t) {
  if (t.rows.empty()) throw InvalidInput("feature batch is empty");
  if (t.rows.size() != t.labels.size()) throw InvalidInput("rows and labels differ in length");
  if (t.spec_id != m.feature_spec_id) {
    throw InvalidInput("feature spec '" + t.spec_id + "' does not match model spec '" +
                       m.feature_spec_id + "'");
  }
  for (const auto& r : t.rows) {
    if (r.size() != m.input_dim) throw InvalidInput("feature row has the wrong length");
  }
}

// Loss and gradient on pre-normalized rows selected by `index`.
double accumulate_gradient(const ClassifierModel& m,
                           const std::vector<std::vector<double>>& xs,
                           const std::vector<int>& ys, std::span<const std::size_t> index,
                           double l2, std::vector<double>* grad) {
  const std::size_t np = m.parameter_count();
  if (grad) grad->assign(np, 0.0);
  const double inv_n = 1.0 / static_cast<double>(index.size());
  const Layout L{m.input_dim, m.hidden_width};
  std::vector<double> act;
  double total = 0.0;
  for (const std::size_t k : index) {
    const auto& x = xs[k];
    const double z = forward(m, x, grad ? &act : nullptr);
    total += bce_from_logit(z, ys[k]);
    if (!grad) continue;
    const double dz = (sigmoid(z) - ys[k]) * inv_n;
    auto& g = *grad;
    if (m.hidden_width == 0) {
      for (std::size_t i = 0; i < m.input_dim; ++i) g[i] += dz * x[i];
      g[m.input_dim] += dz;
    } else {
      g[L.b2()] += dz;
      for (std::size_t j = 0; j < L.h; ++j) {
        g[L.w2() + j] += dz * act[j];
        const double dpre = dz * m.params[L.w2() + j] * (1.0 - act[j] * act[j]);
        g[L.b1() + j] += dpre;
        double* row = g.data() + L.w1() + j * L.d;
        for (std::size_t i = 0; i < L.d; ++i) row[i] += dpre * x[i];
      }
    }
  }
  double penalty = 0.0;
  if (l2 > 0.0) {
    for (std::size_t i = 0; i < np; ++i) {
      if (m.is_bias(i)) continue;
      penalty += m.params[i] * m.params[i];
      if (grad) (*grad)[i] += l2 * m.params[i];
    }
  }
  return total * inv_n + 0.5 * l2 * penalty;
}

std::vector<std::vector<double>> normalized_rows(const ClassifierModel& m,
                                                 const FeatureTable& t) {
  std::vector<std::vector<double>> xs(t.rows.size());
  for (std::size_t k = 0; k < t.rows.size(); ++k) normalize_into(m.normalization, t.rows[k], xs[k]);
  return xs;
}

Normalization fit_normalization(const FeatureTable& t) {
  const std::size_t d = t.rows.front().size();
  Normalization norm{std::vector<double>(d, 0.0), std::vector<double>(d, 1.0)};
  const double n = static_cast<double>(t.rows.size());
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < d; ++i) norm.mean[i] += r[i];
  }
  for (double& v : norm.mean) v /= n;
  std::vector<double> var(d, 0.0);
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < d; ++i) var[i] += (r[i] - norm.mean[i]) * (r[i] - norm.mean[i]);
  }
  for (std::size_t i = 0; i < d; ++i) {
    const double s = std::sqrt(var[i] / n);
    norm.scale[i] = s > 1e-12 ? s : 1.0;
  }
  return norm;
}

void validate_hyper(const TrainingHyper& hyper) {
  if (!(hyper.learning_rate > 0.0) || hyper.epochs < 0 || hyper.batch_size == 0 ||
      hyper.l2_penalty < 0.0) {
    throw InvalidInput("training hyperparameters must be positive");
  }
}

}  // namespace

std::size_t ClassifierModel::parameter_count() const noexcept {
  return hidden_width == 0 ? input_dim + 1 : hidden_width * input_dim + 2 * hidden_width + 1;
}

bool ClassifierModel::is_bias(std::size_t index) const noexcept {
  if (hidden_width == 0) return index == input_dim;
  const Layout L{input_dim, hidden_width};
  return (index >= L.b1() && index < L.w2()) || index == L.b2();
}

void ClassifierModel::validate() const {
  if (input_dim == 0) throw InvalidInput("model has no inputs");
  if (params.size() != parameter_count()) {
    throw InvalidInput("model weight count inconsistent with its feature spec");
  }
  if (normalization.mean.size() != input_dim || normalization.scale.size() != input_dim) {
    throw InvalidInput("normalization length does not match input dimension");
  }
  for (double s : normalization.scale) {
    if (!(s > 0.0)) throw InvalidInput("normalization scales must be strictly positive");
  }
}

ClassifierModel ClassifierModel::zeros(std::string spec_id, std::size_t input_dim,
                                       std::size_t hidden_width) {
  ClassifierModel m;
  m.feature_spec_id = std::move(spec_id);
  m.input_dim = input_dim;
  m.hidden_width = hidden_width;
  m.params.assign(m.parameter_count(), 0.0);
  m.normalization = {std::vector<double>(input_dim, 0.0), std::vector<double>(input_dim, 1.0)};
  return m;
}

double logit(const ClassifierModel& model, std::span<const double> raw_features) {
  if (raw_features.size() != model.input_dim) {
    throw InvalidInput("feature vector length does not match the model");
  }
  std::vector<double> x;
  normalize_into(model.normalization, raw_features, x);
  return forward(model, x, nullptr);
}

double score(const ClassifierModel& model, std::span<const double> raw_features) {
  return sigmoid(logit(model, raw_features));
}

LossAndGradient loss_and_gradient(const ClassifierModel& model, const FeatureTable& batch,
                                  double l2_penalty) {
  check_table(model, batch);
  const auto xs = normalized_rows(model, batch);
  std::vector<std::size_t> all(xs.size());
  std::iota(all.begin(), all.end(), 0);
  LossAndGradient out;
  out.loss = accumulate_gradient(model, xs, batch.labels, all, l2_penalty, &out.gradient);
  return out;
}

double loss(const ClassifierModel& model, const FeatureTable& batch, double l2_penalty) {
  check_table(model, batch);
  const auto xs = normalized_rows(model, batch);
  std::vector<std::size_t> all(xs.size());
  std::iota(all.begin(), all.end(), 0);
  return accumulate_gradient(model, xs, batch.labels, all, l2_penalty, nullptr);
}

ClassifierModel train_from(ClassifierModel model, const FeatureTable& table,
                           const TrainingHyper& hyper) {
  validate_hyper(hyper);
  check_table(model, table);
  const bool has_real = std::count(table.labels.begin(), table.labels.end(), 0) > 0;
  const bool has_fake = std::count(table.labels.begin(), table.labels.end(), 1) > 0;
  if (!has_real || !has_fake) throw InvalidInput("training needs both classes");

  const auto xs = normalized_rows(model, table);
  std::vector<std::size_t> all(xs.size());
  std::iota(all.begin(), all.end(), 0);
  auto full_loss = [&] {
    return accumulate_gradient(model, xs, table.labels, all, hyper.l2_penalty, nullptr);
  };

  model.loss_trajectory.clear();
  double current = full_loss();
  if (!std::isfinite(current)) throw TrainingFailure("initial loss is not finite", 0);
  model.loss_trajectory.push_back(current);

  Xoshiro256pp shuffle_rng(derive_seed(hyper.seed, 0x5EED));
  std::vector<std::size_t> order = all;
  std::vector<double> grad;
  double lr = hyper.learning_rate;
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(shuffle_rng.uniform() * static_cast<double>(i));
      std::swap(order[i - 1], order[j]);
    }
    const std::vector<double> previous = model.params;
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      accumulate_gradient(model, xs, table.labels,
                          std::span<const std::size_t>(order).subspan(start, end - start),
                          hyper.l2_penalty, &grad);
      for (std::size_t p = 0; p < grad.size(); ++p) model.params[p] -= lr * grad[p];
    }
    const double next = full_loss();
    if (!std::isfinite(next)) {
      throw TrainingFailure("training loss became non-finite at epoch " + std::to_string(epoch),
                            epoch);
    }
    if (next > current) {
      model.params = previous;
      lr *= 0.5;
    } else {
      current = next;
    }
    model.loss_trajectory.push_back(current);
  }
  return model;
}

ClassifierModel train_head(const FeatureTable& table, const TrainingHyper& hyper,
                           const ProbeConfig& probe_config) {
  validate_hyper(hyper);
  if (table.rows.empty()) throw InvalidInput("training table is empty");
  const std::size_t d = table.rows.front().size();
  ClassifierModel model = ClassifierModel::zeros(table.spec_id, d, hyper.hidden_width);
  model.probe_config = probe_config;
  model.normalization = fit_normalization(table);
  if (hyper.hidden_width > 0) {
    Xoshiro256pp rng(derive_seed(hyper.seed, 0x1417));
    const ZigguratNormal normal;
    const Layout L{d, hyper.hidden_width};
    const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
    const double s2 = 1.0 / std::sqrt(static_cast<double>(L.h));
    for (std::size_t i = 0; i < L.h * L.d; ++i) model.params[L.w1() + i] = s1 * normal(rng);
    for (std::size_t j = 0; j < L.h; ++j) model.params[L.w2() + j] = s2 * normal(rng);
  }
  return train_from(std::move(model), table, hyper);
}

double gradient_check(const ClassifierModel& model, const FeatureTable& batch,
                      double epsilon, double l2_penalty) {
  if (!(epsilon >= 1e-7 && epsilon <= 1e-3)) {
    throw InvalidInput("epsilon must lie in [1e-7, 1e-3]");
  }
  const auto analytic = loss_and_gradient(model, batch, l2_penalty).gradient;
  const auto xs = normalized_rows(model, batch);
  std::vector<std::size_t> all(xs.size());
  std::iota(all.begin(), all.end(), 0);
  ClassifierModel probe = model;
  double worst = 0.0;
  for (std::size_t p = 0; p < analytic.size(); ++p) {
    const double saved = probe.params[p];
    probe.params[p] = saved + epsilon;
    const double up = accumulate_gradient(probe, xs, batch.labels, all, l2_penalty, nullptr);
    probe.params[p] = saved - epsilon;
    const double down = accumulate_gradient(probe, xs, batch.labels, all, l2_penalty, nullptr);
    probe.params[p] = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::fabs(analytic[p]), std::fabs(numeric), 1e-12});
    worst = std::max(worst, std::fabs(analytic[p] - numeric) / denom);
  }
  return worst;
}

FeatureVector extract_features(const ImageBuffer& image, const ProbeConfig& probe_config,
                               Branches branches) {
  FeatureVector visual;
  FeatureVector color;
  if (branches != Branches::kColorOnly) visual = extract_visual_features(image);
  if (branches != Branches::kVisualOnly) {
    color = extract_color_features(run_probe(image, probe_config, 1).delta);
  }
  return fuse(visual, color);
}

FeatureTable DatasetFeatures::table(Branches branches) const {
  FeatureTable t;
  t.spec_id = spec_id_for(branches);
  t.labels = labels;
  t.rows.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const FeatureVector empty;
    const FeatureVector& v = branches == Branches::kColorOnly ? empty : visual[i];
    const FeatureVector& c = branches == Branches::kVisualOnly ? empty : color[i];
    t.rows.push_back(fuse(v, c).values);
  }
  return t;
}

DatasetFeatures extract_dataset_features(const LabeledDataset& dataset,
                                         const ProbeConfig& probe_config, unsigned threads) {
  probe_config.validate();
  DatasetFeatures f;
  const std::size_t n = dataset.size();
  f.visual.resize(n);
  f.color.resize(n);
  f.labels = dataset.labels();
  parallel_for(n, threads, [&](std::size_t i) {
    const ImageBuffer& img = dataset.items[i].image;
    f.visual[i] = extract_visual_features(img);
    f.color[i] = extract_color_features(run_probe(img, probe_config, 1).delta);
  });
  return f;
}

ClassifierModel train(const LabeledDataset& dataset, const ProbeConfig& probe_config,
                      const TrainingHyper& hyper, Branches branches, unsigned threads) {
  if (!dataset.has_both_classes()) throw InvalidInput("training needs both classes");
  validate_hyper(hyper);
  const auto features = extract_dataset_features(dataset, probe_config, threads);
  return train_head(features.table(branches), hyper, probe_config);
}

double predict(const ClassifierModel& model, const ImageBuffer& image,
               const ProbeConfig& probe_config) {
  model.validate();
  const Branches branches = branches_for_spec(model.feature_spec_id);
  const FeatureVector f = extract_features(image, probe_config, branches);
  if (f.spec_id != model.feature_spec_id || f.size() != model.input_dim) {
    throw InvalidInput("extracted features do not match the model spec");
  }
  return score(model, f.values);
}

EvaluationReport evaluate_scores(std::span<const double> scores, std::span<const int> labels) {
  EvaluationReport r;
  r.scores.assign(scores.begin(), scores.end());
  r.accuracy = accuracy(scores, labels, 0.5);
  try {
    r.average_precision = average_precision(scores, labels);
    r.roc_auc = roc_auc(scores, labels);
  } catch (const InvalidInput& e) {
    r.average_precision.reset();
    r.roc_auc.reset();
    r.undefined_reason = e.what();
  }
  return r;
}

EvaluationReport evaluate(const ClassifierModel& model, const LabeledDataset& dataset,
                          const ProbeConfig& probe_config, unsigned threads) {
  if (dataset.size() == 0) throw InvalidInput("evaluation dataset is empty");
  std::vector<double> scores(dataset.size());
  parallel_for(dataset.size(), threads, [&](std::size_t i) {
    scores[i] = predict(model, dataset.items[i].image, probe_config);
  });
  const auto labels = dataset.labels();
  return evaluate_scores(scores, labels);
}

EvaluationReport evaluate_table(const ClassifierModel& model, const FeatureTable& table) {
  check_table(model, table);
  std::vector<double> scores;
  scores.reserve(table.rows.size());
  for (const auto& r : table.rows) scores.push_back(score(model, r));
  return evaluate_scores(scores, table.labels);
}

void save_model(const std::filesystem::path& path, const ClassifierModel& model) {
  model.validate();
  nlohmann::json j;
  j["version"] = ClassifierModel::kVersion;
  j["feature_spec_id"] = model.feature_spec_id;
  j["input_dim"] = model.input_dim;
  j["probe_config"] = {{"sigma_levels", model.probe_config.sigma_levels},
                       {"replicas", model.probe_config.replicas},
                       {"seed", model.probe_config.master_seed},
                       {"clip", model.probe_config.clip}};
  j["normalization"] = {{"mean", model.normalization.mean},
                        {"scale", model.normalization.scale}};
  if (model.hidden_width == 0) {
    j["weights"] = model.params;
    j["hidden"] = nullptr;
  } else {
    const Layout L{model.input_dim, model.hidden_width};
    const auto& p = model.params;
    j["weights"] = std::vector<double>(p.begin() + L.w2(), p.end());
    j["hidden"] = {{"width", L.h},
                   {"w1", std::vector<double>(p.begin(), p.begin() + L.b1())},
                   {"b1", std::vector<double>(p.begin() + L.b1(), p.begin() + L.w2())}};
  }
  j["loss_trajectory"] = model.loss_trajectory;
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write model " + path.string());
  out << j.dump(1) << '\n';
}

ClassifierModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open model " + path.string());
  ClassifierModel m;
  try {
    const auto j = nlohmann::json::parse(in);
    if (j.at("version").get<int>() != ClassifierModel::kVersion) {
      throw InvalidInput("unsupported model version");
    }
    m.feature_spec_id = j.at("feature_spec_id").get<std::string>();
    m.input_dim = j.at("input_dim").get<std::size_t>();
    const auto& pc = j.at("probe_config");
    m.probe_config.sigma_levels = pc.at("sigma_levels").get<double>();
    m.probe_config.replicas = pc.at("replicas").get<int>();
    m.probe_config.master_seed = pc.at("seed").get<std::uint64_t>();
    m.probe_config.clip = pc.at("clip").get<bool>();
    m.normalization.mean = j.at("normalization").at("mean").get<std::vector<double>>();
    m.normalization.scale = j.at("normalization").at("scale").get<std::vector<double>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    if (j.at("hidden").is_null()) {
      m.params = weights;
    } else {
      const auto& h = j.at("hidden");
      m.hidden_width = h.at("width").get<std::size_t>();
      m.params = h.at("w1").get<std::vector<double>>();
      const auto b1 = h.at("b1").get<std::vector<double>>();
      m.params.insert(m.params.end(), b1.begin(), b1.end());
      m.params.insert(m.params.end(), weights.begin(), weights.end());
    }
    m.loss_trajectory = j.value("loss_trajectory", std::vector<double>{});
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed model file: ") + e.what());
  }
  m.validate();
  return m;
}

}  // namespace nqprobe
