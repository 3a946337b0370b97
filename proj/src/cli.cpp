#include "nqprobe/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "nqprobe/ablation.hpp"
#include "nqprobe/bias_oracle.hpp"
#include "nqprobe/classifier.hpp"
#include "nqprobe/color_stats.hpp"
#include "nqprobe/dataset.hpp"
#include "nqprobe/error.hpp"
#include "nqprobe/probe.hpp"
#include "nqprobe/synthetics.hpp"
#include "nqprobe/verification.hpp"

namespace nqprobe {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct ProbeFlags {
  double sigma = 0.10;
  std::string units = "normalized";
  int replicas = 50;
  std::uint64_t seed = 0;
  bool no_clip = false;

  ProbeConfig config() const {
    ProbeConfig pc;
    pc.sigma_levels = sigma_to_levels(sigma, parse_sigma_units(units));
    pc.replicas = replicas;
    pc.master_seed = seed;
    pc.clip = !no_clip;
    pc.validate();
    return pc;
  }
};

void add_probe_flags(CLI::App* app, ProbeFlags& f) {
  app->add_option("--sigma", f.sigma, "Noise standard deviation")->capture_default_str();
  app->add_option("--sigma-units", f.units, "levels | normalized (sigma x 256)")
      ->check(CLI::IsMember({"levels", "normalized"}))
      ->capture_default_str();
  app->add_option("--replicas", f.replicas, "Noise replicas R")->capture_default_str();
  app->add_option("--seed", f.seed, "Master seed")->capture_default_str();
  app->add_flag("--no-clip", f.no_clip, "Do not clamp quantized values to [0,255]");
}

json to_json(const ProbeConfig& pc) {
  return {{"sigma_levels", pc.sigma_levels},
          {"replicas", pc.replicas},
          {"seed", pc.master_seed},
          {"clip", pc.clip}};
}

json to_json(const DeltaStats& s) {
  return {{"channel_mean", s.channel_mean},
          {"channel_std", s.channel_std},
          {"mean_abs", s.mean_abs},
          {"mean", s.mean},
          {"histogram_centers", {-32, 32}},
          {"histogram", s.histogram},
          {"underflow", s.underflow},
          {"overflow", s.overflow}};
}

json to_json(const StatsSummary& s) {
  return {{"entropy_bits", {{"r", s.entropy_bits[0]}, {"g", s.entropy_bits[1]},
                            {"b", s.entropy_bits[2]}, {"hue", s.entropy_bits[3]}}},
          {"smoothness_penalty",
           {{"r", s.smoothness_penalty[0]}, {"g", s.smoothness_penalty[1]},
            {"b", s.smoothness_penalty[2]}, {"hue", s.smoothness_penalty[3]}}}};
}

json optional_json(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::string full_precision(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Writes to the file at `path`, or to `out` when the path is empty or "-".
void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw InvalidInput("cannot write " + path);
  f << text;
}

std::vector<fs::path> collect_images(const fs::path& input) {
  if (!fs::exists(input)) throw InvalidInput("no such file or directory: " + input.string());
  if (!fs::is_directory(input)) return {input};
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(input)) {
    if (!e.is_regular_file()) continue;
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".ppm") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput("no .png or .ppm images in " + input.string());
  return files;
}

Branches parse_branches(const std::string& name) {
  if (name == "full") return Branches::kFused;
  if (name == "image-only") return Branches::kVisualOnly;
  if (name == "color-only") return Branches::kColorOnly;
  throw InvalidInput("unknown branch selection '" + name + "'");
}

struct SynthFlags {
  std::size_t count = 10;
  std::size_t width = 128;
  std::size_t height = 128;
  std::uint64_t seed = 1;
  int palette = PeakedParams{}.palette_size;
  double jitter = PeakedParams{}.jitter_sigma;
  double concentration = PeakedParams{}.concentration;
  int knots = SmoothParams{}.knots;

  std::pair<SynthSpec, SynthSpec> templates() const {
    SynthSpec real;
    real.kind = SynthKind::kSmooth;
    real.width = width;
    real.height = height;
    real.smooth.knots = knots;
    SynthSpec fake = real;
    fake.kind = SynthKind::kPeaked;
    fake.peaked.palette_size = palette;
    fake.peaked.jitter_sigma = jitter;
    fake.peaked.concentration = concentration;
    return {real, fake};
  }
};

void add_synth_flags(CLI::App* app, SynthFlags& f) {
  app->add_option("--width", f.width)->capture_default_str();
  app->add_option("--height", f.height)->capture_default_str();
  app->add_option("--palette", f.palette, "Peaked palette size K")->capture_default_str();
  app->add_option("--jitter", f.jitter, "Peaked jitter sigma, levels")->capture_default_str();
  app->add_option("--concentration", f.concentration)->capture_default_str();
  app->add_option("--knots", f.knots, "Smooth spline knots")->capture_default_str();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise-quantization probe toolkit"};
  app.name("nqprobe");
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "Probe an image: .dmap, visualization PNG, stats JSON");
  ProbeFlags probe_flags;
  std::string probe_input;
  std::string probe_out;
  double gain = 20.0;
  add_probe_flags(probe_cmd, probe_flags);
  probe_cmd->add_option("image", probe_input, "PNG or PPM image")->required();
  probe_cmd->add_option("--out", probe_out, "Output prefix (default: image stem)");
  probe_cmd->add_option("--gain", gain, "Visualization gain")->capture_default_str();
  probe_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");

  // stats
  auto* stats_cmd = app.add_subcommand("stats", "Color histogram statistics of an image or directory");
  std::string stats_input;
  std::string stats_out;
  std::string stats_format = "json";
  stats_cmd->add_option("path", stats_input, "Image or directory")->required();
  stats_cmd->add_option("--out", stats_out, "Output file (default stdout)");
  stats_cmd->add_option("--format", stats_format, "json (statistics) | csv (pooled histograms)")
      ->check(CLI::IsMember({"json", "csv"}));
  stats_cmd->add_option("--threads", threads);

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "Tabulate the quantization bias profile");
  double oracle_sigma = 0.10;
  std::string oracle_units = "levels";
  int oracle_grid = 64;
  int oracle_order = 50;
  std::size_t oracle_samples = 1000000;
  std::uint64_t oracle_seed = 7;
  std::string oracle_format = "csv";
  std::string oracle_out;
  oracle_cmd->add_option("--sigma", oracle_sigma)->capture_default_str();
  oracle_cmd->add_option("--sigma-units", oracle_units)
      ->check(CLI::IsMember({"levels", "normalized"}))
      ->capture_default_str();
  oracle_cmd->add_option("--grid", oracle_grid, "Grid points on [0,1)")->capture_default_str();
  oracle_cmd->add_option("--order", oracle_order, "Fourier harmonics")->capture_default_str();
  oracle_cmd->add_option("--samples", oracle_samples, "Monte-Carlo samples (0 = skip)")
      ->capture_default_str();
  oracle_cmd->add_option("--seed", oracle_seed)->capture_default_str();
  oracle_cmd->add_option("--format", oracle_format)->check(CLI::IsMember({"json", "csv"}));
  oracle_cmd->add_option("--out", oracle_out);

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the bias-oracle agreement suite");
  std::size_t verify_samples = 1000000;
  int verify_grid = 64;
  std::uint64_t verify_seed = 20240607;
  verify_cmd->add_option("--samples", verify_samples)->capture_default_str();
  verify_cmd->add_option("--grid", verify_grid)->capture_default_str();
  verify_cmd->add_option("--seed", verify_seed)->capture_default_str();

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
  SynthFlags synth_flags;
  std::string synth_out;
  synth_cmd->add_option("--count", synth_flags.count, "Images per class")->capture_default_str();
  synth_cmd->add_option("--seed", synth_flags.seed)->capture_default_str();
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  add_synth_flags(synth_cmd, synth_flags);
  synth_cmd->add_option("--threads", threads);

  // train
  auto* train_cmd = app.add_subcommand("train", "Train the detection head on a manifest");
  ProbeFlags train_probe;
  TrainingHyper hyper;
  std::string train_manifest;
  std::string train_out;
  std::string train_branches = "full";
  add_probe_flags(train_cmd, train_probe);
  train_cmd->add_option("--manifest", train_manifest)->required();
  train_cmd->add_option("--out", train_out, "Model JSON path")->required();
  train_cmd->add_option("--epochs", hyper.epochs)->capture_default_str();
  train_cmd->add_option("--lr", hyper.learning_rate)->capture_default_str();
  train_cmd->add_option("--batch", hyper.batch_size)->capture_default_str();
  train_cmd->add_option("--hidden", hyper.hidden_width, "Hidden width (0 = linear)")
      ->capture_default_str();
  train_cmd->add_option("--l2", hyper.l2_penalty)->capture_default_str();
  train_cmd->add_option("--train-seed", hyper.seed)->capture_default_str();
  train_cmd->add_option("--branches", train_branches, "full | image-only | color-only")
      ->check(CLI::IsMember({"full", "image-only", "color-only"}));
  train_cmd->add_option("--threads", threads);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Score images with a trained model");
  std::string predict_model;
  std::vector<std::string> predict_inputs;
  std::string predict_out;
  predict_cmd->add_option("--model", predict_model)->required();
  predict_cmd->add_option("images", predict_inputs)->required();
  predict_cmd->add_option("--out", predict_out);

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Accuracy, AP and ROC-AUC on a manifest");
  std::string eval_model;
  std::string eval_manifest;
  std::string eval_out;
  eval_cmd->add_option("--model", eval_model)->required();
  eval_cmd->add_option("--manifest", eval_manifest)->required();
  eval_cmd->add_option("--out", eval_out);
  eval_cmd->add_option("--threads", threads);

  // ablate
  auto* ablate_cmd = app.add_subcommand("ablate", "Branch and hyperparameter sweeps on synthetics");
  ProbeFlags ablate_probe;
  SynthFlags ablate_synth;
  ablate_synth.count = 200;
  ablate_synth.width = 64;
  ablate_synth.height = 64;
  std::size_t ablate_eval = 100;
  std::string ablate_format = "csv";
  std::string ablate_out;
  TrainingHyper ablate_hyper;
  add_probe_flags(ablate_cmd, ablate_probe);
  ablate_cmd->add_option("--count", ablate_synth.count, "Training images per class")
      ->capture_default_str();
  ablate_cmd->add_option("--eval-count", ablate_eval, "Held-out images per class")
      ->capture_default_str();
  ablate_cmd->add_option("--data-seed", ablate_synth.seed)->capture_default_str();
  ablate_cmd->add_option("--epochs", ablate_hyper.epochs)->capture_default_str();
  add_synth_flags(ablate_cmd, ablate_synth);
  ablate_cmd->add_option("--format", ablate_format)->check(CLI::IsMember({"json", "csv"}));
  ablate_cmd->add_option("--out", ablate_out);
  ablate_cmd->add_option("--threads", threads);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  try {
    if (probe_cmd->parsed()) {
      const ProbeConfig pc = probe_flags.config();
      const ImageBuffer image = read_image(probe_input);
      const auto result = run_probe(image, pc, threads);
      const std::string prefix =
          probe_out.empty() ? fs::path(probe_input).stem().string() : probe_out;
      write_dmap(prefix + ".dmap", result.delta);
      write_png(prefix + ".png", image.height(), image.width(), visualize(result.delta, gain));
      json j = {{"image", probe_input},
                {"height", image.height()},
                {"width", image.width()},
                {"config", to_json(pc)},
                {"stats", to_json(probe_statistics(result.delta))}};
      emit(prefix + ".json", j.dump(2) + "\n", out);
      out << "wrote " << prefix << ".dmap, " << prefix << ".png, " << prefix << ".json\n";
      return kExitOk;
    }

    if (stats_cmd->parsed()) {
      const auto files = collect_images(stats_input);
      std::vector<ImageBuffer> images;
      images.reserve(files.size());
      for (const auto& f : files) images.push_back(read_image(f));
      const auto corpus = corpus_summary(images, threads);
      std::ostringstream text;
      if (stats_format == "csv") {
        text << "bin,r,g,b,hue\n";
        for (int b = 0; b < kRgbBins; ++b) {
          text << b << ',' << full_precision(corpus.pooled.rgb[0][b]) << ','
               << full_precision(corpus.pooled.rgb[1][b]) << ','
               << full_precision(corpus.pooled.rgb[2][b]) << ',';
          if (b < kHueBins) text << full_precision(corpus.pooled.hue[b]);
          text << '\n';
        }
      } else {
        json per_image = json::array();
        for (std::size_t i = 0; i < files.size(); ++i) {
          json entry = to_json(corpus.per_image[i]);
          entry["path"] = files[i].string();
          per_image.push_back(std::move(entry));
        }
        json j = {{"images", per_image},
                  {"corpus",
                   {{"count", files.size()},
                    {"mean", to_json(corpus.mean)},
                    {"std", to_json(corpus.stddev)},
                    {"pooled", to_json(corpus.pooled_summary)},
                    {"pooled_hue_excluded_fraction", corpus.pooled.hue_excluded_fraction}}}};
        text << j.dump(2) << '\n';
      }
      emit(stats_out, text.str(), out);
      return kExitOk;
    }

    if (oracle_cmd->parsed()) {
      const double sigma = sigma_to_levels(oracle_sigma, parse_sigma_units(oracle_units));
      const auto profile =
          compute_bias_profile(sigma, oracle_grid, oracle_order, oracle_samples, oracle_seed);
      std::ostringstream text;
      if (oracle_format == "json") {
        json mc = nullptr;
        if (profile.monte_carlo) {
          mc = json::array();
          for (const auto& e : *profile.monte_carlo) {
            mc.push_back({{"estimate", e.estimate}, {"standard_error", e.standard_error}});
          }
        }
        json j = {{"sigma_levels", profile.sigma_levels},
                  {"fourier_order", profile.fourier_order},
                  {"x", profile.x_grid},
                  {"exact", profile.exact},
                  {"fourier", profile.fourier},
                  {"monte_carlo", mc}};
        text << j.dump(2) << '\n';
      } else {
        text << "x,exact,fourier,mc_estimate,mc_stderr\n";
        for (std::size_t i = 0; i < profile.x_grid.size(); ++i) {
          text << full_precision(profile.x_grid[i]) << ',' << full_precision(profile.exact[i])
               << ',' << full_precision(profile.fourier[i]) << ',';
          if (profile.monte_carlo) {
            text << full_precision((*profile.monte_carlo)[i].estimate) << ','
                 << full_precision((*profile.monte_carlo)[i].standard_error);
          } else {
            text << ',';
          }
          text << '\n';
        }
      }
      emit(oracle_out, text.str(), out);
      return kExitOk;
    }

    if (verify_cmd->parsed()) {
      const auto checks = verify_bias_oracles(verify_samples, verify_grid, verify_seed);
      bool ok = true;
      for (const auto& c : checks) {
        out << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
      }
      return ok ? kExitOk : kExitVerification;
    }

    if (synth_cmd->parsed()) {
      const auto [real, fake] = synth_flags.templates();
      const auto ds = gen_dataset(synth_flags.count, real, fake, synth_flags.seed, threads);
      const auto manifest = save_dataset(ds, synth_out);
      out << "wrote " << ds.size() << " images and " << manifest.string() << '\n';
      return kExitOk;
    }

    if (train_cmd->parsed()) {
      const ProbeConfig pc = train_probe.config();
      const auto ds = load_dataset(train_manifest);
      const auto model = train(ds, pc, hyper, parse_branches(train_branches), threads);
      save_model(train_out, model);
      json j = {{"model", train_out},
                {"feature_spec_id", model.feature_spec_id},
                {"items", ds.size()},
                {"initial_loss", model.loss_trajectory.front()},
                {"final_loss", model.loss_trajectory.back()}};
      out << j.dump(2) << '\n';
      return kExitOk;
    }

    if (predict_cmd->parsed()) {
      const auto model = load_model(predict_model);
      json results = json::array();
      for (const auto& path : predict_inputs) {
        const double p = predict(model, read_image(path), model.probe_config);
        results.push_back({{"path", path}, {"score", p}, {"label", p >= 0.5 ? "fake" : "real"}});
      }
      emit(predict_out, results.dump(2) + "\n", out);
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      const auto model = load_model(eval_model);
      const auto ds = load_dataset(eval_manifest);
      const auto report = evaluate(model, ds, model.probe_config, threads);
      json j = {{"items", ds.size()},
                {"accuracy", report.accuracy},
                {"average_precision", optional_json(report.average_precision)},
                {"roc_auc", optional_json(report.roc_auc)}};
      if (!report.undefined_reason.empty()) {
        j["undefined_reason"] = report.undefined_reason;
        err << "warning: " << report.undefined_reason << '\n';
      }
      emit(eval_out, j.dump(2) + "\n", out);
      return kExitOk;
    }

    if (ablate_cmd->parsed()) {
      const SigmaUnits units = parse_sigma_units(ablate_probe.units);
      AblationPlan plan;
      plan.base = ablate_probe.config();
      plan.replica_sweep = {20, 30, 50};
      for (double s : {0.05, 0.10, 0.20}) plan.sigma_sweep.push_back(sigma_to_levels(s, units));
      plan.hyper = ablate_hyper;
      const auto [real, fake] = ablate_synth.templates();
      const auto train_set = gen_dataset(ablate_synth.count, real, fake, ablate_synth.seed, threads);
      const auto test_set = gen_dataset(ablate_eval, real, fake, ablate_synth.seed + 1, threads);
      const auto rows = run_ablation(train_set, test_set, plan, threads);
      std::ostringstream text;
      if (ablate_format == "json") {
        json arr = json::array();
        for (const auto& r : rows) {
          arr.push_back({{"group", r.group},
                         {"model", branches_name(r.branches)},
                         {"sigma_levels", r.sigma_levels},
                         {"replicas", r.replicas},
                         {"accuracy", r.accuracy},
                         {"roc_auc", r.roc_auc}});
        }
        text << arr.dump(2) << '\n';
      } else {
        text << "group,model,sigma_levels,replicas,accuracy,roc_auc\n";
        for (const auto& r : rows) {
          text << r.group << ',' << branches_name(r.branches) << ','
               << full_precision(r.sigma_levels) << ',' << r.replicas << ','
               << full_precision(r.accuracy) << ',' << full_precision(r.roc_auc) << '\n';
        }
      }
      emit(ablate_out, text.str(), out);
      return kExitOk;
    }
  } catch (const TrainingFailure& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace nqprobe
