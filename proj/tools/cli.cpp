// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dysflux/datasets.hpp"
#include "dysflux/error.hpp"
#include "dysflux/files.hpp"
#include "dysflux/gradcheck.hpp"
#include "dysflux/metrics.hpp"
#include "dysflux/synthetic.hpp"
#include "dysflux/training.hpp"

namespace dysflux::cli {
namespace {

namespace fs = std::filesystem;
using Logger = std::shared_ptr<spdlog::logger>;

constexpr const char* kNotApplicable = "n/a";

struct Options {
  // Inputs and outputs.
  std::vector<std::string> manifests;
  std::string features_dir;
  std::string out;
  std::string split;
  std::string checkpoint;
  std::string warm_start;
  std::optional<int> binarize_threshold;
  // Training.
  std::uint64_t seed = 0;
  double lr = TrainConfig{}.learning_rate;
  std::size_t batch_size = TrainConfig{}.batch_size;
  std::size_t max_epochs = TrainConfig{}.max_epochs;
  std::size_t patience = TrainConfig{}.patience;
  double weight_decay = TrainConfig{}.weight_decay;
  double w_main = LossConfig{}.w_main;
  double alpha = LossConfig{}.alpha;
  double gamma = LossConfig{}.gamma;
  std::string loss = to_string(LossConfig{}.main_loss_kind);
  std::string aux_task = to_string(TrainConfig{}.aux_task);
  std::string class_set;  // empty: the manifest's class set
  std::string monitor = to_string(TrainConfig{}.monitor);
  bool mask_mod = false;
  bool no_projection = false;
  // Evaluation.
  double threshold = 0.5;
  // Grid search.
  std::string grid;
  std::size_t jobs = 1;
  // Merge.
  std::string merge_name = "custom";
  std::string merged_name;
  // Gradient check.
  std::size_t seeds = 20;
  double tolerance = 1e-4;
  // Synthetic corpus.
  SyntheticSpec synth;
};

std::string fixed(double v, int digits) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string general(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

/// First line of every report file: toolkit version, seed, decision threshold
/// and binarization rule, followed by command-specific fields.
std::string report_header(const std::string& command, const std::string& seed,
                          const std::string& threshold,
                          const std::string& binarization,
                          const std::vector<std::string>& extra = {}) {
  std::string line = std::string("# dysflux ") + DYSFLUX_VERSION + "\tcommand=" +
                     command + "\tseed=" + seed + "\tthreshold=" + threshold +
                     "\tbinarization=" + binarization;
  for (const auto& e : extra) line += "\t" + e;
  return line + "\n";
}

/// Prints `report` and, when an output path is given, writes it atomically.
void emit(const std::string& report, const std::string& path,
          std::ostream& out, const Logger& log) {
  out << report;
  if (!path.empty()) {
    write_file_atomic(path, report);
    log->info("wrote {}", path);
  }
}

Json base_options_json(const Options& o) {
  Json j = Json::object();
  j["manifest"] = o.manifests;
  j["features_dir"] = o.features_dir;
  j["out"] = o.out;
  j["split"] = o.split;
  j["seed"] = o.seed;
  j["binarize_threshold"] =
      o.binarize_threshold ? Json(*o.binarize_threshold) : Json(nullptr);
  return j;
}

void log_config(const Logger& log, const std::string& command, const Json& j) {
  log->info("dysflux {} {}: resolved configuration {}", DYSFLUX_VERSION,
            command, j.dump());
}

LoadOptions load_options(const Options& o) {
  LoadOptions options;
  options.binarize_threshold = o.binarize_threshold;
  return options;
}

Manifest load_single(const Options& o) {
  if (o.manifests.size() != 1) {
    throw ConfigError("this command takes exactly one --manifest");
  }
  return load_manifest(o.manifests.front(), load_options(o));
}

TrainConfig resolve_train_config(const Options& o, const Manifest& manifest) {
  TrainConfig config;
  config.learning_rate = o.lr;
  config.batch_size = o.batch_size;
  config.max_epochs = o.max_epochs;
  config.patience = o.patience;
  config.weight_decay = o.weight_decay;
  config.loss.w_main = o.w_main;
  config.loss.alpha = o.alpha;
  config.loss.gamma = o.gamma;
  config.loss.main_loss_kind = parse_main_loss_kind(o.loss);
  config.aux_task = parse_aux_task(o.aux_task);
  config.class_set =
      o.class_set.empty() ? manifest.class_set : parse_class_set(o.class_set);
  config.seed = o.seed;
  config.monitor = parse_monitor(o.monitor);
  config.mask_mod_for_english = o.mask_mod;
  config.project_qkv = !o.no_projection;
  if (config.loss.main_loss_kind == MainLossKind::weighted_bce) {
    // Inverse-frequency weights over the training split, in model order.
    const auto all = inverse_frequency_weights(manifest, Split::train);
    std::vector<double> weights;
    for (std::size_t c = 0; c < num_classes(config.class_set); ++c) {
      weights.push_back(all[label_index(config.class_set, c)]);
    }
    config.loss.class_weights = std::move(weights);
  }
  config.validate();
  return config;
}

std::optional<TrainInit> resolve_init(const Options& o,
                                      const TrainConfig& config,
                                      const Manifest& manifest,
                                      const FeatureSource& features,
                                      const Logger& log) {
  if (o.warm_start.empty()) return std::nullopt;
  const Checkpoint source = load_checkpoint(o.warm_start);
  const auto train = manifest.select(Split::train);
  if (train.empty()) throw DataError("manifest has no train clips");
  const Tensor probe = features.load(train.front()->clip_id);
  log->info("warm start from {} ({})", o.warm_start, source.describe());
  return warm_start(source, config, probe.dim(0), probe.dim(2));
}

std::string history_tsv(const Checkpoint& ck, const Manifest& manifest) {
  std::string s = report_header(
      "train", std::to_string(ck.config.seed), kNotApplicable,
      manifest.binarization_rule(),
      {"manifest=" + manifest.name, "class_set=" + to_string(ck.config.class_set),
       "best_epoch=" + std::to_string(ck.best_epoch)});
  s += "epoch\ttrain_total\ttrain_main\ttrain_aux\tdev_total\tdev_main\tdev_aux\t"
       "monitored\n";
  const auto& init = ck.initial_train;
  s += "0\t" + fixed(init.total, 8) + "\t" + fixed(init.main, 8) + "\t" +
       fixed(init.aux, 8) + "\t-\t-\t-\t-\n";
  for (const auto& e : ck.history) {
    s += std::to_string(e.epoch) + "\t" + fixed(e.train.total, 8) + "\t" +
         fixed(e.train.main, 8) + "\t" + fixed(e.train.aux, 8) + "\t" +
         fixed(e.dev.total, 8) + "\t" + fixed(e.dev.main, 8) + "\t" +
         fixed(e.dev.aux, 8) + "\t" + fixed(e.monitored, 8) + "\n";
  }
  return s;
}

// ---------------------------------------------------------------- commands

int cmd_validate(const Options& o, std::ostream& out, const Logger& log) {
  Json j = base_options_json(o);
  log_config(log, "validate", j);
  if (o.manifests.size() != 1) {
    throw ConfigError("validate takes exactly one --manifest");
  }
  const std::string& path = o.manifests.front();
  std::optional<Manifest> manifest;
  std::vector<std::string> issues;
  try {
    manifest = load_manifest(path, load_options(o));
  } catch (const ValidationError& e) {
    issues = e.issues();
  }
  std::string report = report_header(
      "validate", kNotApplicable, kNotApplicable,
      manifest ? manifest->binarization_rule() : std::string(kNotApplicable),
      {"manifest=" + (manifest ? manifest->name : path)});
  bool ok = issues.empty();
  if (manifest) {
    report += "records\t" + std::to_string(manifest->records.size()) + "\n";
  }
  report += std::string("invariants\t") + (issues.empty() ? "PASS" : "FAIL") + "\n";
  for (const auto& issue : issues) report += "issue\t" + issue + "\n";
  if (manifest) {
    const SpeakerReport speakers = validate_speaker_exclusivity(*manifest);
    report += std::string("speaker_exclusivity\t") +
              (speakers.passed() ? "PASS" : "FAIL") + "\n";
    for (const auto& leak : speakers.leaks) {
      std::vector<std::string> splits;
      for (Split s : leak.splits) splits.push_back(to_string(s));
      report += "leak\t" + leak.dataset_id + "\t" + leak.speaker_id + "\t" +
                join(splits, ",") + "\n";
      log->error("speaker {} of {} appears in splits {}", leak.speaker_id,
                 leak.dataset_id, join(splits, ","));
    }
    ok = ok && speakers.passed();
  } else {
    report += "speaker_exclusivity\tNOT_RUN\n";
  }
  report += std::string("result\t") + (ok ? "PASS" : "FAIL") + "\n";
  emit(report, o.out, out, log);
  return ok ? kExitOk : kExitValidation;
}

int cmd_stats(const Options& o, std::ostream& out, const Logger& log) {
  log_config(log, "stats", base_options_json(o));
  const Manifest manifest = load_single(o);
  std::vector<std::pair<std::string, std::optional<Split>>> columns;
  if (o.split.empty()) {
    columns = {{"all", std::nullopt},
               {"train", Split::train},
               {"dev", Split::dev},
               {"test", Split::test}};
  } else {
    const Split s = parse_split(o.split);
    columns = {{to_string(s), s}};
  }
  std::vector<LabelDistribution> dists;
  std::vector<Cooccurrence> coocs;
  for (const auto& [name, split] : columns) {
    dists.push_back(label_distribution(manifest, split));
    coocs.push_back(cooccurrence_stats(manifest, split));
  }

  std::string report = report_header(
      "stats", kNotApplicable, kNotApplicable, manifest.binarization_rule(),
      {"manifest=" + manifest.name, "dataset=" + manifest.dataset_id,
       "class_set=" + to_string(manifest.class_set)});
  report += "class";
  for (const auto& c : columns) report += "\t" + c.first;
  report += "\n";
  for (std::size_t k = 0; k < dists.front().classes.size(); ++k) {
    report += dists.front().classes[k].name;
    for (const auto& d : dists) {
      report += "\t" + (d.empty() ? std::string("-") : fixed(d.classes[k].percent, 1));
    }
    report += "\n";
  }
  report += "total";
  for (const auto& d : dists) report += "\t" + std::to_string(d.total);
  report += "\nmulti_label";
  for (const auto& c : coocs) {
    report += "\t" + (c.total == 0 ? std::string("-") : fixed(100.0 * c.fraction, 1));
  }
  report += "\n";
  emit(report, o.out, out, log);
  return kExitOk;
}

int cmd_merge(const Options& o, std::ostream& out, const Logger& log) {
  Json j = base_options_json(o);
  j["name"] = o.merge_name;
  j["merged_name"] = o.merged_name;
  log_config(log, "merge", j);
  if (o.manifests.empty()) throw ConfigError("merge needs at least one --manifest");
  if (o.out.empty()) throw ConfigError("merge needs --out");
  std::vector<Manifest> inputs;
  for (const auto& path : o.manifests) {
    inputs.push_back(load_manifest(path, load_options(o)));
  }
  const MergeName name = parse_merge_name(o.merge_name);
  const Manifest merged = merge(inputs, name, o.merged_name.empty() ? "custom" : o.merged_name);
  save_manifest(merged, o.out);
  out << "merged\t" << merged.name << "\t" << to_string(merged.class_set) << "\t"
      << merged.records.size() << "\n";
  log->info("wrote {} ({} records)", o.out, merged.records.size());
  return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, const Logger& log) {
  if (o.features_dir.empty()) throw ConfigError("train needs --features-dir");
  if (o.out.empty()) throw ConfigError("train needs --out");
  const Manifest manifest = load_single(o);
  const TrainConfig config = resolve_train_config(o, manifest);
  Json j = base_options_json(o);
  j["warm_start"] = o.warm_start;
  j["config"] = config.to_json();
  log_config(log, "train", j);

  const DirectoryFeatures features(o.features_dir);
  const auto init = resolve_init(o, config, manifest, features, log);
  const Checkpoint ck =
      train(config, manifest, features, init, [&](const EpochRecord& e) {
        log->info("epoch {}: train {:.6f} dev {:.6f} monitored {:.6f}", e.epoch,
                  e.train.total, e.dev.total, e.monitored);
      });
  save_checkpoint(ck, o.out);
  const std::string history = history_tsv(ck, manifest);
  write_file_atomic(fs::path(o.out) / "history.tsv", history);
  out << history;
  log->info("best epoch {} of {}; checkpoint in {}", ck.best_epoch,
            ck.history.size(), o.out);
  return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, const Logger& log) {
  if (o.checkpoint.empty()) throw ConfigError("evaluate needs --checkpoint");
  if (o.features_dir.empty()) throw ConfigError("evaluate needs --features-dir");
  Json j = base_options_json(o);
  j["checkpoint"] = o.checkpoint;
  j["threshold"] = o.threshold;
  const Split split = o.split.empty() ? Split::test : parse_split(o.split);
  j["split"] = to_string(split);
  log_config(log, "evaluate", j);

  const Manifest manifest = load_single(o);
  const Checkpoint ck = load_checkpoint(o.checkpoint);
  const DirectoryFeatures features(o.features_dir);
  const MetricsReport report = evaluate(ck, manifest, split, features, o.threshold);
  const std::string tsv = report.to_tsv();
  out << tsv;
  if (!o.out.empty()) {
    const fs::path dir(o.out);
    write_file_atomic(dir / "report.tsv", tsv);
    write_file_atomic(dir / "report.json", report.to_json().dump(2) + "\n");
    log->info("wrote {}", (dir / "report.tsv").string());
  }
  log->info("macro F1 {}", report.metrics.macro_f1
                                ? fixed(*report.metrics.macro_f1, 4)
                                : std::string("N/A"));
  return kExitOk;
}

int cmd_grid_search(const Options& o, std::ostream& out, const Logger& log) {
  if (o.features_dir.empty()) throw ConfigError("grid-search needs --features-dir");
  if (o.out.empty()) throw ConfigError("grid-search needs --out");
  if (o.jobs == 0) throw ConfigError("--jobs must be at least 1");
  const Manifest manifest = load_single(o);
  const TrainConfig base = resolve_train_config(o, manifest);
  const Grid grid = o.grid.empty() ? Grid::standard() : Grid::parse(o.grid);
  Json j = base_options_json(o);
  j["warm_start"] = o.warm_start;
  j["jobs"] = o.jobs;
  j["grid"] = {{"w_main", grid.w_main}, {"alpha", grid.alpha}, {"gamma", grid.gamma}};
  j["config"] = base.to_json();
  log_config(log, "grid-search", j);

  const DirectoryFeatures features(o.features_dir);
  const auto init = resolve_init(o, base, manifest, features, log);
  const GridResult result =
      grid_search(base, manifest, features, grid, o.jobs, init, [&](const GridCell& c) {
        log->info("cell w={} alpha={} gamma={}: loss {:.6f} (best epoch {})",
                  c.w_main, c.alpha, c.gamma, c.monitored, c.best_epoch);
      });

  std::string report = report_header(
      "grid-search", std::to_string(base.seed), kNotApplicable,
      manifest.binarization_rule(),
      {"manifest=" + manifest.name, "cells=" + std::to_string(grid.size()),
       "monitor=" + to_string(base.monitor)});
  report += "rank\tw_main\talpha\tgamma\tmonitored\tbest_epoch\tepochs_run\n";
  for (std::size_t i = 0; i < result.ranked.size(); ++i) {
    const GridCell& c = result.ranked[i];
    report += std::to_string(i + 1) + "\t" + general(c.w_main) + "\t" +
              general(c.alpha) + "\t" + general(c.gamma) + "\t" +
              fixed(c.monitored, 8) + "\t" + std::to_string(c.best_epoch) + "\t" +
              std::to_string(c.epochs_run) + "\n";
  }
  const fs::path dir(o.out);
  save_checkpoint(result.best, dir / "best");
  write_file_atomic(dir / "grid.tsv", report);
  out << report;
  log->info("best cell w={} alpha={} gamma={}; checkpoint in {}",
            result.best_config.loss.w_main, result.best_config.loss.alpha,
            result.best_config.loss.gamma, (dir / "best").string());
  return kExitOk;
}

int cmd_gradcheck(const Options& o, std::ostream& out, const Logger& log) {
  GradientSuiteOptions options;
  for (std::size_t i = 0; i < o.seeds; ++i) options.seeds.push_back(o.seed + i);
  options.loss.alpha = o.alpha;
  options.loss.gamma = o.gamma;
  options.loss.w_main = o.w_main;
  Json j = Json::object();
  j["seed"] = o.seed;
  j["seeds"] = o.seeds;
  j["tolerance"] = o.tolerance;
  j["layers"] = options.layers;
  j["width"] = options.width;
  j["frames"] = options.frames;
  j["classes"] = options.classes;
  j["eps"] = options.eps;
  j["loss"] = {{"w_main", o.w_main}, {"alpha", o.alpha}, {"gamma", o.gamma}};
  j["out"] = o.out;
  log_config(log, "gradcheck", j);
  if (o.seeds == 0) throw ConfigError("--seeds must be at least 1");
  if (!(o.tolerance > 0.0)) throw ConfigError("--tolerance must be positive");
  options.loss.validate();

  const GradientSuite suite = run_gradient_suite(options);
  std::string report = report_header("gradcheck", std::to_string(o.seed),
                                     kNotApplicable, kNotApplicable,
                                     {"tolerance=" + general(o.tolerance)});
  report += "seed\tlayers\tframes\twidth\tclasses\tmax_rel_error\n";
  for (const auto& c : suite.cases) {
    char err[32];
    std::snprintf(err, sizeof err, "%.3e", c.check.max_rel_error);
    report += std::to_string(c.seed) + "\t" + std::to_string(c.layers) + "\t" +
              std::to_string(c.frames) + "\t" + std::to_string(c.width) + "\t" +
              std::to_string(c.classes) + "\t" + err + "\n";
  }
  char worst[32];
  std::snprintf(worst, sizeof worst, "%.3e", suite.worst);
  const bool ok = suite.passed(o.tolerance);
  report += std::string("worst\t") + worst + "\n";
  report += std::string("result\t") + (ok ? "PASS" : "FAIL") + "\n";
  emit(report, o.out, out, log);
  return ok ? kExitOk : kExitValidation;
}

int cmd_synth(const Options& o, std::ostream& out, const Logger& log) {
  if (o.out.empty()) throw ConfigError("synth needs --out");
  const SyntheticSpec& s = o.synth;
  Json j = Json::object();
  j["seed"] = o.seed;
  j["out"] = o.out;
  j["speakers"] = s.speakers;
  j["clips_per_speaker"] = s.clips_per_speaker;
  j["train_speakers"] = s.train_speakers;
  j["dev_speakers"] = s.dev_speakers;
  j["layers"] = s.layers;
  j["frames"] = s.frames;
  j["width"] = s.width;
  j["separation"] = s.separation;
  log_config(log, "synth", j);
  write_synthetic_corpus(s, o.seed, o.out);
  out << "synthetic\t" << (fs::path(o.out) / "manifest.jsonl").string() << "\t"
      << s.speakers * s.clips_per_speaker << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------ wiring

Logger make_logger(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err, true);
  auto log = std::make_shared<spdlog::logger>("dysflux", std::move(sink));
  log->set_pattern("[%Y-%m-%d %H:%M:%S.%e] [%l] %v");
  spdlog::level::level_enum level = spdlog::level::info;
  if (const char* env = std::getenv("DYSFLUX_LOG"); env && *env) {
    std::string name(env);
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (name == "warning") name = "warn";
    level = spdlog::level::from_str(name);
    if (level == spdlog::level::off && name != "off") level = spdlog::level::info;
  }
  log->set_level(level);
  log->flush_on(spdlog::level::trace);
  return log;
}

void add_manifest(CLI::App* app, Options& o, bool many = false) {
  auto* opt = app->add_option("--manifest", o.manifests,
                              many ? "Input manifest (repeatable)" : "Manifest (JSON lines)");
  opt->required();
  if (!many) opt->expected(1);
  app->add_option("--binarize-threshold", o.binarize_threshold,
                  "Annotator votes needed for a positive label (default: manifest header)");
}

void add_training(CLI::App* app, Options& o) {
  app->add_option("--features-dir", o.features_dir, "Directory of .dyfh feature files")
      ->required();
  app->add_option("--out", o.out, "Output directory")->required();
  app->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  app->add_option("--lr", o.lr, "AdamW learning rate")->capture_default_str();
  app->add_option("--batch-size", o.batch_size, "Clips per batch")->capture_default_str();
  app->add_option("--max-epochs", o.max_epochs, "Epoch limit")->capture_default_str();
  app->add_option("--patience", o.patience, "Early-stopping patience")
      ->capture_default_str();
  app->add_option("--weight-decay", o.weight_decay, "AdamW decoupled weight decay")
      ->capture_default_str();
  app->add_option("--w-main", o.w_main, "Main-task weight in [0, 1]")->capture_default_str();
  app->add_option("--alpha", o.alpha, "Focal-loss alpha")->capture_default_str();
  app->add_option("--gamma", o.gamma, "Focal-loss gamma")->capture_default_str();
  app->add_option("--loss", o.loss, "Main loss")
      ->check(CLI::IsMember({"focal", "weighted_bce"}))
      ->capture_default_str();
  app->add_option("--aux-task", o.aux_task, "Auxiliary task")
      ->check(CLI::IsMember({"any", "gender"}))
      ->capture_default_str();
  app->add_option("--class-set", o.class_set, "Model classes (default: manifest's)")
      ->check(CLI::IsMember({"six", "seven", "SIX", "SEVEN"}));
  app->add_option("--monitor", o.monitor, "Dev loss used for early stopping")
      ->check(CLI::IsMember({"total", "main"}))
      ->capture_default_str();
  app->add_option("--warm-start", o.warm_start, "Checkpoint directory to start from");
  app->add_flag("--mask-mod", o.mask_mod,
                "Exclude Mod from the loss on English clips instead of using them as "
                "negatives");
  app->add_flag("--no-projection", o.no_projection,
                "Attend over the weighted layer sum without Q/K/V projections");
}

int dispatch(CLI::App& app, const Options& o, std::ostream& out, const Logger& log) {
  const auto* sub = app.get_subcommands().front();
  const std::string& name = sub->get_name();
  if (name == "validate") return cmd_validate(o, out, log);
  if (name == "stats") return cmd_stats(o, out, log);
  if (name == "merge") return cmd_merge(o, out, log);
  if (name == "train") return cmd_train(o, out, log);
  if (name == "evaluate") return cmd_evaluate(o, out, log);
  if (name == "grid-search") return cmd_grid_search(o, out, log);
  if (name == "gradcheck") return cmd_gradcheck(o, out, log);
  if (name == "synth") return cmd_synth(o, out, log);
  throw ConfigError("unknown command " + name);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  Options o;
  CLI::App app("dysflux: multi-label stuttering detection on speech-model hidden states",
               "dysflux");
  app.require_subcommand(1);
  app.set_version_flag("--version", DYSFLUX_VERSION);

  auto* validate = app.add_subcommand(
      "validate", "Check manifest invariants and speaker-exclusive splits");
  add_manifest(validate, o);
  validate->add_option("--out", o.out, "Also write the report to this file");

  auto* stats = app.add_subcommand(
      "stats", "Per-class label distribution and co-occurrence");
  add_manifest(stats, o);
  stats->add_option("--split", o.split, "Restrict to one split")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  stats->add_option("--out", o.out, "Also write the report to this file");

  auto* merge_cmd = app.add_subcommand("merge", "Combine manifests into one");
  add_manifest(merge_cmd, o, /*many=*/true);
  merge_cmd->add_option("--name", o.merge_name, "ALL-EN, Multi-S, Multi or custom")
      ->capture_default_str();
  merge_cmd->add_option("--merged-name", o.merged_name, "Name of a custom merge");
  merge_cmd->add_option("--out", o.out, "Output manifest")->required();

  auto* train_cmd = app.add_subcommand("train", "Train a classification head");
  add_manifest(train_cmd, o);
  add_training(train_cmd, o);

  auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-class precision/recall/F1");
  add_manifest(evaluate_cmd, o);
  evaluate_cmd->add_option("--checkpoint", o.checkpoint, "Checkpoint directory")
      ->required();
  evaluate_cmd->add_option("--features-dir", o.features_dir,
                           "Directory of .dyfh feature files")
      ->required();
  evaluate_cmd->add_option("--split", o.split, "Split to score (default: test)")
      ->check(CLI::IsMember({"train", "dev", "test"}));
  evaluate_cmd->add_option("--threshold", o.threshold, "Decision threshold")
      ->capture_default_str();
  evaluate_cmd->add_option("--out", o.out, "Directory for report.tsv and report.json");

  auto* grid_cmd = app.add_subcommand(
      "grid-search", "Train one head per (w_main, alpha, gamma) cell");
  add_manifest(grid_cmd, o);
  add_training(grid_cmd, o);
  grid_cmd->add_option("--grid", o.grid,
                       "\"<w list>;<alpha list>;<gamma list>\", comma-separated "
                       "(default: the 135-cell grid)");
  grid_cmd->add_option("--jobs", o.jobs, "Concurrent cells")->capture_default_str();

  auto* gradcheck = app.add_subcommand(
      "gradcheck", "Finite-difference check of the head and loss gradients");
  gradcheck->add_option("--seed", o.seed, "First seed")->capture_default_str();
  gradcheck->add_option("--seeds", o.seeds, "Number of seeds")->capture_default_str();
  gradcheck->add_option("--tolerance", o.tolerance, "Maximum relative error")
      ->capture_default_str();
  gradcheck->add_option("--w-main", o.w_main, "Main-task weight")->capture_default_str();
  gradcheck->add_option("--alpha", o.alpha, "Focal-loss alpha")->capture_default_str();
  gradcheck->add_option("--gamma", o.gamma, "Focal-loss gamma")->capture_default_str();
  gradcheck->add_option("--out", o.out, "Also write the report to this file");

  auto* synth = app.add_subcommand(
      "synth", "Write a small separable synthetic corpus (manifest + features)");
  synth->add_option("--out", o.out, "Output directory")->required();
  synth->add_option("--seed", o.seed, "Random seed")->capture_default_str();
  synth->add_option("--speakers", o.synth.speakers)->capture_default_str();
  synth->add_option("--clips-per-speaker", o.synth.clips_per_speaker)
      ->capture_default_str();
  synth->add_option("--train-speakers", o.synth.train_speakers)->capture_default_str();
  synth->add_option("--dev-speakers", o.synth.dev_speakers)->capture_default_str();
  synth->add_option("--layers", o.synth.layers)->capture_default_str();
  synth->add_option("--frames", o.synth.frames)->capture_default_str();
  synth->add_option("--width", o.synth.width)->capture_default_str();
  synth->add_option("--separation", o.synth.separation)->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << DYSFLUX_VERSION << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    err << "dysflux: " << e.what() << "\n\n"
        << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  const Logger log = make_logger(err);
  try {
    return dispatch(app, o, out, log);
  } catch (const ValidationError& e) {
    log->error("{}", e.what());
    return kExitValidation;
  } catch (const ConfigError& e) {
    log->error("{}", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log->error("{}", e.what());
    return kExitRuntime;
  }
}

}  // namespace dysflux::cli
