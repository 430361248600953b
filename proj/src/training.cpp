// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/training.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <charconv>
#include <cmath>
#include <sstream>
#include <thread>
#include <tuple>

#include "dysflux/error.hpp"
#include "dysflux/features_io.hpp"
#include "dysflux/files.hpp"

namespace dysflux {
namespace {

namespace fs = std::filesystem;

constexpr int kCheckpointFormat = 1;

std::vector<Tensor*> fields_of(HeadParams& p) {
  std::vector<Tensor*> out;
  p.for_each([&](std::string_view, Tensor& t) { out.push_back(&t); });
  return out;
}

std::vector<const Tensor*> fields_of(const HeadParams& p) {
  std::vector<const Tensor*> out;
  p.for_each([&](std::string_view, const Tensor& t) { out.push_back(&t); });
  return out;
}

Json loss_to_json(const LossConfig& l) {
  Json j = Json::object();
  j["alpha"] = l.alpha;
  j["gamma"] = l.gamma;
  j["w_main"] = l.w_main;
  j["main_loss"] = to_string(l.main_loss_kind);
  j["class_weights"] = l.class_weights ? Json(*l.class_weights) : Json(nullptr);
  j["aux_class_weights"] =
      l.aux_class_weights ? Json(*l.aux_class_weights) : Json(nullptr);
  return j;
}

LossConfig loss_from_json(const Json& j) {
  LossConfig l;
  l.alpha = j.at("alpha").get<double>();
  l.gamma = j.at("gamma").get<double>();
  l.w_main = j.at("w_main").get<double>();
  l.main_loss_kind = parse_main_loss_kind(j.at("main_loss").get<std::string>());
  if (j.contains("class_weights") && !j.at("class_weights").is_null()) {
    l.class_weights = j.at("class_weights").get<std::vector<double>>();
  }
  if (j.contains("aux_class_weights") && !j.at("aux_class_weights").is_null()) {
    l.aux_class_weights = j.at("aux_class_weights").get<std::vector<double>>();
  }
  return l;
}

Json split_loss_to_json(const SplitLoss& s) {
  return Json{{"total", s.total}, {"main", s.main}, {"aux", s.aux},
              {"clips", s.clips}, {"aux_clips", s.aux_clips}};
}

SplitLoss split_loss_from_json(const Json& j) {
  SplitLoss s;
  s.total = j.at("total").get<double>();
  s.main = j.at("main").get<double>();
  s.aux = j.at("aux").get<double>();
  s.clips = j.at("clips").get<std::size_t>();
  s.aux_clips = j.at("aux_clips").get<std::size_t>();
  return s;
}

double combine(double main, double aux, double w_main) {
  return mtl_loss(main, aux, w_main);
}

void require_finite(const SplitLoss& s, const std::string& what) {
  if (!std::isfinite(s.total) || !std::isfinite(s.main) || !std::isfinite(s.aux)) {
    throw DomainError("non-finite " + what + " loss; lower the learning rate");
  }
}

std::vector<double> parse_list(std::string_view text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    auto item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size()) {
      throw ConfigError(std::string("grid ") + what + " list: cannot parse '" +
                        std::string(item) + "'");
    }
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

}  // namespace

std::string to_string(AuxTask task) {
  return task == AuxTask::any ? "any" : "gender";
}

AuxTask parse_aux_task(std::string_view text) {
  if (text == "any") return AuxTask::any;
  if (text == "gender") return AuxTask::gender;
  throw ConfigError("unknown aux task '" + std::string(text) +
                    "' (expected any or gender)");
}

std::string to_string(Monitor monitor) {
  return monitor == Monitor::total ? "total" : "main";
}

Monitor parse_monitor(std::string_view text) {
  if (text == "total") return Monitor::total;
  if (text == "main") return Monitor::main;
  throw ConfigError("unknown monitor '" + std::string(text) +
                    "' (expected total or main)");
}

void TrainConfig::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw ConfigError(std::string(name) + " must be positive");
    }
  };
  positive(learning_rate, "learning_rate");
  positive(adam_eps, "adam_eps");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
  if (patience == 0 || patience > max_epochs) {
    throw ConfigError("patience must lie in [1, max_epochs]");
  }
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) {
    throw ConfigError("weight_decay must be >= 0");
  }
  for (double b : {adam_beta1, adam_beta2}) {
    if (!(b >= 0.0 && b < 1.0)) throw ConfigError("Adam betas must lie in [0, 1)");
  }
  loss.validate();
  if (loss.class_weights && loss.class_weights->size() != num_classes(class_set)) {
    throw ConfigError("class_weights has " +
                      std::to_string(loss.class_weights->size()) +
                      " entries, class set " + to_string(class_set) + " has " +
                      std::to_string(num_classes(class_set)));
  }
}

Json TrainConfig::to_json() const {
  Json j = Json::object();
  j["learning_rate"] = learning_rate;
  j["batch_size"] = batch_size;
  j["max_epochs"] = max_epochs;
  j["patience"] = patience;
  j["weight_decay"] = weight_decay;
  j["adam_beta1"] = adam_beta1;
  j["adam_beta2"] = adam_beta2;
  j["adam_eps"] = adam_eps;
  j["loss"] = loss_to_json(loss);
  j["aux_task"] = to_string(aux_task);
  j["class_set"] = to_string(class_set);
  j["seed"] = seed;
  j["monitor"] = to_string(monitor);
  j["mask_mod_for_english"] = mask_mod_for_english;
  j["project_qkv"] = project_qkv;
  return j;
}

TrainConfig TrainConfig::from_json(const Json& j) {
  try {
    TrainConfig c;
    c.learning_rate = j.at("learning_rate").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.weight_decay = j.at("weight_decay").get<double>();
    c.adam_beta1 = j.at("adam_beta1").get<double>();
    c.adam_beta2 = j.at("adam_beta2").get<double>();
    c.adam_eps = j.at("adam_eps").get<double>();
    c.loss = loss_from_json(j.at("loss"));
    c.aux_task = parse_aux_task(j.at("aux_task").get<std::string>());
    c.class_set = parse_class_set(j.at("class_set").get<std::string>());
    c.seed = j.at("seed").get<std::uint64_t>();
    c.monitor = parse_monitor(j.at("monitor").get<std::string>());
    c.mask_mod_for_english = j.at("mask_mod_for_english").get<bool>();
    c.project_qkv = j.at("project_qkv").get<bool>();
    return c;
  } catch (const Json::exception& e) {
    throw FormatError("config", std::string("train config: ") + e.what());
  }
}

AdamState AdamState::zeros_like(const HeadParams& params) {
  return AdamState{0, params.zeros_like(), params.zeros_like()};
}

void optimizer_step(HeadParams& params, const HeadGrads& grads,
                    AdamState& state, const TrainConfig& config) {
  auto p = fields_of(params);
  const auto g = fields_of(grads);
  auto m = fields_of(state.m);
  auto v = fields_of(state.v);
  for (std::size_t f = 0; f < p.size(); ++f) {
    if (g[f]->shape() != p[f]->shape() || m[f]->shape() != p[f]->shape() ||
        v[f]->shape() != p[f]->shape()) {
      throw ShapeError("optimizer_step: field " +
                       std::string(HeadParams::kFieldNames[f]) + " has shape " +
                       shape_to_string(p[f]->shape()) + ", gradient " +
                       shape_to_string(g[f]->shape()));
    }
  }
  ++state.step;
  const double b1 = config.adam_beta1;
  const double b2 = config.adam_beta2;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(b1, t);
  const double c2 = 1.0 - std::pow(b2, t);
  const double lr = config.learning_rate;
  for (std::size_t f = 0; f < p.size(); ++f) {
    const bool decay = HeadParams::kFieldNames[f] != "layer_weights";
    const double keep = decay ? 1.0 - lr * config.weight_decay : 1.0;
    auto pd = p[f]->data();
    const auto gd = g[f]->data();
    auto md = m[f]->data();
    auto vd = v[f]->data();
    for (std::size_t i = 0; i < pd.size(); ++i) {
      md[i] = b1 * md[i] + (1.0 - b1) * gd[i];
      vd[i] = b2 * vd[i] + (1.0 - b2) * gd[i] * gd[i];
      const double m_hat = md[i] / c1;
      const double v_hat = vd[i] / c2;
      pd[i] = pd[i] * keep - lr * m_hat / (std::sqrt(v_hat) + config.adam_eps);
    }
  }
}

bool EarlyStopper::update(std::size_t epoch, double loss) {
  improved_ = loss < best_;
  if (improved_) {
    best_ = loss;
    best_epoch_ = epoch;
    bad_epochs_ = 0;
  } else {
    ++bad_epochs_;
  }
  return bad_epochs_ >= patience_;
}

const EpochRecord& Checkpoint::best() const {
  for (const auto& e : history) {
    if (e.epoch == best_epoch) return e;
  }
  throw StateError("checkpoint has no record of its best epoch " +
                   std::to_string(best_epoch));
}

std::string Checkpoint::describe() const {
  std::ostringstream out;
  out << to_string(config.class_set) << " head L=" << params.num_layers()
      << " D=" << params.hidden_dim() << " C=" << params.num_classes()
      << " seed=" << config.seed << " w_main=" << config.loss.w_main
      << " alpha=" << config.loss.alpha << " gamma=" << config.loss.gamma
      << " best_epoch=" << best_epoch << "/" << history.size() << " sources=[";
  for (std::size_t i = 0; i < sources.size(); ++i) {
    out << (i ? "," : "") << sources[i];
  }
  out << "]";
  return out.str();
}

void save_checkpoint(const Checkpoint& ck, const fs::path& dir) {
  Json j = Json::object();
  j["format_version"] = kCheckpointFormat;
  j["toolkit_version"] = DYSFLUX_VERSION;
  j["class_set"] = to_string(ck.config.class_set);
  j["classes"] = class_names(ck.config.class_set);
  j["dims"] = {{"layers", ck.params.num_layers()},
               {"hidden", ck.params.hidden_dim()},
               {"classes", ck.params.num_classes()}};
  j["project_qkv"] = ck.params.project_qkv;
  Json fields = Json::array();
  ck.params.for_each([&](std::string_view name, const Tensor& t) {
    fields.push_back({{"name", name}, {"shape", t.shape()}});
  });
  j["fields"] = fields;
  j["parameter_count"] = ck.params.parameter_count();
  j["config"] = ck.config.to_json();
  Json history = Json::array();
  for (const auto& e : ck.history) {
    history.push_back({{"epoch", e.epoch},
                       {"train", split_loss_to_json(e.train)},
                       {"dev", split_loss_to_json(e.dev)},
                       {"monitored", e.monitored}});
  }
  j["history"] = history;
  j["best_epoch"] = ck.best_epoch;
  j["initial_train"] = split_loss_to_json(ck.initial_train);
  j["provenance"] = {{"sources", ck.sources}, {"lineage", ck.lineage}};

  std::string bin;
  bin.reserve(4 * ck.params.parameter_count());
  for (const double v : ck.params.flatten()) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int s = 0; s < 32; s += 8) bin.push_back(static_cast<char>((bits >> s) & 0xFFu));
  }
  fs::create_directories(dir);
  write_file_atomic(dir / "params.bin", bin);
  write_file_atomic(dir / "params.json", j.dump(2) + "\n");
}

Checkpoint load_checkpoint(const fs::path& dir) {
  Json j;
  try {
    j = Json::parse(read_file(dir / "params.json"));
  } catch (const Json::parse_error& e) {
    throw FormatError("params.json", e.what());
  }
  Checkpoint ck;
  try {
    if (j.at("format_version").get<int>() != kCheckpointFormat) {
      throw IncompatibleError("checkpoint format version " +
                              j.at("format_version").dump() + " is not supported");
    }
    ck.config = TrainConfig::from_json(j.at("config"));
    const auto& dims = j.at("dims");
    const auto L = dims.at("layers").get<std::size_t>();
    const auto D = dims.at("hidden").get<std::size_t>();
    const auto C = dims.at("classes").get<std::size_t>();
    if (C != num_classes(ck.config.class_set)) {
      throw IncompatibleError("checkpoint has " + std::to_string(C) +
                              " classes but class set " +
                              to_string(ck.config.class_set));
    }
    ck.params = make_params(L, D, C, j.at("project_qkv").get<bool>());
    for (const auto& e : j.at("history")) {
      EpochRecord r;
      r.epoch = e.at("epoch").get<std::size_t>();
      r.train = split_loss_from_json(e.at("train"));
      r.dev = split_loss_from_json(e.at("dev"));
      r.monitored = e.at("monitored").get<double>();
      ck.history.push_back(r);
    }
    ck.best_epoch = j.at("best_epoch").get<std::size_t>();
    ck.initial_train = split_loss_from_json(j.at("initial_train"));
    ck.sources = j.at("provenance").at("sources").get<std::vector<std::string>>();
    ck.lineage = j.at("provenance").at("lineage").get<std::vector<std::string>>();
  } catch (const Json::exception& e) {
    throw FormatError("params.json", std::string("params.json: ") + e.what());
  }
  const std::string bin = read_file(dir / "params.bin");
  const std::size_t n = ck.params.parameter_count();
  if (bin.size() != 4 * n) {
    throw FormatError("params.bin", "params.bin holds " + std::to_string(bin.size()) +
                                        " bytes, expected " + std::to_string(4 * n));
  }
  std::vector<double> values(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t bits = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(bin[4 * i + b]))
              << (8 * b);
    }
    values[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  ck.params.unflatten(values);
  return ck;
}

DirectoryFeatures::DirectoryFeatures(fs::path dir, std::size_t cache_bytes)
    : dir_(std::move(dir)), cache_limit_(cache_bytes) {}

Tensor DirectoryFeatures::load(const std::string& clip_id) const {
  {
    std::lock_guard lock(mutex_);
    if (const auto it = cache_.find(clip_id); it != cache_.end()) return *it->second;
  }
  auto t = std::make_shared<const Tensor>(load_hidden(dir_, clip_id));
  std::lock_guard lock(mutex_);
  const std::size_t bytes = t->size() * sizeof(double);
  if (!cache_.count(clip_id) && cached_bytes_ + bytes <= cache_limit_) {
    cache_.emplace(clip_id, t);
    cached_bytes_ += bytes;
  }
  return *t;
}

bool DirectoryFeatures::contains(const std::string& clip_id) const {
  return fs::exists(feature_path(dir_, clip_id));
}

void MemoryFeatures::add(std::string clip_id, Tensor hidden) {
  require_rank(hidden, 3, "hidden states");
  data_.insert_or_assign(std::move(clip_id), std::move(hidden));
}

Tensor MemoryFeatures::load(const std::string& clip_id) const {
  const auto it = data_.find(clip_id);
  if (it == data_.end()) throw DataError("no features for clip " + clip_id);
  return it->second;
}

bool MemoryFeatures::contains(const std::string& clip_id) const {
  return data_.count(clip_id) > 0;
}

ClipTargets make_targets(const ClipRecord& record, const TrainConfig& config) {
  ClipTargets t;
  t.labels = record.targets(config.class_set);
  if (config.mask_mod_for_english && config.class_set == ClassSet::seven &&
      is_english_dataset(record.dataset_id)) {
    t.mask.assign(t.labels.size(), 1);
    t.mask[0] = 0;
  }
  switch (config.aux_task) {
    case AuxTask::any:
      t.aux = record.any_label();
      break;
    case AuxTask::gender:
      if (record.gender == Gender::female) t.aux = 0;
      if (record.gender == Gender::male) t.aux = 1;
      break;
  }
  return t;
}

SplitLoss evaluate_loss(const HeadParams& params, const Manifest& manifest,
                        Split split, const FeatureSource& features,
                        const TrainConfig& config) {
  SplitLoss s;
  double aux_sum = 0.0;
  double main_sum = 0.0;
  for (const auto* r : manifest.select(split)) {
    const auto l = clip_objective(features.load(r->clip_id), params,
                                  make_targets(*r, config), config.loss);
    main_sum += l.main;
    if (l.has_aux) {
      aux_sum += l.aux;
      ++s.aux_clips;
    }
    ++s.clips;
  }
  if (s.clips) s.main = main_sum / static_cast<double>(s.clips);
  if (s.aux_clips) s.aux = aux_sum / static_cast<double>(s.aux_clips);
  s.total = combine(s.main, s.aux, config.loss.w_main);
  return s;
}

Checkpoint train(const TrainConfig& config, const Manifest& manifest,
                 const FeatureSource& features,
                 const std::optional<TrainInit>& init,
                 const std::function<void(const EpochRecord&)>& on_epoch) {
  config.validate();
  for (const Split split : {Split::train, Split::dev}) {
    if (manifest.select(split).empty()) {
      throw DataError("manifest " + manifest.name + " has an empty " +
                      to_string(split) + " split");
    }
  }
  std::vector<std::string> missing;
  for (const auto& r : manifest.records) {
    if (r.split != Split::test && !features.contains(r.clip_id)) {
      missing.push_back(r.clip_id);
    }
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 10); ++i) {
      list += (i ? ", " : "") + missing[i];
    }
    if (missing.size() > 10) list += ", ...";
    throw DataError("missing feature files for " + std::to_string(missing.size()) +
                    " clip(s): " + list);
  }

  const Tensor probe = features.load(manifest.select(Split::train).front()->clip_id);
  require_rank(probe, 3, "hidden states");
  const std::size_t L = probe.dim(0);
  const std::size_t D = probe.dim(2);
  const std::size_t C = num_classes(config.class_set);

  Checkpoint ck;
  ck.config = config;
  ck.sources = manifest.sources.empty() ? std::vector<std::string>{manifest.name}
                                        : manifest.sources;
  HeadParams params;
  if (init) {
    params = init->params;
    ck.lineage = init->lineage;
    if (params.num_layers() != L || params.hidden_dim() != D ||
        params.num_classes() != C || params.project_qkv != config.project_qkv) {
      throw IncompatibleError(
          "initial parameters (L=" + std::to_string(params.num_layers()) +
          ", D=" + std::to_string(params.hidden_dim()) +
          ", C=" + std::to_string(params.num_classes()) + ") do not fit features (L=" +
          std::to_string(L) + ", D=" + std::to_string(D) + ") with C=" +
          std::to_string(C));
    }
  } else {
    params = init_params(config.seed, L, D, C, config.project_qkv);
  }

  ck.initial_train = evaluate_loss(params, manifest, Split::train, features, config);
  require_finite(ck.initial_train, "initial train");
  ck.params = params;

  AdamState state = AdamState::zeros_like(params);
  EarlyStopper stopper(config.patience);
  const double w = config.loss.w_main;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const auto batches = make_batches(manifest, Split::train, config.batch_size,
                                      config.seed, epoch - 1);
    EpochRecord rec;
    rec.epoch = epoch;
    for (const auto& batch : batches) {
      std::vector<const ClipRecord*> recs;
      std::vector<ClipTargets> targets;
      std::size_t aux_n = 0;
      for (const auto& id : batch) {
        recs.push_back(manifest.find(id));
        targets.push_back(make_targets(*recs.back(), config));
        aux_n += targets.back().aux ? 1 : 0;
      }
      const double B = static_cast<double>(batch.size());
      const double main_scale = w / B;
      const double aux_scale = aux_n ? (1.0 - w) / static_cast<double>(aux_n) : 0.0;
      HeadGrads grads = params.zeros_like();
      double main_sum = 0.0;
      double aux_sum = 0.0;
      for (std::size_t i = 0; i < recs.size(); ++i) {
        const auto l = clip_objective(features.load(recs[i]->clip_id), params,
                                      targets[i], config.loss, &grads,
                                      main_scale, aux_scale);
        main_sum += l.main;
        aux_sum += l.has_aux ? l.aux : 0.0;
      }
      const double main = main_sum / B;
      const double aux = aux_n ? aux_sum / static_cast<double>(aux_n) : 0.0;
      rec.train.main += main;
      rec.train.aux += aux;
      rec.train.total += combine(main, aux, w);
      rec.train.clips += batch.size();
      rec.train.aux_clips += aux_n;
      optimizer_step(params, grads, state, config);
    }
    const double nb = static_cast<double>(batches.size());
    rec.train.main /= nb;
    rec.train.aux /= nb;
    rec.train.total /= nb;
    require_finite(rec.train, "train");

    rec.dev = evaluate_loss(params, manifest, Split::dev, features, config);
    require_finite(rec.dev, "dev");
    rec.monitored = config.monitor == Monitor::total ? rec.dev.total : rec.dev.main;
    ck.history.push_back(rec);
    const bool stop = stopper.update(epoch, rec.monitored);
    if (stopper.improved()) ck.params = params;
    if (on_epoch) on_epoch(rec);
    if (stop) break;
  }
  ck.best_epoch = stopper.best_epoch();
  return ck;
}

TrainInit warm_start(const Checkpoint& source, const TrainConfig& config,
                     std::size_t num_layers, std::size_t hidden_dim) {
  const HeadParams& src = source.params;
  if (src.num_layers() != num_layers || src.hidden_dim() != hidden_dim) {
    throw IncompatibleError(
        "warm start: checkpoint has L=" + std::to_string(src.num_layers()) +
        ", D=" + std::to_string(src.hidden_dim()) + "; features have L=" +
        std::to_string(num_layers) + ", D=" + std::to_string(hidden_dim));
  }
  if (src.project_qkv != config.project_qkv) {
    throw IncompatibleError("warm start: attention projection mode differs");
  }
  const ClassSet from = source.config.class_set;
  const ClassSet to = config.class_set;
  TrainInit out;
  out.lineage = source.lineage;
  out.lineage.push_back(source.describe());
  out.params = src;
  if (from == to) return out;

  const std::size_t C = num_classes(to);
  const HeadParams fresh =
      init_params(config.seed, num_layers, hidden_dim, C, config.project_qkv);
  Tensor weight({C, hidden_dim});
  Tensor bias({C});
  for (std::size_t c = 0; c < C; ++c) {
    const std::string_view name = kLabelNames[label_index(to, c)];
    std::optional<std::size_t> row;
    for (std::size_t k = 0; k < num_classes(from); ++k) {
      if (kLabelNames[label_index(from, k)] == name) row = k;
    }
    const Tensor& w_src = row ? src.main_weight : fresh.main_weight;
    const Tensor& b_src = row ? src.main_bias : fresh.main_bias;
    const std::size_t r = row ? *row : c;
    std::copy_n(w_src.slice(r).begin(), hidden_dim, weight.slice(c).begin());
    bias[c] = b_src[r];
  }
  out.params.main_weight = std::move(weight);
  out.params.main_bias = std::move(bias);
  return out;
}

Grid Grid::standard() {
  return Grid{{0.5, 0.6, 0.7, 0.8, 0.9},
              {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9},
              {1.0, 2.0, 3.0}};
}

Grid Grid::parse(std::string_view text) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto end = text.find(';', start);
    parts.push_back(text.substr(start, end == std::string_view::npos ? text.size() - start
                                                                     : end - start));
    if (end == std::string_view::npos) break;
    start = end + 1;
  }
  if (parts.size() != 3) {
    throw ConfigError("grid must be '<w_main list>;<alpha list>;<gamma list>'");
  }
  return Grid{parse_list(parts[0], "w_main"), parse_list(parts[1], "alpha"),
              parse_list(parts[2], "gamma")};
}

namespace {

auto cell_key(const GridCell& c) {
  const double loss =
      std::isnan(c.monitored) ? std::numeric_limits<double>::infinity() : c.monitored;
  return std::make_tuple(loss, c.w_main, c.alpha, c.gamma);
}

}  // namespace

void rank_cells(std::vector<GridCell>& cells) {
  std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
    return cell_key(a) < cell_key(b);
  });
}

GridResult grid_search(const TrainConfig& base, const Manifest& manifest,
                       const FeatureSource& features, const Grid& grid,
                       std::size_t jobs, const std::optional<TrainInit>& init,
                       const std::function<void(const GridCell&)>& on_cell) {
  if (grid.size() == 0) throw ConfigError("grid search needs a non-empty grid");
  std::vector<TrainConfig> configs;
  for (const double w : grid.w_main) {
    for (const double a : grid.alpha) {
      for (const double g : grid.gamma) {
        TrainConfig c = base;
        c.loss.w_main = w;
        c.loss.alpha = a;
        c.loss.gamma = g;
        c.validate();
        configs.push_back(c);
      }
    }
  }
  std::vector<GridCell> cells(configs.size());
  std::optional<Checkpoint> best;
  std::optional<std::size_t> best_index;
  std::exception_ptr failure;
  std::mutex mutex;
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      const std::size_t i = next++;
      if (i >= configs.size()) return;
      {
        std::lock_guard lock(mutex);
        if (failure) return;
      }
      try {
        Checkpoint ck = train(configs[i], manifest, features, init);
        GridCell cell{configs[i].loss.w_main, configs[i].loss.alpha,
                      configs[i].loss.gamma,  ck.best().monitored,
                      ck.best_epoch,          ck.history.size()};
        std::lock_guard lock(mutex);
        cells[i] = cell;
        if (!best_index || cell_key(cell) < cell_key(cells[*best_index])) {
          best = std::move(ck);
          best_index = i;
        }
        if (on_cell) on_cell(cell);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const std::size_t n_threads = std::clamp<std::size_t>(jobs, 1, configs.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  GridResult result;
  result.ranked = cells;
  rank_cells(result.ranked);
  result.best_config = configs[*best_index];
  result.best = std::move(*best);
  return result;
}

}  // namespace dysflux
