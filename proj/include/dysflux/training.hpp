// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "dysflux/datasets.hpp"
#include "dysflux/head.hpp"
#include "dysflux/losses.hpp"
#include "dysflux/objective.hpp"

namespace dysflux {

enum class AuxTask { any, gender };
std::string to_string(AuxTask task);
AuxTask parse_aux_task(std::string_view text);

/// Which dev loss drives early stopping and model selection.
enum class Monitor { total, main };
std::string to_string(Monitor monitor);
Monitor parse_monitor(std::string_view text);

struct TrainConfig {
  double learning_rate = 3e-5;
  std::size_t batch_size = 256;
  std::size_t max_epochs = 20;
  std::size_t patience = 5;
  double weight_decay = 0.01;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;
  LossConfig loss;
  AuxTask aux_task = AuxTask::any;
  ClassSet class_set = ClassSet::seven;
  std::uint64_t seed = 0;
  Monitor monitor = Monitor::total;
  /// Excludes Mod from the main loss of English clips instead of treating
  /// their Mod = 0 as a hard negative.
  bool mask_mod_for_english = false;
  bool project_qkv = true;

  /// Throws ConfigError on out-of-range values.
  void validate() const;
  Json to_json() const;
  static TrainConfig from_json(const Json& j);
};

/// Adam moments for every parameter plus the step counter.
struct AdamState {
  std::size_t step = 0;
  HeadParams m;
  HeadParams v;

  static AdamState zeros_like(const HeadParams& params);
};

/// One AdamW update:
///   m ← β1 m + (1 − β1) g,  v ← β2 v + (1 − β2) g²,
///   p ← p·(1 − lr·λ) − lr · m̂ / (√v̂ + ε)
/// with bias-corrected m̂, v̂. layer_weights are not decayed.
/// Throws ShapeError if params, grads and state disagree.
void optimizer_step(HeadParams& params, const HeadGrads& grads,
                    AdamState& state, const TrainConfig& config);

/// Tracks the best monitored loss. Improvement is strict (any decrease).
class EarlyStopper {
 public:
  explicit EarlyStopper(std::size_t patience) : patience_(patience) {}

  /// Records the loss of `epoch`; returns true when training should stop.
  bool update(std::size_t epoch, double loss);
  bool improved() const { return improved_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_loss() const { return best_; }

 private:
  std::size_t patience_;
  std::size_t bad_epochs_ = 0;
  std::size_t best_epoch_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
  bool improved_ = false;
};

/// Mean losses over a set of clips. `aux` averages only clips that have an
/// auxiliary label; `total` = w_main · main + (1 − w_main) · aux.
struct SplitLoss {
  double total = 0.0;
  double main = 0.0;
  double aux = 0.0;
  std::size_t clips = 0;
  std::size_t aux_clips = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  SplitLoss train;        // mean over the epoch's batches
  SplitLoss dev;
  double monitored = 0.0;
};

struct Checkpoint {
  HeadParams params;
  TrainConfig config;
  std::vector<EpochRecord> history;
  std::size_t best_epoch = 0;
  /// Train loss of the initial parameters, before any update.
  SplitLoss initial_train;
  std::vector<std::string> sources;
  /// Earlier runs this one was warm-started from, oldest first.
  std::vector<std::string> lineage;

  const EpochRecord& best() const;
  /// One-line description used as a lineage entry.
  std::string describe() const;
};

/// Checkpoint directory: params.json (metadata) + params.bin (f32 LE
/// parameters in canonical HeadParams order).
void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& dir);
/// Throws IoError, FormatError or IncompatibleError.
Checkpoint load_checkpoint(const std::filesystem::path& dir);

/// Supplies hidden states by clip id. Implementations must be thread-safe.
class FeatureSource {
 public:
  virtual ~FeatureSource() = default;
  virtual Tensor load(const std::string& clip_id) const = 0;
  virtual bool contains(const std::string& clip_id) const = 0;
};

/// Reads <dir>/<clip_id>.dyfh, keeping up to `cache_bytes` of decoded
/// tensors in memory.
class DirectoryFeatures final : public FeatureSource {
 public:
  explicit DirectoryFeatures(std::filesystem::path dir,
                             std::size_t cache_bytes = std::size_t{2} << 30);
  Tensor load(const std::string& clip_id) const override;
  bool contains(const std::string& clip_id) const override;

 private:
  std::filesystem::path dir_;
  std::size_t cache_limit_;
  mutable std::mutex mutex_;
  mutable std::map<std::string, std::shared_ptr<const Tensor>> cache_;
  mutable std::size_t cached_bytes_ = 0;
};

/// Features held in memory (tests, Python callers).
class MemoryFeatures final : public FeatureSource {
 public:
  void add(std::string clip_id, Tensor hidden);
  Tensor load(const std::string& clip_id) const override;
  bool contains(const std::string& clip_id) const override;

 private:
  std::map<std::string, Tensor> data_;
};

/// Targets of one record under `config` (class order, Mod mask, aux label).
ClipTargets make_targets(const ClipRecord& record, const TrainConfig& config);

/// Loss of `params` over a split without updating anything.
SplitLoss evaluate_loss(const HeadParams& params, const Manifest& manifest,
                        Split split, const FeatureSource& features,
                        const TrainConfig& config);

/// Optional starting point for train().
struct TrainInit {
  HeadParams params;
  std::vector<std::string> lineage;
};

/// Trains a head. Each epoch shuffles the train split by (seed, epoch),
/// steps AdamW once per batch on the batch-mean objective, then evaluates
/// the dev split. Stops after max_epochs or `patience` epochs without
/// improvement of the monitored dev loss, and returns the parameters of
/// the best epoch. Deterministic given the config.
/// Throws DataError for an empty split or missing features (naming clips),
/// IncompatibleError if `init` does not fit the features.
/// `on_epoch`, if set, is called after every epoch.
Checkpoint train(const TrainConfig& config, const Manifest& manifest,
                 const FeatureSource& features,
                 const std::optional<TrainInit>& init = std::nullopt,
                 const std::function<void(const EpochRecord&)>& on_epoch = {});

/// Initial parameters for `config` taken from `source`. Equal class sets
/// copy everything; SIX → SEVEN adds a freshly initialized Mod row to the
/// main classifier; SEVEN → SIX drops it. Throws IncompatibleError on L or D
/// mismatch with (num_layers, hidden_dim) or a projection-mode mismatch.
TrainInit warm_start(const Checkpoint& source, const TrainConfig& config,
                     std::size_t num_layers, std::size_t hidden_dim);

struct Grid {
  std::vector<double> w_main;
  std::vector<double> alpha;
  std::vector<double> gamma;

  std::size_t size() const { return w_main.size() * alpha.size() * gamma.size(); }
  /// w_main ∈ {0.5..0.9}, α ∈ {0.1..0.9}, γ ∈ {1, 2, 3}.
  static Grid standard();
  /// "<w list>;<alpha list>;<gamma list>", lists comma-separated.
  static Grid parse(std::string_view text);
};

struct GridCell {
  double w_main = 0.0;
  double alpha = 0.0;
  double gamma = 0.0;
  double monitored = 0.0;  // best-epoch monitored dev loss
  std::size_t best_epoch = 0;
  std::size_t epochs_run = 0;
};

struct GridResult {
  std::vector<GridCell> ranked;  // ascending loss, ties by (w_main, α, γ)
  TrainConfig best_config;
  Checkpoint best;
};

/// Sorts ascending by monitored loss (NaN last), ties broken by
/// (w_main, alpha, gamma) ascending.
void rank_cells(std::vector<GridCell>& cells);

/// Trains every cell with the base config's seed and ranks the results.
/// Cells run on up to `jobs` threads; the result does not depend on `jobs`.
/// `on_cell`, if set, is called (serialised) after each finished cell.
GridResult grid_search(const TrainConfig& base, const Manifest& manifest,
                       const FeatureSource& features, const Grid& grid,
                       std::size_t jobs = 1,
                       const std::optional<TrainInit>& init = std::nullopt,
                       const std::function<void(const GridCell&)>& on_cell = {});

}  // namespace dysflux
