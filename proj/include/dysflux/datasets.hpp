// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace dysflux {

using Json = nlohmann::ordered_json;

/// The seven label columns in storage order. Records always carry all seven;
/// a SIX-class model simply never looks at Mod.
inline constexpr std::size_t kNumLabels = 7;
inline constexpr std::array<std::string_view, kNumLabels> kLabelNames = {
    "Mod", "Bl", "Int", "Pro", "Snd", "Wd", "No-Df"};
inline constexpr std::size_t kModIndex = 0;
inline constexpr std::size_t kNoDfIndex = 6;
using LabelVector = std::array<int, kNumLabels>;

enum class ClassSet { six, seven };
std::string to_string(ClassSet set);
/// Accepts "SIX"/"SEVEN" in any case.
ClassSet parse_class_set(std::string_view text);
std::size_t num_classes(ClassSet set);
/// Ordered class names; SIX is SEVEN without Mod.
std::vector<std::string> class_names(ClassSet set);
/// Index into LabelVector of the c-th class of `set`.
std::size_t label_index(ClassSet set, std::size_t c);

enum class Split { train, dev, test };
std::string to_string(Split split);
Split parse_split(std::string_view text);

enum class Gender { female, male, unknown };
std::string to_string(Gender gender);
Gender parse_gender(std::string_view text);

/// Source corpora. English ones never carry speech-modification labels.
inline constexpr std::string_view kSep28kE = "SEP28K-E";
inline constexpr std::string_view kFluencyBank = "FBANK";
inline constexpr std::string_view kKsof = "KSOF";
inline constexpr std::string_view kMixedDataset = "MIXED";
bool is_english_dataset(std::string_view dataset_id);

struct ClipRecord {
  std::string clip_id;
  std::string dataset_id;
  std::string speaker_id;
  Gender gender = Gender::unknown;
  Split split = Split::train;
  LabelVector labels{};
  std::optional<LabelVector> annotator_counts;
  double duration_s = 3.0;
  /// Keys not interpreted by the toolkit, preserved on save.
  Json extra = Json::object();
  /// 1-based line in the source file (0 for records built in memory).
  std::size_t line = 0;

  /// 1 iff any dysfluency class (Mod..Wd) is positive.
  int any_label() const;
  /// Labels of the classes of `set`, in class order.
  std::vector<int> targets(ClassSet set) const;
};

struct Manifest {
  std::string name;
  std::string dataset_id;
  ClassSet class_set = ClassSet::seven;
  int n_annotators = 3;
  /// Annotator-count threshold used to derive labels from counts.
  int binarize_threshold = 2;
  std::vector<ClipRecord> records;
  /// Unknown header keys, preserved on save.
  Json header_extra = Json::object();
  /// Names of the manifests this one was merged from (empty if loaded as is).
  std::vector<std::string> sources;

  std::vector<const ClipRecord*> select(std::optional<Split> split) const;
  const ClipRecord* find(std::string_view clip_id) const;
  /// Human-readable rule, e.g. "count >= 2 of 3 annotators".
  std::string binarization_rule() const;
};

struct LoadOptions {
  /// Overrides the header's binarize_threshold when set.
  std::optional<int> binarize_threshold;
};

/// Parses a JSON-lines manifest (header line + one record per line) and
/// validates every invariant. All violations are collected and reported
/// together in one ValidationError, each prefixed with its line number.
/// Malformed JSON raises FormatError. When a record carries
/// annotator_counts, its labels are derived from them.
Manifest load_manifest(const std::filesystem::path& path,
                       const LoadOptions& options = {});
Manifest parse_manifest(std::string_view text, const LoadOptions& options = {});

/// Serialises in the load format; records keep their unknown keys.
std::string format_manifest(const Manifest& manifest);
/// Atomic write (temporary file + rename).
void save_manifest(const Manifest& manifest, const std::filesystem::path& path);

/// Throws ValidationError listing every violated invariant.
void validate_manifest(const Manifest& manifest);

/// Class c is positive iff counts[c] >= threshold. Throws DataError when a
/// count lies outside [0, n_annotators] and ConfigError for a threshold
/// outside [1, n_annotators].
LabelVector binarize_labels(std::span<const int> counts, int n_annotators,
                            int threshold = 2);

/// Recognised merge names; `custom` accepts any composition.
enum class MergeName { all_en, multi_s, multi, custom };
std::string to_string(MergeName name);
MergeName parse_merge_name(std::string_view text);

/// Concatenates records in input order. The result is SEVEN-class if any
/// source is, otherwise SIX. Named merges check their source composition.
/// Throws MergeError on clip_id collisions or a wrong composition.
Manifest merge(std::span<const Manifest> manifests, MergeName name,
               std::string custom_name = "custom");

struct SpeakerLeak {
  std::string dataset_id;
  std::string speaker_id;
  std::vector<Split> splits;
};

struct SpeakerReport {
  std::vector<SpeakerLeak> leaks;  // sorted by (dataset_id, speaker_id)
  bool passed() const { return leaks.empty(); }
};

/// Speakers are namespaced by dataset_id: the same raw id in two corpora is
/// two different people.
SpeakerReport validate_speaker_exclusivity(const Manifest& manifest);

struct ClassShare {
  std::string name;
  std::size_t positives = 0;
  double percent = 0.0;
};

struct LabelDistribution {
  std::size_t total = 0;
  std::vector<ClassShare> classes;  // classes of the manifest's class set
  /// True when the selection holds no clips; percentages are then 0.
  bool empty() const { return total == 0; }
};

LabelDistribution label_distribution(const Manifest& manifest,
                                     std::optional<Split> split = std::nullopt);

struct Cooccurrence {
  std::size_t multi_label = 0;  // clips with >= 2 dysfluency labels
  std::size_t total = 0;
  double fraction = 0.0;
};

/// No-Df is not a dysfluency and is not counted.
Cooccurrence cooccurrence_stats(const Manifest& manifest,
                                std::optional<Split> split = std::nullopt);

/// Clips of `split` in a deterministic per-(seed, epoch) shuffled order, cut
/// into batches of `batch_size` (the last may be short). Throws DataError
/// for an empty split and ConfigError for batch_size 0.
std::vector<std::vector<std::string>> make_batches(const Manifest& manifest,
                                                   Split split,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::uint64_t epoch = 0);

/// Per-class weights N / (C · n_c) over the split; classes without positives
/// get weight 1.
std::vector<double> inverse_frequency_weights(const Manifest& manifest,
                                              Split split);

}  // namespace dysflux
