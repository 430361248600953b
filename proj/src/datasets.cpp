// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/datasets.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <unordered_set>

#include "dysflux/error.hpp"
#include "dysflux/files.hpp"
#include "dysflux/random.hpp"

namespace dysflux {
namespace {

std::string upper(std::string_view text) {
  std::string out(text);
  for (auto& ch : out) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  return out;
}

std::optional<std::size_t> label_slot(std::string_view name) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelNames[i] == name) return i;
  }
  return std::nullopt;
}

const std::set<std::string> kHeaderKeys = {
    "name", "dataset_id", "class_set", "n_annotators", "binarize_threshold",
    "sources"};
const std::set<std::string> kRecordKeys = {
    "clip_id", "dataset_id", "speaker_id", "gender", "split",
    "labels",  "annotator_counts", "duration_s"};

// Reads a per-class object {"Bl": 1, ...}; absent classes are 0.
LabelVector read_class_object(const Json& obj, const char* what, int max_value,
                              std::vector<std::string>& problems) {
  LabelVector out{};
  if (!obj.is_object()) {
    problems.push_back(std::string(what) + " must be an object");
    return out;
  }
  for (const auto& [key, value] : obj.items()) {
    const auto slot = label_slot(key);
    if (!slot) {
      problems.push_back(std::string(what) + " has unknown class '" + key + "'");
      continue;
    }
    if (!value.is_number_integer() || value.get<long long>() < 0 ||
        value.get<long long>() > max_value) {
      problems.push_back(std::string(what) + "[" + key + "] must be an integer in [0, " +
                         std::to_string(max_value) + "]");
      continue;
    }
    out[*slot] = value.get<int>();
  }
  return out;
}

std::string required_string(const Json& obj, const char* key,
                            std::vector<std::string>& problems) {
  const auto it = obj.find(key);
  if (it == obj.end()) {
    problems.push_back(std::string("missing key '") + key + "'");
    return {};
  }
  if (!it->is_string() || it->get<std::string>().empty()) {
    problems.push_back(std::string("'") + key + "' must be a non-empty string");
    return {};
  }
  return it->get<std::string>();
}

Json class_object(const LabelVector& v) {
  Json obj = Json::object();
  for (std::size_t i = 0; i < kNumLabels; ++i) obj[std::string(kLabelNames[i])] = v[i];
  return obj;
}

std::string where(const ClipRecord& r) {
  std::string out;
  if (r.line) out = "line " + std::to_string(r.line) + ": ";
  return out + "clip " + r.clip_id;
}

}  // namespace

std::string to_string(ClassSet set) {
  return set == ClassSet::six ? "SIX" : "SEVEN";
}

ClassSet parse_class_set(std::string_view text) {
  const auto u = upper(text);
  if (u == "SIX") return ClassSet::six;
  if (u == "SEVEN") return ClassSet::seven;
  throw ConfigError("unknown class set '" + std::string(text) +
                    "' (expected SIX or SEVEN)");
}

std::size_t num_classes(ClassSet set) {
  return set == ClassSet::six ? kNumLabels - 1 : kNumLabels;
}

std::vector<std::string> class_names(ClassSet set) {
  std::vector<std::string> names;
  for (std::size_t c = 0; c < num_classes(set); ++c) {
    names.emplace_back(kLabelNames[label_index(set, c)]);
  }
  return names;
}

std::size_t label_index(ClassSet set, std::size_t c) {
  if (c >= num_classes(set)) {
    throw ShapeError("class index " + std::to_string(c) + " out of range for " +
                     to_string(set));
  }
  return set == ClassSet::six ? c + 1 : c;
}

std::string to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::dev: return "dev";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::train;
  if (text == "dev") return Split::dev;
  if (text == "test") return Split::test;
  throw ConfigError("unknown split '" + std::string(text) +
                    "' (expected train, dev or test)");
}

std::string to_string(Gender gender) {
  switch (gender) {
    case Gender::female: return "f";
    case Gender::male: return "m";
    case Gender::unknown: return "unknown";
  }
  return "?";
}

Gender parse_gender(std::string_view text) {
  if (text == "f") return Gender::female;
  if (text == "m") return Gender::male;
  if (text == "unknown") return Gender::unknown;
  throw ConfigError("unknown gender '" + std::string(text) +
                    "' (expected f, m or unknown)");
}

bool is_english_dataset(std::string_view dataset_id) {
  return dataset_id == kSep28kE || dataset_id == kFluencyBank;
}

int ClipRecord::any_label() const {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (i != kNoDfIndex && labels[i]) return 1;
  }
  return 0;
}

std::vector<int> ClipRecord::targets(ClassSet set) const {
  std::vector<int> out(num_classes(set));
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = labels[label_index(set, c)];
  return out;
}

std::vector<const ClipRecord*> Manifest::select(std::optional<Split> split) const {
  std::vector<const ClipRecord*> out;
  for (const auto& r : records) {
    if (!split || r.split == *split) out.push_back(&r);
  }
  return out;
}

const ClipRecord* Manifest::find(std::string_view clip_id) const {
  for (const auto& r : records) {
    if (r.clip_id == clip_id) return &r;
  }
  return nullptr;
}

std::string Manifest::binarization_rule() const {
  return "count >= " + std::to_string(binarize_threshold) + " of " +
         std::to_string(n_annotators) + " annotators";
}

LabelVector binarize_labels(std::span<const int> counts, int n_annotators,
                            int threshold) {
  if (counts.size() != kNumLabels) {
    throw ShapeError("annotator counts need " + std::to_string(kNumLabels) +
                     " entries, got " + std::to_string(counts.size()));
  }
  if (n_annotators < 1) throw ConfigError("n_annotators must be >= 1");
  if (threshold < 1 || threshold > n_annotators) {
    throw ConfigError("binarization threshold " + std::to_string(threshold) +
                      " outside [1, " + std::to_string(n_annotators) + "]");
  }
  LabelVector out{};
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (counts[i] < 0 || counts[i] > n_annotators) {
      throw DataError("annotator count " + std::to_string(counts[i]) + " for " +
                      std::string(kLabelNames[i]) + " outside [0, " +
                      std::to_string(n_annotators) + "]");
    }
    out[i] = counts[i] >= threshold ? 1 : 0;
  }
  return out;
}

void validate_manifest(const Manifest& manifest) {
  std::vector<std::string> issues;
  std::map<std::string, std::size_t> seen;
  for (const auto& r : manifest.records) {
    const auto [it, inserted] = seen.emplace(r.clip_id, r.line);
    if (!inserted) {
      std::string first = it->second ? " (first at line " + std::to_string(it->second) + ")" : "";
      issues.push_back(where(r) + ": duplicate clip_id " + r.clip_id + first);
    }
    if (is_english_dataset(r.dataset_id) && r.labels[kModIndex] != 0) {
      issues.push_back(where(r) + ": Mod label on English clip (dataset " +
                       r.dataset_id + ")");
    }
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (r.labels[i] != 0 && r.labels[i] != 1) {
        issues.push_back(where(r) + ": label " + std::string(kLabelNames[i]) +
                         " is not 0/1");
      }
    }
    if (!(r.duration_s > 0.0) || !std::isfinite(r.duration_s)) {
      issues.push_back(where(r) + ": duration_s must be positive");
    }
    if (r.dataset_id.empty()) issues.push_back(where(r) + ": empty dataset_id");
    if (r.speaker_id.empty()) issues.push_back(where(r) + ": empty speaker_id");
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

Manifest parse_manifest(std::string_view text, const LoadOptions& options) {
  std::vector<std::string_view> lines;
  for (std::size_t start = 0; start <= text.size();) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = end + 1;
  }
  const auto blank = [](std::string_view s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
  };
  if (lines.empty() || blank(lines.front())) {
    throw FormatError("header", "manifest has no header line");
  }

  const auto parse_line = [](std::string_view line, std::size_t number) {
    try {
      auto j = Json::parse(line);
      if (!j.is_object()) {
        throw FormatError("line " + std::to_string(number),
                          "line " + std::to_string(number) + ": expected a JSON object");
      }
      return j;
    } catch (const Json::parse_error& e) {
      throw FormatError("line " + std::to_string(number),
                        "line " + std::to_string(number) + ": " + e.what());
    }
  };

  Manifest m;
  {
    const Json header = parse_line(lines.front(), 1);
    std::vector<std::string> problems;
    m.name = required_string(header, "name", problems);
    m.dataset_id = required_string(header, "dataset_id", problems);
    const auto cs = required_string(header, "class_set", problems);
    if (!cs.empty()) {
      try {
        m.class_set = parse_class_set(cs);
      } catch (const ConfigError& e) {
        problems.push_back(e.what());
      }
    }
    const auto n = header.find("n_annotators");
    if (n == header.end() || !n->is_number_integer() || n->get<long long>() < 1 ||
        n->get<long long>() > 1000) {
      problems.push_back("'n_annotators' must be a positive integer");
    } else {
      m.n_annotators = n->get<int>();
    }
    if (const auto t = header.find("binarize_threshold"); t != header.end()) {
      if (!t->is_number_integer()) {
        problems.push_back("'binarize_threshold' must be an integer");
      } else {
        m.binarize_threshold = static_cast<int>(t->get<long long>());
      }
    } else {
      m.binarize_threshold = std::min(2, m.n_annotators);
    }
    if (options.binarize_threshold) m.binarize_threshold = *options.binarize_threshold;
    if (m.binarize_threshold < 1 || m.binarize_threshold > m.n_annotators) {
      problems.push_back("binarization threshold " +
                         std::to_string(m.binarize_threshold) + " outside [1, " +
                         std::to_string(m.n_annotators) + "]");
    }
    if (const auto s = header.find("sources"); s != header.end()) {
      if (!s->is_array()) {
        problems.push_back("'sources' must be an array of strings");
      } else {
        for (const auto& v : *s) {
          if (v.is_string()) m.sources.push_back(v.get<std::string>());
          else problems.push_back("'sources' must be an array of strings");
        }
      }
    }
    for (const auto& [key, value] : header.items()) {
      if (!kHeaderKeys.count(key)) m.header_extra[key] = value;
    }
    if (!problems.empty()) {
      for (auto& p : problems) p = "line 1 (header): " + p;
      throw ValidationError(std::move(problems));
    }
  }

  std::vector<std::string> issues;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t number = i + 1;
    if (blank(lines[i])) continue;
    const Json j = parse_line(lines[i], number);
    std::vector<std::string> problems;
    ClipRecord r;
    r.line = number;
    r.clip_id = required_string(j, "clip_id", problems);
    r.speaker_id = required_string(j, "speaker_id", problems);
    if (const auto d = j.find("dataset_id"); d != j.end()) {
      r.dataset_id = required_string(j, "dataset_id", problems);
    } else if (m.dataset_id == kMixedDataset) {
      problems.push_back("record in a MIXED manifest needs 'dataset_id'");
    } else {
      r.dataset_id = m.dataset_id;
    }
    const auto gender = required_string(j, "gender", problems);
    if (!gender.empty()) {
      try {
        r.gender = parse_gender(gender);
      } catch (const ConfigError& e) {
        problems.push_back(e.what());
      }
    }
    const auto split = required_string(j, "split", problems);
    if (!split.empty()) {
      try {
        r.split = parse_split(split);
      } catch (const ConfigError& e) {
        problems.push_back(e.what());
      }
    }
    const auto dur = j.find("duration_s");
    if (dur == j.end() || !dur->is_number()) {
      problems.push_back("'duration_s' must be a number");
    } else {
      r.duration_s = dur->get<double>();
    }
    const auto counts = j.find("annotator_counts");
    const auto labels = j.find("labels");
    if (counts != j.end()) {
      const std::size_t before = problems.size();
      const auto c = read_class_object(*counts, "annotator_counts",
                                       std::numeric_limits<int>::max(), problems);
      if (problems.size() == before) {
        r.annotator_counts = c;
        try {
          r.labels = binarize_labels(c, m.n_annotators, m.binarize_threshold);
        } catch (const Error& e) {
          problems.push_back(e.what());
        }
      }
    } else if (labels != j.end()) {
      r.labels = read_class_object(*labels, "labels", 1, problems);
    } else {
      problems.push_back("missing key 'labels'");
    }
    for (const auto& [key, value] : j.items()) {
      if (!kRecordKeys.count(key)) r.extra[key] = value;
    }
    if (!problems.empty()) {
      const std::string prefix =
          "line " + std::to_string(number) +
          (r.clip_id.empty() ? std::string(": ") : ": clip " + r.clip_id + ": ");
      for (const auto& p : problems) issues.push_back(prefix + p);
      continue;
    }
    m.records.push_back(std::move(r));
  }
  try {
    validate_manifest(m);
  } catch (const ValidationError& e) {
    issues.insert(issues.end(), e.issues().begin(), e.issues().end());
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
  return m;
}

Manifest load_manifest(const std::filesystem::path& path,
                       const LoadOptions& options) {
  return parse_manifest(read_file(path), options);
}

std::string format_manifest(const Manifest& manifest) {
  Json header = Json::object();
  header["name"] = manifest.name;
  header["dataset_id"] = manifest.dataset_id;
  header["class_set"] = to_string(manifest.class_set);
  header["n_annotators"] = manifest.n_annotators;
  header["binarize_threshold"] = manifest.binarize_threshold;
  if (!manifest.sources.empty()) header["sources"] = manifest.sources;
  for (const auto& [key, value] : manifest.header_extra.items()) header[key] = value;
  std::string out = header.dump() + "\n";
  for (const auto& r : manifest.records) {
    Json j = Json::object();
    j["clip_id"] = r.clip_id;
    if (r.dataset_id != manifest.dataset_id) j["dataset_id"] = r.dataset_id;
    j["speaker_id"] = r.speaker_id;
    j["gender"] = to_string(r.gender);
    j["split"] = to_string(r.split);
    j["labels"] = class_object(r.labels);
    if (r.annotator_counts) j["annotator_counts"] = class_object(*r.annotator_counts);
    j["duration_s"] = r.duration_s;
    for (const auto& [key, value] : r.extra.items()) j[key] = value;
    out += j.dump() + "\n";
  }
  return out;
}

void save_manifest(const Manifest& manifest, const std::filesystem::path& path) {
  write_file_atomic(path, format_manifest(manifest));
}

std::string to_string(MergeName name) {
  switch (name) {
    case MergeName::all_en: return "ALL-EN";
    case MergeName::multi_s: return "Multi-S";
    case MergeName::multi: return "Multi";
    case MergeName::custom: return "custom";
  }
  return "?";
}

MergeName parse_merge_name(std::string_view text) {
  const auto u = upper(text);
  if (u == "ALL-EN") return MergeName::all_en;
  if (u == "MULTI-S") return MergeName::multi_s;
  if (u == "MULTI") return MergeName::multi;
  if (u == "CUSTOM") return MergeName::custom;
  throw ConfigError("unknown merge name '" + std::string(text) +
                    "' (expected ALL-EN, Multi-S, Multi or custom)");
}

Manifest merge(std::span<const Manifest> manifests, MergeName name,
               std::string custom_name) {
  if (manifests.empty()) throw MergeError("merge needs at least one manifest");

  std::multiset<std::string> composition;
  for (const auto& m : manifests) composition.insert(m.dataset_id);
  std::multiset<std::string> expected;
  switch (name) {
    case MergeName::all_en:
      expected = {std::string(kFluencyBank), std::string(kSep28kE)};
      break;
    case MergeName::multi_s:
      expected = {std::string(kKsof), std::string(kFluencyBank)};
      break;
    case MergeName::multi:
      expected = {std::string(kKsof), std::string(kFluencyBank), std::string(kSep28kE)};
      break;
    case MergeName::custom:
      expected = composition;
      break;
  }
  if (composition != expected) {
    std::string got, want;
    for (const auto& d : composition) got += (got.empty() ? "" : ", ") + d;
    for (const auto& d : expected) want += (want.empty() ? "" : ", ") + d;
    throw MergeError(to_string(name) + " combines {" + want + "}, got {" + got + "}");
  }

  if (manifests.size() == 1 && name == MergeName::custom) return manifests.front();

  Manifest out;
  out.name = name == MergeName::custom ? std::move(custom_name) : to_string(name);
  out.class_set = ClassSet::six;
  out.n_annotators = 0;
  out.binarize_threshold = manifests.front().binarize_threshold;
  std::set<std::string> ids;
  for (const auto& m : manifests) ids.insert(m.dataset_id);
  out.dataset_id = ids.size() == 1 ? *ids.begin() : std::string(kMixedDataset);

  std::map<std::string, std::string> owner;
  for (const auto& m : manifests) {
    if (m.class_set == ClassSet::seven || m.dataset_id == kKsof) {
      out.class_set = ClassSet::seven;
    }
    out.n_annotators = std::max(out.n_annotators, m.n_annotators);
    if (m.binarize_threshold != out.binarize_threshold) {
      throw MergeError("sources use different binarization thresholds (" +
                       std::to_string(out.binarize_threshold) + " vs " +
                       std::to_string(m.binarize_threshold) + ")");
    }
    out.sources.push_back(m.name);
    for (const auto& r : m.records) {
      const auto [it, inserted] = owner.emplace(r.clip_id, m.name);
      if (!inserted) {
        throw MergeError("clip_id collision: " + r.clip_id + " in both " +
                         it->second + " and " + m.name);
      }
      ClipRecord copy = r;
      copy.line = 0;
      // English clips carry Mod = 0 already; in a SEVEN merge that zero is
      // a hard negative rather than a missing label.
      out.records.push_back(std::move(copy));
    }
  }
  validate_manifest(out);
  return out;
}

SpeakerReport validate_speaker_exclusivity(const Manifest& manifest) {
  std::map<std::pair<std::string, std::string>, std::set<Split>> splits;
  for (const auto& r : manifest.records) {
    splits[{r.dataset_id, r.speaker_id}].insert(r.split);
  }
  SpeakerReport report;
  for (const auto& [key, set] : splits) {
    if (set.size() > 1) {
      report.leaks.push_back({key.first, key.second, {set.begin(), set.end()}});
    }
  }
  return report;
}

LabelDistribution label_distribution(const Manifest& manifest,
                                     std::optional<Split> split) {
  const auto selected = manifest.select(split);
  LabelDistribution out;
  out.total = selected.size();
  for (std::size_t c = 0; c < num_classes(manifest.class_set); ++c) {
    const std::size_t slot = label_index(manifest.class_set, c);
    ClassShare share;
    share.name = std::string(kLabelNames[slot]);
    for (const auto* r : selected) share.positives += r->labels[slot] ? 1 : 0;
    if (out.total) {
      share.percent = 100.0 * static_cast<double>(share.positives) /
                      static_cast<double>(out.total);
    }
    out.classes.push_back(std::move(share));
  }
  return out;
}

Cooccurrence cooccurrence_stats(const Manifest& manifest,
                                std::optional<Split> split) {
  Cooccurrence out;
  for (const auto* r : manifest.select(split)) {
    int n = 0;
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (i != kNoDfIndex) n += r->labels[i];
    }
    out.multi_label += n > 1 ? 1 : 0;
    ++out.total;
  }
  if (out.total) {
    out.fraction = static_cast<double>(out.multi_label) / static_cast<double>(out.total);
  }
  return out;
}

std::vector<std::vector<std::string>> make_batches(const Manifest& manifest,
                                                   Split split,
                                                   std::size_t batch_size,
                                                   std::uint64_t seed,
                                                   std::uint64_t epoch) {
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
  std::vector<std::string> ids;
  for (const auto* r : manifest.select(split)) ids.push_back(r->clip_id);
  if (ids.empty()) {
    throw DataError("split " + to_string(split) + " of manifest " + manifest.name +
                    " is empty");
  }
  Rng rng = Rng::stream(seed, epoch);
  for (std::size_t i = ids.size() - 1; i > 0; --i) {
    std::swap(ids[i], ids[rng.below(i + 1)]);
  }
  std::vector<std::vector<std::string>> batches;
  for (std::size_t start = 0; start < ids.size(); start += batch_size) {
    const auto end = std::min(ids.size(), start + batch_size);
    batches.emplace_back(std::make_move_iterator(ids.begin() + static_cast<std::ptrdiff_t>(start)),
                         std::make_move_iterator(ids.begin() + static_cast<std::ptrdiff_t>(end)));
  }
  return batches;
}

std::vector<double> inverse_frequency_weights(const Manifest& manifest,
                                              Split split) {
  const auto dist = label_distribution(manifest, split);
  const double C = static_cast<double>(dist.classes.size());
  std::vector<double> w;
  for (const auto& share : dist.classes) {
    w.push_back(share.positives
                    ? static_cast<double>(dist.total) / (C * static_cast<double>(share.positives))
                    : 1.0);
  }
  return w;
}

}  // namespace dysflux
