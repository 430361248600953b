// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "dysflux/error.hpp"

namespace dysflux {
namespace {

void check_threshold(double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("decision threshold must lie in [0, 1]");
  }
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  return buf;
}

Json optional_number(const std::optional<double>& v) {
  return v ? Json(*v) : Json(nullptr);
}

}  // namespace

std::string to_string(ClassStatus status) {
  switch (status) {
    case ClassStatus::defined: return "defined";
    case ClassStatus::na: return "na";
    case ClassStatus::not_evaluable: return "not_evaluable";
  }
  return "?";
}

ClassMetrics score_counts(std::string name, std::size_t tp, std::size_t fp,
                          std::size_t fn, std::size_t tn) {
  ClassMetrics m;
  m.name = std::move(name);
  m.tp = tp;
  m.fp = fp;
  m.fn = fn;
  m.tn = tn;
  m.support = tp + fn;
  if (tp + fn == 0 && tp + fp == 0) {
    m.status = ClassStatus::na;
    return m;
  }
  const double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  const double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.precision = p;
  m.recall = r;
  m.f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
  return m;
}

Prf1 prf1(const LabelMatrix& preds, const LabelMatrix& targets,
          const std::vector<std::string>& names) {
  if (preds.size() != targets.size()) {
    throw ShapeError("prf1: " + std::to_string(preds.size()) + " prediction rows vs " +
                     std::to_string(targets.size()) + " target rows");
  }
  std::size_t C = names.size();
  if (!preds.empty()) {
    if (!names.empty() && preds[0].size() != C) {
      throw ShapeError("prf1: rows have " + std::to_string(preds[0].size()) +
                       " columns, " + std::to_string(C) + " names given");
    }
    C = preds[0].size();
  }
  std::vector<std::size_t> tp(C), fp(C), fn(C), tn(C);
  for (std::size_t n = 0; n < preds.size(); ++n) {
    if (preds[n].size() != C || targets[n].size() != C) {
      throw ShapeError("prf1: row " + std::to_string(n) + " has a different width");
    }
    for (std::size_t c = 0; c < C; ++c) {
      const int p = preds[n][c];
      const int t = targets[n][c];
      if ((p != 0 && p != 1) || (t != 0 && t != 1)) {
        throw DomainError("prf1: entries must be 0 or 1");
      }
      tp[c] += p & t;
      fp[c] += p & (1 - t);
      fn[c] += (1 - p) & t;
      tn[c] += (1 - p) & (1 - t);
    }
  }
  Prf1 out;
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    auto m = score_counts(names.empty() ? std::to_string(c) : names[c], tp[c],
                          fp[c], fn[c], tn[c]);
    if (m.status == ClassStatus::defined) {
      sp += *m.precision;
      sr += *m.recall;
      sf += *m.f1;
      ++out.defined_classes;
    }
    out.classes.push_back(std::move(m));
  }
  if (out.defined_classes) {
    const double k = static_cast<double>(out.defined_classes);
    out.macro_precision = sp / k;
    out.macro_recall = sr / k;
    out.macro_f1 = sf / k;
  }
  return out;
}

std::vector<int> threshold_probs(const std::vector<double>& probs,
                                 double threshold) {
  check_threshold(threshold);
  std::vector<int> out(probs.size());
  for (std::size_t c = 0; c < probs.size(); ++c) out[c] = probs[c] >= threshold ? 1 : 0;
  return out;
}

std::vector<int> predict(const HeadParams& params, const Tensor& hidden,
                         double threshold) {
  check_threshold(threshold);
  return threshold_probs(head_forward(hidden, params).main_probs, threshold);
}

MetricsReport evaluate(const Checkpoint& checkpoint, const Manifest& manifest,
                       Split split, const FeatureSource& features,
                       double threshold) {
  check_threshold(threshold);
  const auto records = manifest.select(split);
  if (records.empty()) {
    throw DataError("split " + to_string(split) + " of manifest " + manifest.name +
                    " is empty");
  }
  std::vector<std::string> missing;
  for (const auto* r : records) {
    if (!features.contains(r->clip_id)) missing.push_back(r->clip_id);
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

  const ClassSet model_set = checkpoint.config.class_set;
  const std::size_t C = num_classes(model_set);
  // Model column c → schema slot; the schema has all seven labels.
  std::vector<int> model_column(kNumLabels, -1);
  for (std::size_t c = 0; c < C; ++c) {
    model_column[label_index(model_set, c)] = static_cast<int>(c);
  }
  LabelMatrix preds, targets;
  for (const auto* r : records) {
    const auto p = predict(checkpoint.params, features.load(r->clip_id), threshold);
    std::vector<int> row(kNumLabels, 0);
    for (std::size_t s = 0; s < kNumLabels; ++s) {
      if (model_column[s] >= 0) row[s] = p[static_cast<std::size_t>(model_column[s])];
    }
    preds.push_back(std::move(row));
    targets.emplace_back(r->labels.begin(), r->labels.end());
  }
  std::vector<std::string> names(kLabelNames.begin(), kLabelNames.end());
  Prf1 scored = prf1(preds, targets, names);

  Prf1 metrics;
  double sp = 0.0, sr = 0.0, sf = 0.0;
  for (std::size_t s = 0; s < kNumLabels; ++s) {
    ClassMetrics m = scored.classes[s];
    if (model_column[s] < 0) {
      m = ClassMetrics{};
      m.name = names[s];
      m.status = ClassStatus::not_evaluable;
      m.support = scored.classes[s].support;
    } else if (m.status == ClassStatus::defined) {
      sp += *m.precision;
      sr += *m.recall;
      sf += *m.f1;
      ++metrics.defined_classes;
    }
    metrics.classes.push_back(std::move(m));
  }
  if (metrics.defined_classes) {
    const double k = static_cast<double>(metrics.defined_classes);
    metrics.macro_precision = sp / k;
    metrics.macro_recall = sr / k;
    metrics.macro_f1 = sf / k;
  }

  MetricsReport report;
  report.toolkit_version = DYSFLUX_VERSION;
  report.manifest = manifest.name;
  report.split = to_string(split);
  report.model_class_set = to_string(model_set);
  report.binarization = manifest.binarization_rule();
  report.seed = checkpoint.config.seed;
  report.threshold = threshold;
  report.clips = records.size();
  report.metrics = std::move(metrics);
  return report;
}

std::string MetricsReport::to_tsv() const {
  std::string out = "# dysflux " + toolkit_version + "\tmanifest=" + manifest +
                    "\tsplit=" + split + "\tmodel=" + model_class_set +
                    "\tseed=" + std::to_string(seed) + "\tthreshold=" +
                    fixed(threshold) + "\tbinarization=" + binarization +
                    "\tclips=" + std::to_string(clips) + "\n";
  out += "metric";
  for (const auto& c : metrics.classes) out += "\t" + c.name;
  out += "\tmacro\n";
  const auto row = [&](const char* label, auto field, const std::optional<double>& macro) {
    out += label;
    for (const auto& c : metrics.classes) {
      switch (c.status) {
        case ClassStatus::not_evaluable: out += "\t-"; break;
        case ClassStatus::na: out += "\tN/A"; break;
        case ClassStatus::defined: out += "\t" + fixed(*(c.*field)); break;
      }
    }
    out += "\t" + (macro ? fixed(*macro) : std::string("N/A")) + "\n";
  };
  row("F1", &ClassMetrics::f1, metrics.macro_f1);
  row("precision", &ClassMetrics::precision, metrics.macro_precision);
  row("recall", &ClassMetrics::recall, metrics.macro_recall);
  out += "support";
  for (const auto& c : metrics.classes) out += "\t" + std::to_string(c.support);
  out += "\t-\n";
  return out;
}

Json MetricsReport::to_json() const {
  Json j = Json::object();
  j["toolkit_version"] = toolkit_version;
  j["manifest"] = manifest;
  j["split"] = split;
  j["model_class_set"] = model_class_set;
  j["seed"] = seed;
  j["threshold"] = threshold;
  j["binarization"] = binarization;
  j["clips"] = clips;
  Json classes = Json::array();
  for (const auto& c : metrics.classes) {
    classes.push_back({{"name", c.name},
                       {"status", to_string(c.status)},
                       {"tp", c.tp},
                       {"fp", c.fp},
                       {"fn", c.fn},
                       {"tn", c.tn},
                       {"support", c.support},
                       {"precision", optional_number(c.precision)},
                       {"recall", optional_number(c.recall)},
                       {"f1", optional_number(c.f1)}});
  }
  j["classes"] = classes;
  j["macro"] = {{"precision", optional_number(metrics.macro_precision)},
                {"recall", optional_number(metrics.macro_recall)},
                {"f1", optional_number(metrics.macro_f1)},
                {"defined_classes", metrics.defined_classes}};
  return j;
}

}  // namespace dysflux
