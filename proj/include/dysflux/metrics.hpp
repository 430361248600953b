// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dysflux/datasets.hpp"
#include "dysflux/head.hpp"
#include "dysflux/training.hpp"

namespace dysflux {

/// defined: P, R and F1 are numbers. na: the class has neither labelled nor
/// predicted positives, so F1 is undefined. not_evaluable: the model does
/// not predict the class at all ("-" in reports).
enum class ClassStatus { defined, na, not_evaluable };
std::string to_string(ClassStatus status);

struct ClassMetrics {
  std::string name;
  ClassStatus status = ClassStatus::defined;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t support = 0;  // tp + fn
  /// Empty unless status == defined. When exactly one of P and R has a zero
  /// denominator it is reported as 0 and F1 as 0.
  std::optional<double> precision, recall, f1;
};

struct Prf1 {
  std::vector<ClassMetrics> classes;
  /// Means over defined classes only; empty if no class is defined.
  std::optional<double> macro_precision, macro_recall, macro_f1;
  std::size_t defined_classes = 0;
};

using LabelMatrix = std::vector<std::vector<int>>;

/// Per-class counts and scores of N×C binary predictions against targets.
/// `names` labels the columns (defaults to "0", "1", ...). Throws ShapeError
/// on mismatched shapes and DomainError on non-binary entries.
Prf1 prf1(const LabelMatrix& preds, const LabelMatrix& targets,
          const std::vector<std::string>& names = {});

/// Recomputes P/R/F1 and the status of one class from its counts.
ClassMetrics score_counts(std::string name, std::size_t tp, std::size_t fp,
                          std::size_t fn, std::size_t tn);

/// Class c is positive iff main_probs[c] >= threshold. Throws ConfigError for
/// a threshold outside [0, 1] and ShapeError on a feature shape mismatch.
std::vector<int> predict(const HeadParams& params, const Tensor& hidden,
                         double threshold = 0.5);
std::vector<int> threshold_probs(const std::vector<double>& probs,
                                 double threshold = 0.5);

struct MetricsReport {
  std::string toolkit_version;
  std::string manifest;
  std::string split;
  std::string model_class_set;
  std::string binarization;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  std::size_t clips = 0;
  /// One column per class of the full seven-class schema.
  Prf1 metrics;

  /// Classes as columns; "-" for not evaluable, "N/A" for undefined.
  std::string to_tsv() const;
  Json to_json() const;
};

/// Predicts every clip of `split` and scores the classes of the full
/// schema: classes the model lacks are not evaluable; classes the model has
/// but the dataset never labels count as hard negatives (so they come out
/// N/A when never predicted). Throws DataError naming clips whose features
/// are missing, and for an empty split.
MetricsReport evaluate(const Checkpoint& checkpoint, const Manifest& manifest,
                       Split split, const FeatureSource& features,
                       double threshold = 0.5);

}  // namespace dysflux
