// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dysflux {

enum class MainLossKind { focal, weighted_bce };

std::string to_string(MainLossKind kind);
MainLossKind parse_main_loss_kind(const std::string& s);

struct LossConfig {
  double alpha = 0.7;
  double gamma = 3.0;
  double w_main = 0.9;
  MainLossKind main_loss_kind = MainLossKind::focal;
  std::optional<std::vector<double>> class_weights;
  std::optional<std::vector<double>> aux_class_weights;

  /// Throws ConfigError on any out-of-range field.
  void validate() const;
};

/// Value of a scalar loss together with its derivative w.r.t. the logit.
struct ScalarLoss {
  double value = 0.0;
  double d_logit = 0.0;
};

/// Value of a vector loss together with its gradient w.r.t. the logits.
struct VectorLoss {
  double value = 0.0;
  std::vector<double> d_logits;
};

// Probability-facing forms. These define the semantics; training uses the
// logit forms below, which never materialize log(p) of a rounded p.

/// −α (1 − p_t)^γ log p_t with p_t = p for y = 1, 1 − p for y = 0.
/// Throws DomainError unless 0 < p < 1.
double focal_loss(double p, int y, double alpha, double gamma);

/// Mean of focal_loss over classes.
double focal_loss_multi(std::span<const double> probs,
                        std::span<const int> targets, double alpha,
                        double gamma);

/// Mean over classes of w_c · BCE(p_c, y_c). Throws ConfigError on a
/// non-positive weight.
double weighted_bce(std::span<const double> probs, std::span<const int> targets,
                    std::span<const double> class_weights);

/// Weighted −log softmax(aux_logits)[target]. Empty weights mean 1.
double aux_cross_entropy(std::span<const double> aux_logits, int target,
                         std::span<const double> aux_class_weights = {});

/// w_main · l_main + (1 − w_main) · l_aux.
double mtl_loss(double l_main, double l_aux, double w_main);

// Logit forms with analytic gradients.

ScalarLoss focal_loss_logit(double logit, int y, double alpha, double gamma);

ScalarLoss bce_logit(double logit, int y);

/// `mask`, when non-empty, selects the classes that enter the mean; the
/// gradient of masked-out classes is zero.
VectorLoss focal_loss_multi_logits(std::span<const double> logits,
                                   std::span<const int> targets, double alpha,
                                   double gamma,
                                   std::span<const int> mask = {});

VectorLoss weighted_bce_logits(std::span<const double> logits,
                               std::span<const int> targets,
                               std::span<const double> class_weights,
                               std::span<const int> mask = {});

VectorLoss aux_cross_entropy_logits(std::span<const double> aux_logits,
                                    int target,
                                    std::span<const double> aux_class_weights = {});

/// Dispatches to focal_loss_multi_logits or weighted_bce_logits according to
/// `config.main_loss_kind`.
VectorLoss main_loss_logits(const LossConfig& config,
                            std::span<const double> logits,
                            std::span<const int> targets,
                            std::span<const int> mask = {});

}  // namespace dysflux
