// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/losses.hpp"

#include <cmath>

#include "dysflux/error.hpp"
#include "dysflux/numeric.hpp"

namespace dysflux {

std::string to_string(MainLossKind kind) {
  return kind == MainLossKind::focal ? "focal" : "weighted_bce";
}

MainLossKind parse_main_loss_kind(const std::string& s) {
  if (s == "focal") return MainLossKind::focal;
  if (s == "weighted_bce") return MainLossKind::weighted_bce;
  throw ConfigError("unknown main loss kind '" + s + "'");
}

void LossConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw ConfigError("alpha must lie in (0, 1], got " + std::to_string(alpha));
  }
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("gamma must be >= 0, got " + std::to_string(gamma));
  }
  if (!(w_main >= 0.0 && w_main <= 1.0)) {
    throw ConfigError("w_main must lie in [0, 1], got " +
                      std::to_string(w_main));
  }
  auto check_positive = [](const std::optional<std::vector<double>>& w,
                           const char* name) {
    if (!w) return;
    for (double v : *w) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ConfigError(std::string(name) + " must all be > 0");
      }
    }
  };
  check_positive(class_weights, "class_weights");
  check_positive(aux_class_weights, "aux_class_weights");
  if (aux_class_weights && aux_class_weights->size() != 2) {
    throw ConfigError("aux_class_weights must have length 2");
  }
}

namespace {

void check_target(int y) {
  if (y != 0 && y != 1) {
    throw DomainError("binary target must be 0 or 1, got " + std::to_string(y));
  }
}

void check_lengths(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch (" +
                     std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

void check_weights(std::span<const double> w) {
  for (double v : w) {
    if (!(v > 0.0)) {
      throw ConfigError("class weights must be positive, got " +
                        std::to_string(v));
    }
  }
}

bool included(std::span<const int> mask, std::size_t c) {
  return mask.empty() || mask[c] != 0;
}

}  // namespace

double focal_loss(double p, int y, double alpha, double gamma) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("focal_loss: probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
  check_target(y);
  const double pt = y == 1 ? p : 1.0 - p;
  return -alpha * std::pow(1.0 - pt, gamma) * std::log(pt);
}

double focal_loss_multi(std::span<const double> probs,
                        std::span<const int> targets, double alpha,
                        double gamma) {
  check_lengths(probs.size(), targets.size(), "focal_loss_multi");
  if (probs.empty()) throw ShapeError("focal_loss_multi: no classes");
  double sum = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    sum += focal_loss(probs[c], targets[c], alpha, gamma);
  }
  return sum / static_cast<double>(probs.size());
}

double weighted_bce(std::span<const double> probs, std::span<const int> targets,
                    std::span<const double> class_weights) {
  check_lengths(probs.size(), targets.size(), "weighted_bce");
  check_lengths(probs.size(), class_weights.size(), "weighted_bce weights");
  check_weights(class_weights);
  if (probs.empty()) throw ShapeError("weighted_bce: no classes");
  double sum = 0.0;
  for (std::size_t c = 0; c < probs.size(); ++c) {
    const double p = probs[c];
    if (!(p > 0.0 && p < 1.0)) {
      throw DomainError("weighted_bce: probability must lie in (0, 1)");
    }
    check_target(targets[c]);
    const double bce = targets[c] == 1 ? -std::log(p) : -std::log(1.0 - p);
    sum += class_weights[c] * bce;
  }
  return sum / static_cast<double>(probs.size());
}

double aux_cross_entropy(std::span<const double> aux_logits, int target,
                         std::span<const double> aux_class_weights) {
  return aux_cross_entropy_logits(aux_logits, target, aux_class_weights).value;
}

double mtl_loss(double l_main, double l_aux, double w_main) {
  return w_main * l_main + (1.0 - w_main) * l_aux;
}

ScalarLoss focal_loss_logit(double logit, int y, double alpha, double gamma) {
  check_target(y);
  // With u = ±logit, p_t = σ(u) and 1 − p_t = σ(−u).
  const double sign = y == 1 ? 1.0 : -1.0;
  const double u = sign * logit;
  const double log_pt = log_sigmoid(u);
  const double pt = sigmoid(u);
  const double q = sigmoid(-u);
  const double q_gamma = std::pow(q, gamma);
  ScalarLoss out;
  out.value = -alpha * q_gamma * log_pt;
  out.d_logit = sign * alpha * q_gamma * (gamma * pt * log_pt - q);
  return out;
}

ScalarLoss bce_logit(double logit, int y) {
  check_target(y);
  const double sign = y == 1 ? 1.0 : -1.0;
  const double u = sign * logit;
  return {softplus(-u), -sign * sigmoid(-u)};
}

VectorLoss focal_loss_multi_logits(std::span<const double> logits,
                                   std::span<const int> targets, double alpha,
                                   double gamma, std::span<const int> mask) {
  check_lengths(logits.size(), targets.size(), "focal_loss_multi");
  if (!mask.empty()) check_lengths(logits.size(), mask.size(), "class mask");
  VectorLoss out{0.0, std::vector<double>(logits.size(), 0.0)};
  std::size_t n = 0;
  for (std::size_t c = 0; c < logits.size(); ++c) n += included(mask, c);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (!included(mask, c)) continue;
    const auto l = focal_loss_logit(logits[c], targets[c], alpha, gamma);
    out.value += l.value;
    out.d_logits[c] = l.d_logit * inv_n;
  }
  out.value *= inv_n;
  return out;
}

VectorLoss weighted_bce_logits(std::span<const double> logits,
                               std::span<const int> targets,
                               std::span<const double> class_weights,
                               std::span<const int> mask) {
  check_lengths(logits.size(), targets.size(), "weighted_bce");
  if (!class_weights.empty()) {
    check_lengths(logits.size(), class_weights.size(), "weighted_bce weights");
    check_weights(class_weights);
  }
  if (!mask.empty()) check_lengths(logits.size(), mask.size(), "class mask");
  VectorLoss out{0.0, std::vector<double>(logits.size(), 0.0)};
  std::size_t n = 0;
  for (std::size_t c = 0; c < logits.size(); ++c) n += included(mask, c);
  if (n == 0) return out;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    if (!included(mask, c)) continue;
    const double w = class_weights.empty() ? 1.0 : class_weights[c];
    const auto l = bce_logit(logits[c], targets[c]);
    out.value += w * l.value;
    out.d_logits[c] = w * l.d_logit * inv_n;
  }
  out.value *= inv_n;
  return out;
}

VectorLoss aux_cross_entropy_logits(std::span<const double> aux_logits,
                                    int target,
                                    std::span<const double> aux_class_weights) {
  if (aux_logits.size() != 2) {
    throw ShapeError("aux_cross_entropy: expected 2 logits, got " +
                     std::to_string(aux_logits.size()));
  }
  check_target(target);
  if (!aux_class_weights.empty()) {
    check_lengths(2, aux_class_weights.size(), "aux class weights");
    check_weights(aux_class_weights);
  }
  const double w = aux_class_weights.empty()
                       ? 1.0
                       : aux_class_weights[static_cast<std::size_t>(target)];
  const auto t = static_cast<std::size_t>(target);
  const auto p = softmax(aux_logits);
  VectorLoss out;
  out.value = w * (log_sum_exp(aux_logits) - aux_logits[t]);
  out.d_logits = {w * p[0], w * p[1]};
  out.d_logits[t] -= w;
  return out;
}

VectorLoss main_loss_logits(const LossConfig& config,
                            std::span<const double> logits,
                            std::span<const int> targets,
                            std::span<const int> mask) {
  if (config.main_loss_kind == MainLossKind::focal) {
    return focal_loss_multi_logits(logits, targets, config.alpha, config.gamma,
                                   mask);
  }
  std::span<const double> w;
  if (config.class_weights) w = *config.class_weights;
  return weighted_bce_logits(logits, targets, w, mask);
}

}  // namespace dysflux
