// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <optional>
#include <vector>

#include "dysflux/head.hpp"
#include "dysflux/losses.hpp"

namespace dysflux {

/// Supervision for one clip in the head's class order.
struct ClipTargets {
  std::vector<int> labels;
  /// Classes that enter the main-loss mean; empty means all.
  std::vector<int> mask;
  /// Auxiliary class, or nullopt when the clip has no auxiliary label
  /// (e.g. unknown gender).
  std::optional<int> aux;
};

struct ClipLoss {
  double main = 0.0;
  double aux = 0.0;
  bool has_aux = false;
  HeadOutput output;
};

/// Runs the head on one clip and evaluates the main and auxiliary losses.
/// When `grads` is given, accumulates
///   main_scale · ∂main/∂θ + aux_scale · ∂aux/∂θ
/// into it. Batch training passes w_main/B and (1 − w_main)/B_aux.
ClipLoss clip_objective(const Tensor& hidden, const HeadParams& params,
                        const ClipTargets& targets, const LossConfig& loss,
                        HeadGrads* grads = nullptr, double main_scale = 1.0,
                        double aux_scale = 1.0);

/// Adds `scale · src` into `dst` field by field.
void axpy(HeadParams& dst, const HeadParams& src, double scale);

}  // namespace dysflux
