// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dysflux/tensor.hpp"

namespace dysflux {

/// Trainable parameters of the classification head.
///
/// The head consumes an L×T×D stack of backbone hidden states, mixes the
/// layers with one scalar weight each, pools the time axis with a single
/// attention query built from the time-mean, and feeds the pooled vector to
/// a C-way sigmoid branch and a 2-way softmax branch.
///
/// Field order below is the canonical order used for flattening, the
/// optimizer state and the checkpoint payload.
struct HeadParams {
  Tensor layer_weights;  ///< L
  Tensor q_weight;       ///< D×D
  Tensor q_bias;         ///< D
  Tensor k_weight;
  Tensor k_bias;
  Tensor v_weight;
  Tensor v_bias;
  Tensor main_weight;  ///< C×D
  Tensor main_bias;    ///< C
  Tensor aux_weight;   ///< 2×D
  Tensor aux_bias;     ///< 2

  /// When false the attention uses the layer sum directly as query source,
  /// keys and values; the projection tensors are kept but unused.
  bool project_qkv = true;

  static constexpr std::array<std::string_view, 11> kFieldNames = {
      "layer_weights", "q_weight",    "q_bias",    "k_weight",
      "k_bias",        "v_weight",    "v_bias",    "main_weight",
      "main_bias",     "aux_weight",  "aux_bias"};

  std::size_t num_layers() const { return layer_weights.size(); }
  std::size_t hidden_dim() const { return q_bias.size(); }
  std::size_t num_classes() const { return main_bias.size(); }
  std::size_t parameter_count() const;

  /// Visits every parameter tensor in canonical order.
  template <class F>
  void for_each(F&& f) {
    Tensor* fields[] = {&layer_weights, &q_weight,    &q_bias,    &k_weight,
                        &k_bias,        &v_weight,    &v_bias,    &main_weight,
                        &main_bias,     &aux_weight,  &aux_bias};
    for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
      f(kFieldNames[i], *fields[i]);
    }
  }
  template <class F>
  void for_each(F&& f) const {
    const Tensor* fields[] = {&layer_weights, &q_weight,   &q_bias,
                              &k_weight,      &k_bias,     &v_weight,
                              &v_bias,        &main_weight, &main_bias,
                              &aux_weight,    &aux_bias};
    for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
      f(kFieldNames[i], *fields[i]);
    }
  }

  std::vector<double> flatten() const;
  void unflatten(std::span<const double> values);

  /// Same shapes, every value zero. Used as the gradient container.
  HeadParams zeros_like() const;

  bool operator==(const HeadParams& other) const = default;
};

using HeadGrads = HeadParams;

/// Allocates zero-filled parameters with the given dimensions.
HeadParams make_params(std::size_t num_layers, std::size_t hidden_dim,
                       std::size_t num_classes, bool project_qkv = true);

/// Deterministic initialization: layer weights 1/L, projection and linear
/// weights uniform in ±sqrt(1/fan_in), biases zero.
HeadParams init_params(std::uint64_t seed, std::size_t num_layers,
                       std::size_t hidden_dim, std::size_t num_classes,
                       bool project_qkv = true);

struct HeadOutput {
  std::vector<double> main_probs;
  std::vector<double> main_logits;
  std::vector<double> aux_logits;
  std::vector<double> pooled;
};

/// Intermediates saved by head_forward for the backward pass.
struct ForwardTrace {
  bool valid = false;
  Shape hidden_shape;
  Tensor wls;                ///< T×D
  std::vector<double> mean;  ///< D
  Tensor query;              ///< 1×D
  Tensor keys;               ///< T×D
  Tensor values;             ///< T×D
  Tensor attention;          ///< 1×T
  std::vector<double> pooled;
};

/// WLS[t, d] = Σ_l w_l · hidden[l, t, d].
Tensor weighted_layer_sum(const Tensor& hidden, const Tensor& layer_weights);

/// Pools a T×D sequence into one D-vector. The query is the projected time
/// mean; keys and values are projections of the sequence itself.
std::vector<double> attention_pool(const Tensor& wls, const HeadParams& params,
                                   ForwardTrace* trace = nullptr);

HeadOutput head_forward(const Tensor& hidden, const HeadParams& params,
                        ForwardTrace* trace = nullptr);

/// Gradients of every parameter given upstream gradients on the main and
/// auxiliary logits. The hidden states are treated as constants.
/// Throws StateError if `trace` does not hold a forward pass over `hidden`.
HeadGrads head_backward(const Tensor& hidden, const HeadParams& params,
                        const ForwardTrace& trace,
                        std::span<const double> d_main_logits,
                        std::span<const double> d_aux_logits);

/// Validates that `hidden` is L×T×D with L and D matching `params`.
void check_hidden_shape(const Tensor& hidden, const HeadParams& params);

}  // namespace dysflux
