// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/head.hpp"

#include <algorithm>
#include <cmath>

#include "dysflux/error.hpp"
#include "dysflux/numeric.hpp"
#include "dysflux/random.hpp"

namespace dysflux {

std::size_t HeadParams::parameter_count() const {
  std::size_t n = 0;
  for_each([&](std::string_view, const Tensor& t) { n += t.size(); });
  return n;
}

std::vector<double> HeadParams::flatten() const {
  std::vector<double> out;
  out.reserve(parameter_count());
  for_each([&](std::string_view, const Tensor& t) {
    out.insert(out.end(), t.values().begin(), t.values().end());
  });
  return out;
}

void HeadParams::unflatten(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw ShapeError("unflatten: expected " +
                     std::to_string(parameter_count()) + " values, got " +
                     std::to_string(values.size()));
  }
  std::size_t off = 0;
  for_each([&](std::string_view, Tensor& t) {
    std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(off), t.size(),
                t.data().begin());
    off += t.size();
  });
}

HeadParams HeadParams::zeros_like() const {
  HeadParams z = *this;
  z.for_each([](std::string_view, Tensor& t) { t.fill(0.0); });
  return z;
}

HeadParams make_params(std::size_t num_layers, std::size_t hidden_dim,
                       std::size_t num_classes, bool project_qkv) {
  if (num_layers == 0 || hidden_dim == 0 || num_classes == 0) {
    throw ConfigError("head dimensions must be positive");
  }
  const std::size_t d = hidden_dim;
  HeadParams p;
  p.layer_weights = Tensor({num_layers});
  p.q_weight = Tensor({d, d});
  p.q_bias = Tensor({d});
  p.k_weight = Tensor({d, d});
  p.k_bias = Tensor({d});
  p.v_weight = Tensor({d, d});
  p.v_bias = Tensor({d});
  p.main_weight = Tensor({num_classes, d});
  p.main_bias = Tensor({num_classes});
  p.aux_weight = Tensor({2, d});
  p.aux_bias = Tensor({2});
  p.project_qkv = project_qkv;
  return p;
}

HeadParams init_params(std::uint64_t seed, std::size_t num_layers,
                       std::size_t hidden_dim, std::size_t num_classes,
                       bool project_qkv) {
  HeadParams p = make_params(num_layers, hidden_dim, num_classes, project_qkv);
  p.layer_weights.fill(1.0 / static_cast<double>(num_layers));
  Rng rng(seed);
  const double bound = std::sqrt(1.0 / static_cast<double>(hidden_dim));
  for (Tensor* w : {&p.q_weight, &p.k_weight, &p.v_weight, &p.main_weight,
                    &p.aux_weight}) {
    for (auto& v : w->data()) v = rng.uniform(-bound, bound);
  }
  return p;
}

void check_hidden_shape(const Tensor& hidden, const HeadParams& params) {
  require_rank(hidden, 3, "hidden states");
  if (hidden.dim(0) != params.num_layers()) {
    throw ShapeError("hidden states have " + std::to_string(hidden.dim(0)) +
                     " layers, head expects " +
                     std::to_string(params.num_layers()));
  }
  if (hidden.dim(2) != params.hidden_dim()) {
    throw ShapeError("hidden states have width " +
                     std::to_string(hidden.dim(2)) + ", head expects " +
                     std::to_string(params.hidden_dim()));
  }
}

Tensor weighted_layer_sum(const Tensor& hidden, const Tensor& layer_weights) {
  require_rank(hidden, 3, "hidden states");
  const std::size_t L = hidden.dim(0);
  if (layer_weights.size() != L) {
    throw ShapeError("weighted_layer_sum: " + std::to_string(L) +
                     " layers but " + std::to_string(layer_weights.size()) +
                     " weights");
  }
  const std::size_t T = hidden.dim(1);
  const std::size_t D = hidden.dim(2);
  Tensor out({T, D});
  auto dst = out.data();
  for (std::size_t l = 0; l < L; ++l) {
    const double w = layer_weights[l];
    const auto layer = hidden.slice(l);
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += w * layer[i];
  }
  return out;
}

std::vector<double> attention_pool(const Tensor& wls, const HeadParams& params,
                                   ForwardTrace* trace) {
  require_rank(wls, 2, "weighted layer sum");
  const std::size_t T = wls.dim(0);
  const std::size_t D = wls.dim(1);
  if (D != params.hidden_dim()) {
    throw ShapeError("attention_pool: width " + std::to_string(D) +
                     " != head width " + std::to_string(params.hidden_dim()));
  }

  std::vector<double> mean(D, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const auto row = wls.slice(t);
    for (std::size_t d = 0; d < D; ++d) mean[d] += row[d];
  }
  for (auto& m : mean) m /= static_cast<double>(T);

  Tensor query({1, D});
  Tensor keys;
  Tensor values;
  if (params.project_qkv) {
    const auto q = affine(params.q_weight, params.q_bias.data(), mean);
    std::copy(q.begin(), q.end(), query.data().begin());
    // The key bias adds q·b_k to every score and cancels in the softmax, so
    // it is left out of the scores; its gradient is identically zero.
    const std::vector<double> no_bias(D, 0.0);
    keys = affine_rows(wls, params.k_weight, no_bias);
    values = affine_rows(wls, params.v_weight, params.v_bias.data());
  } else {
    std::copy(mean.begin(), mean.end(), query.data().begin());
    keys = wls;
    values = wls;
  }

  auto att = scaled_dot_attention(query, keys, values);
  std::vector<double> pooled(att.output.values());
  if (trace) {
    trace->wls = wls;
    trace->mean = std::move(mean);
    trace->query = std::move(query);
    trace->keys = std::move(keys);
    trace->values = std::move(values);
    trace->attention = std::move(att.weights);
    trace->pooled = pooled;
  }
  return pooled;
}

HeadOutput head_forward(const Tensor& hidden, const HeadParams& params,
                        ForwardTrace* trace) {
  check_hidden_shape(hidden, params);
  if (trace) trace->valid = false;
  const Tensor wls = weighted_layer_sum(hidden, params.layer_weights);

  HeadOutput out;
  out.pooled = attention_pool(wls, params, trace);
  out.main_logits = affine(params.main_weight, params.main_bias.data(),
                           out.pooled);
  out.aux_logits = affine(params.aux_weight, params.aux_bias.data(),
                          out.pooled);
  out.main_probs.resize(out.main_logits.size());
  std::transform(out.main_logits.begin(), out.main_logits.end(),
                 out.main_probs.begin(), [](double z) { return sigmoid(z); });
  if (trace) {
    trace->hidden_shape = hidden.shape();
    trace->valid = true;
  }
  return out;
}

HeadGrads head_backward(const Tensor& hidden, const HeadParams& params,
                        const ForwardTrace& trace,
                        std::span<const double> d_main_logits,
                        std::span<const double> d_aux_logits) {
  if (!trace.valid) {
    throw StateError("head_backward called without a forward pass");
  }
  if (trace.hidden_shape != hidden.shape()) {
    throw StateError("head_backward: trace was recorded for hidden states " +
                     shape_to_string(trace.hidden_shape) + ", got " +
                     shape_to_string(hidden.shape()));
  }
  check_hidden_shape(hidden, params);
  if (d_main_logits.size() != params.num_classes() || d_aux_logits.size() != 2) {
    throw ShapeError("head_backward: upstream gradients have wrong length");
  }

  const std::size_t L = hidden.dim(0);
  const std::size_t T = hidden.dim(1);
  const std::size_t D = hidden.dim(2);
  HeadGrads g = params.zeros_like();

  // Output branches.
  std::vector<double> d_pooled(D, 0.0);
  accumulate_outer(g.main_weight, g.main_bias.data(), d_main_logits,
                   trace.pooled);
  accumulate_transpose_product(d_pooled, params.main_weight, d_main_logits);
  accumulate_outer(g.aux_weight, g.aux_bias.data(), d_aux_logits, trace.pooled);
  accumulate_transpose_product(d_pooled, params.aux_weight, d_aux_logits);

  // Attention.
  const Tensor d_out({1, D}, d_pooled);
  const auto att = scaled_dot_attention_backward(
      trace.query, trace.keys, trace.values, trace.attention, d_out);

  Tensor d_wls({T, D});
  std::vector<double> d_mean(D, 0.0);
  if (params.project_qkv) {
    const auto dq = att.d_query.slice(0);
    accumulate_outer(g.q_weight, g.q_bias.data(), dq, trace.mean);
    accumulate_transpose_product(d_mean, params.q_weight, dq);
    for (std::size_t t = 0; t < T; ++t) {
      const auto x = trace.wls.slice(t);
      const auto dk = att.d_key.slice(t);
      const auto dv = att.d_value.slice(t);
      accumulate_outer(g.k_weight, g.k_bias.data(), dk, x);
      accumulate_outer(g.v_weight, g.v_bias.data(), dv, x);
      auto dx = d_wls.slice(t);
      accumulate_transpose_product(dx, params.k_weight, dk);
      accumulate_transpose_product(dx, params.v_weight, dv);
    }
  } else {
    const auto dq = att.d_query.slice(0);
    std::copy(dq.begin(), dq.end(), d_mean.begin());
    for (std::size_t t = 0; t < T; ++t) {
      auto dx = d_wls.slice(t);
      const auto dk = att.d_key.slice(t);
      const auto dv = att.d_value.slice(t);
      for (std::size_t d = 0; d < D; ++d) dx[d] += dk[d] + dv[d];
    }
  }
  const double inv_t = 1.0 / static_cast<double>(T);
  for (std::size_t t = 0; t < T; ++t) {
    auto dx = d_wls.slice(t);
    for (std::size_t d = 0; d < D; ++d) dx[d] += d_mean[d] * inv_t;
  }

  // Layer weights.
  const auto dw = d_wls.data();
  for (std::size_t l = 0; l < L; ++l) {
    const auto layer = hidden.slice(l);
    double acc = 0.0;
    for (std::size_t i = 0; i < dw.size(); ++i) acc += dw[i] * layer[i];
    g.layer_weights[l] = acc;
  }
  return g;
}

}  // namespace dysflux
