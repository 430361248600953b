// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dysflux/tensor.hpp"

namespace dysflux {

// ---------------------------------------------------------------------------
// Elementwise activations
// ---------------------------------------------------------------------------

/// Logistic sigmoid, evaluated with the two-branch form so that neither
/// exp(x) nor exp(-x) can overflow.
double sigmoid(double x) noexcept;

/// dσ/dx = σ(x)(1 − σ(x)).
double sigmoid_grad(double x) noexcept;

/// log σ(x) = −softplus(−x); finite for every finite x.
double log_sigmoid(double x) noexcept;

/// log(1 + e^x) without overflow.
double softplus(double x) noexcept;

Tensor sigmoid(const Tensor& x);

// ---------------------------------------------------------------------------
// Softmax family (last axis)
// ---------------------------------------------------------------------------

double log_sum_exp(std::span<const double> v);

/// Max-shifted softmax of a single vector.
std::vector<double> softmax(std::span<const double> v);

/// Softmax along the last axis of a tensor of any rank.
Tensor softmax(const Tensor& v);

/// Vector-Jacobian product of softmax: given p = softmax(v) and dL/dp,
/// returns dL/dv = p ⊙ (g − ⟨p, g⟩).
std::vector<double> softmax_vjp(std::span<const double> probs,
                                std::span<const double> upstream);

// ---------------------------------------------------------------------------
// Dense affine maps. Weights are stored out×in, matching y = W x + b.
// ---------------------------------------------------------------------------

/// y = W x + b for a single vector.
std::vector<double> affine(const Tensor& weight, std::span<const double> bias,
                           std::span<const double> x);

/// Row-wise Y = X Wᵀ + b for an n×in input; returns n×out.
Tensor affine_rows(const Tensor& x, const Tensor& weight,
                   std::span<const double> bias);

/// Accumulates `scale · g xᵀ` into `dweight` (out×in) and `scale · g` into
/// `dbias`.
void accumulate_outer(Tensor& dweight, std::span<double> dbias,
                      std::span<const double> g, std::span<const double> x,
                      double scale = 1.0);

/// Accumulates `Wᵀ g` into `dx`.
void accumulate_transpose_product(std::span<double> dx, const Tensor& weight,
                                  std::span<const double> g);

// ---------------------------------------------------------------------------
// Scaled dot-product attention
// ---------------------------------------------------------------------------

struct AttentionResult {
  Tensor output;   ///< n_q × d_v
  Tensor weights;  ///< n_q × n_k, rows sum to 1
};

struct AttentionGrads {
  Tensor d_query;
  Tensor d_key;
  Tensor d_value;
};

/// output_i = Σ_j softmax_j(Q_i·K_j · scale) V_j with scale = 1/sqrt(d) when
/// `scaled` is set, 1 otherwise. Q is n_q×d, K is n_k×d, V is n_k×d_v.
AttentionResult scaled_dot_attention(const Tensor& query, const Tensor& key,
                                     const Tensor& value, bool scaled = true);

/// Analytic VJP of scaled_dot_attention given the forward weights.
AttentionGrads scaled_dot_attention_backward(const Tensor& query,
                                             const Tensor& key,
                                             const Tensor& value,
                                             const Tensor& weights,
                                             const Tensor& d_output,
                                             bool scaled = true);

// ---------------------------------------------------------------------------
// Finite-difference oracle
// ---------------------------------------------------------------------------

/// A scalar function of a tensor. When `grad` is non-null the function must
/// also write its analytic gradient (same shape as `x`) into it.
using ScalarFunction = std::function<double(const Tensor& x, Tensor* grad)>;

struct GradientCheck {
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
};

/// Compares the analytic gradient of `f` at `x` against central differences
/// with step `eps`. The per-coordinate error is
/// |analytic − numeric| / max(1e-8, |numeric|); the maximum is returned.
/// Throws OracleError when any evaluation is non-finite.
GradientCheck finite_difference_check(const ScalarFunction& f, const Tensor& x,
                                      double eps = 1e-5);

}  // namespace dysflux
