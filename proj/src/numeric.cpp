// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "dysflux/error.hpp"

namespace dysflux {

double sigmoid(double x) noexcept {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_grad(double x) noexcept {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

double softplus(double x) noexcept {
  // log(1 + e^x) = max(x, 0) + log1p(e^-|x|)
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double log_sigmoid(double x) noexcept { return -softplus(-x); }

Tensor sigmoid(const Tensor& x) {
  Tensor out = x;
  for (auto& v : out.data()) v = sigmoid(v);
  return out;
}

double log_sum_exp(std::span<const double> v) {
  if (v.empty()) throw ShapeError("log_sum_exp of an empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - m);
  return m + std::log(sum);
}

std::vector<double> softmax(std::span<const double> v) {
  if (v.empty()) throw ShapeError("softmax of an empty vector");
  const double m = *std::max_element(v.begin(), v.end());
  std::vector<double> out(v.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - m);
    sum += out[i];
  }
  for (auto& x : out) x /= sum;
  return out;
}

Tensor softmax(const Tensor& v) {
  if (v.rank() == 0) throw ShapeError("softmax of a rank-0 tensor");
  Tensor out = v;
  const std::size_t width = v.shape().back();
  auto data = out.data();
  for (std::size_t off = 0; off < data.size(); off += width) {
    auto row = data.subspan(off, width);
    auto p = softmax(std::span<const double>(row.data(), row.size()));
    std::copy(p.begin(), p.end(), row.begin());
  }
  return out;
}

std::vector<double> softmax_vjp(std::span<const double> probs,
                                std::span<const double> upstream) {
  if (probs.size() != upstream.size()) {
    throw ShapeError("softmax_vjp: probs and upstream differ in length");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) dot += probs[i] * upstream[i];
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] * (upstream[i] - dot);
  }
  return out;
}

std::vector<double> affine(const Tensor& weight, std::span<const double> bias,
                           std::span<const double> x) {
  require_rank(weight, 2, "affine weight");
  const std::size_t out_dim = weight.dim(0);
  const std::size_t in_dim = weight.dim(1);
  if (x.size() != in_dim || bias.size() != out_dim) {
    throw ShapeError("affine: weight " + shape_to_string(weight.shape()) +
                     " incompatible with input " + std::to_string(x.size()) +
                     " / bias " + std::to_string(bias.size()));
  }
  std::vector<double> y(out_dim);
  for (std::size_t o = 0; o < out_dim; ++o) {
    const auto row = weight.slice(o);
    double acc = bias[o];
    for (std::size_t i = 0; i < in_dim; ++i) acc += row[i] * x[i];
    y[o] = acc;
  }
  return y;
}

Tensor affine_rows(const Tensor& x, const Tensor& weight,
                   std::span<const double> bias) {
  require_rank(x, 2, "affine_rows input");
  Tensor out({x.dim(0), weight.dim(0)});
  for (std::size_t r = 0; r < x.dim(0); ++r) {
    auto y = affine(weight, bias, x.slice(r));
    std::copy(y.begin(), y.end(), out.slice(r).begin());
  }
  return out;
}

void accumulate_outer(Tensor& dweight, std::span<double> dbias,
                      std::span<const double> g, std::span<const double> x,
                      double scale) {
  const std::size_t out_dim = dweight.dim(0);
  const std::size_t in_dim = dweight.dim(1);
  if (g.size() != out_dim || x.size() != in_dim || dbias.size() != out_dim) {
    throw ShapeError("accumulate_outer: shape mismatch");
  }
  for (std::size_t o = 0; o < out_dim; ++o) {
    const double go = scale * g[o];
    dbias[o] += go;
    auto row = dweight.slice(o);
    for (std::size_t i = 0; i < in_dim; ++i) row[i] += go * x[i];
  }
}

void accumulate_transpose_product(std::span<double> dx, const Tensor& weight,
                                  std::span<const double> g) {
  const std::size_t out_dim = weight.dim(0);
  const std::size_t in_dim = weight.dim(1);
  if (g.size() != out_dim || dx.size() != in_dim) {
    throw ShapeError("accumulate_transpose_product: shape mismatch");
  }
  for (std::size_t o = 0; o < out_dim; ++o) {
    const auto row = weight.slice(o);
    const double go = g[o];
    for (std::size_t i = 0; i < in_dim; ++i) dx[i] += row[i] * go;
  }
}

namespace {

void check_attention_shapes(const Tensor& q, const Tensor& k, const Tensor& v) {
  require_rank(q, 2, "attention query");
  require_rank(k, 2, "attention key");
  require_rank(v, 2, "attention value");
  if (q.dim(1) != k.dim(1)) {
    throw ShapeError("attention: query width " + std::to_string(q.dim(1)) +
                     " != key width " + std::to_string(k.dim(1)));
  }
  if (k.dim(0) != v.dim(0)) {
    throw ShapeError("attention: " + std::to_string(k.dim(0)) + " keys but " +
                     std::to_string(v.dim(0)) + " values");
  }
}

double attention_scale(std::size_t d, bool scaled) {
  return scaled ? 1.0 / std::sqrt(static_cast<double>(d)) : 1.0;
}

}  // namespace

AttentionResult scaled_dot_attention(const Tensor& query, const Tensor& key,
                                     const Tensor& value, bool scaled) {
  check_attention_shapes(query, key, value);
  const std::size_t n_q = query.dim(0);
  const std::size_t n_k = key.dim(0);
  const std::size_t d = query.dim(1);
  const std::size_t d_v = value.dim(1);
  const double scale = attention_scale(d, scaled);

  AttentionResult result{Tensor({n_q, d_v}), Tensor({n_q, n_k})};
  std::vector<double> scores(n_k);
  for (std::size_t i = 0; i < n_q; ++i) {
    const auto qi = query.slice(i);
    for (std::size_t j = 0; j < n_k; ++j) {
      const auto kj = key.slice(j);
      double dot = 0.0;
      for (std::size_t c = 0; c < d; ++c) dot += qi[c] * kj[c];
      scores[j] = dot * scale;
    }
    const auto w = softmax(scores);
    std::copy(w.begin(), w.end(), result.weights.slice(i).begin());
    auto out = result.output.slice(i);
    for (std::size_t j = 0; j < n_k; ++j) {
      const auto vj = value.slice(j);
      for (std::size_t c = 0; c < d_v; ++c) out[c] += w[j] * vj[c];
    }
  }
  return result;
}

AttentionGrads scaled_dot_attention_backward(const Tensor& query,
                                             const Tensor& key,
                                             const Tensor& value,
                                             const Tensor& weights,
                                             const Tensor& d_output,
                                             bool scaled) {
  check_attention_shapes(query, key, value);
  const std::size_t n_q = query.dim(0);
  const std::size_t n_k = key.dim(0);
  const std::size_t d = query.dim(1);
  const std::size_t d_v = value.dim(1);
  if (weights.shape() != Shape{n_q, n_k} ||
      d_output.shape() != Shape{n_q, d_v}) {
    throw ShapeError("attention backward: weights/upstream shape mismatch");
  }
  const double scale = attention_scale(d, scaled);

  AttentionGrads g{Tensor(query.shape()), Tensor(key.shape()),
                   Tensor(value.shape())};
  std::vector<double> d_weights(n_k);
  for (std::size_t i = 0; i < n_q; ++i) {
    const auto w = weights.slice(i);
    const auto go = d_output.slice(i);
    for (std::size_t j = 0; j < n_k; ++j) {
      const auto vj = value.slice(j);
      auto dvj = g.d_value.slice(j);
      double acc = 0.0;
      for (std::size_t c = 0; c < d_v; ++c) {
        acc += go[c] * vj[c];
        dvj[c] += w[j] * go[c];
      }
      d_weights[j] = acc;
    }
    const auto d_scores = softmax_vjp(w, d_weights);
    const auto qi = query.slice(i);
    auto dqi = g.d_query.slice(i);
    for (std::size_t j = 0; j < n_k; ++j) {
      const double ds = d_scores[j] * scale;
      const auto kj = key.slice(j);
      auto dkj = g.d_key.slice(j);
      for (std::size_t c = 0; c < d; ++c) {
        dqi[c] += ds * kj[c];
        dkj[c] += ds * qi[c];
      }
    }
  }
  return g;
}

GradientCheck finite_difference_check(const ScalarFunction& f, const Tensor& x,
                                      double eps) {
  if (!(eps > 0.0)) throw ConfigError("finite_difference_check: eps must be > 0");
  Tensor analytic(x.shape());
  const double f0 = f(x, &analytic);
  if (!std::isfinite(f0)) {
    throw OracleError("finite_difference_check: f(x) is not finite");
  }
  if (analytic.shape() != x.shape()) {
    throw ShapeError("finite_difference_check: gradient shape " +
                     shape_to_string(analytic.shape()) + " != input shape " +
                     shape_to_string(x.shape()));
  }

  GradientCheck report;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe, nullptr);
    probe[i] = orig - eps;
    const double fm = f(probe, nullptr);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw OracleError("finite_difference_check: non-finite value at index " +
                        std::to_string(i));
    }
    const double numeric = (fp - fm) / (2.0 * eps);
    const double err = std::abs(analytic[i] - numeric) /
                       std::max(1e-8, std::abs(numeric));
    if (i == 0 || err > report.max_rel_error) {
      report.max_rel_error = err;
      report.worst_index = i;
      report.worst_analytic = analytic[i];
      report.worst_numeric = numeric;
    }
  }
  return report;
}

}  // namespace dysflux
