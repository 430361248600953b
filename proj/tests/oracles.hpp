// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors
//
// Reference implementations used only by the test suites. They are written
// as plain loops (or in extended precision) and share no code with the
// library paths they check.

#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dysflux/head.hpp"
#include "dysflux/tensor.hpp"

namespace dysflux::oracle {

using Big = boost::multiprecision::cpp_bin_float_50;

inline double sigmoid(double x) {
  const Big b = 1 / (1 + boost::multiprecision::exp(-Big(x)));
  return static_cast<double>(b);
}

inline std::vector<double> softmax(const std::vector<double>& v) {
  std::vector<Big> e(v.size());
  Big sum = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    e[i] = boost::multiprecision::exp(Big(v[i]));
    sum += e[i];
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = static_cast<double>(e[i] / sum);
  }
  return out;
}

/// out[i][c] = Σ_j softmax_j(Σ_c' Q[i][c'] K[j][c'] / sqrt(d)) V[j][c]
inline std::vector<std::vector<double>> attention(
    const std::vector<std::vector<double>>& q,
    const std::vector<std::vector<double>>& k,
    const std::vector<std::vector<double>>& v) {
  const std::size_t d = q[0].size();
  std::vector<std::vector<double>> out;
  for (const auto& qi : q) {
    std::vector<double> scores;
    for (const auto& kj : k) {
      long double dot = 0;
      for (std::size_t c = 0; c < d; ++c) dot += (long double)qi[c] * kj[c];
      scores.push_back(static_cast<double>(dot / std::sqrt((long double)d)));
    }
    const auto w = softmax(scores);
    std::vector<double> row(v[0].size(), 0.0);
    for (std::size_t j = 0; j < k.size(); ++j) {
      for (std::size_t c = 0; c < row.size(); ++c) row[c] += w[j] * v[j][c];
    }
    out.push_back(row);
  }
  return out;
}

inline std::vector<std::vector<double>> rows(const Tensor& t) {
  std::vector<std::vector<double>> out(t.dim(0));
  for (std::size_t i = 0; i < t.dim(0); ++i) {
    out[i].assign(t.slice(i).begin(), t.slice(i).end());
  }
  return out;
}

/// Triple-loop weighted layer sum.
inline std::vector<std::vector<double>> weighted_layer_sum(
    const Tensor& hidden, const std::vector<double>& w) {
  const std::size_t L = hidden.dim(0), T = hidden.dim(1), D = hidden.dim(2);
  std::vector<std::vector<double>> out(T, std::vector<double>(D, 0.0));
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t d = 0; d < D; ++d) {
      long double acc = 0;
      for (std::size_t l = 0; l < L; ++l)
        acc += (long double)w[l] * hidden.at(l, t, d);
      out[t][d] = static_cast<double>(acc);
    }
  return out;
}

inline std::vector<double> linear(const Tensor& w, const Tensor& b,
                                  const std::vector<double>& x) {
  std::vector<double> y(w.dim(0));
  for (std::size_t o = 0; o < w.dim(0); ++o) {
    long double acc = b[o];
    for (std::size_t i = 0; i < w.dim(1); ++i) acc += (long double)w.at(o, i) * x[i];
    y[o] = static_cast<double>(acc);
  }
  return y;
}

struct HeadReference {
  std::vector<double> pooled, main_logits, main_probs, aux_logits;
};

/// The head composed from the oracles above.
inline HeadReference head(const Tensor& hidden, const HeadParams& p) {
  const auto wls = weighted_layer_sum(hidden, p.layer_weights.values());
  const std::size_t T = wls.size(), D = wls[0].size();
  std::vector<double> mean(D, 0.0);
  for (std::size_t d = 0; d < D; ++d) {
    long double acc = 0;
    for (std::size_t t = 0; t < T; ++t) acc += wls[t][d];
    mean[d] = static_cast<double>(acc / T);
  }
  std::vector<std::vector<double>> q, k, v;
  if (p.project_qkv) {
    q.push_back(linear(p.q_weight, p.q_bias, mean));
    for (const auto& x : wls) {
      k.push_back(linear(p.k_weight, p.k_bias, x));
      v.push_back(linear(p.v_weight, p.v_bias, x));
    }
  } else {
    q.push_back(mean);
    k = wls;
    v = wls;
  }
  HeadReference r;
  r.pooled = attention(q, k, v)[0];
  r.main_logits = linear(p.main_weight, p.main_bias, r.pooled);
  r.aux_logits = linear(p.aux_weight, p.aux_bias, r.pooled);
  for (double z : r.main_logits) r.main_probs.push_back(sigmoid(z));
  return r;
}

/// Extended-precision focal loss straight from its definition.
inline double focal(double p, int y, double alpha, double gamma) {
  const Big pt = y == 1 ? Big(p) : 1 - Big(p);
  return static_cast<double>(-Big(alpha) *
                             boost::multiprecision::pow(1 - pt, Big(gamma)) *
                             boost::multiprecision::log(pt));
}

inline double bce(double p, int y) {
  const Big pb(p);
  return static_cast<double>(y == 1 ? -boost::multiprecision::log(pb)
                                    : -boost::multiprecision::log(1 - pb));
}

inline double aux_ce(const std::vector<double>& z, int target, double weight) {
  Big sum = 0;
  for (double v : z) sum += boost::multiprecision::exp(Big(v));
  return static_cast<double>(
      Big(weight) * -boost::multiprecision::log(
                        boost::multiprecision::exp(Big(z[target])) / sum));
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng,
                            double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (auto& v : t.data()) v = n(rng);
  return t;
}

/// Random parameters with every field (biases, layer weights) non-trivial.
inline HeadParams random_params(std::size_t L, std::size_t D, std::size_t C,
                                std::mt19937_64& rng, double scale = 0.5) {
  HeadParams p = make_params(L, D, C);
  std::normal_distribution<double> n(0.0, scale);
  p.for_each([&](std::string_view, Tensor& t) {
    for (auto& v : t.data()) v = n(rng);
  });
  return p;
}

/// Textbook AdamW on one scalar: the decay term uses the pre-step value and
/// is added to the Adam step.
struct AdamScalar {
  double m = 0.0, v = 0.0;
  int t = 0;
  double step(double p, double g, double lr, double b1, double b2, double eps,
              double decay) {
    ++t;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double b1t = 1.0, b2t = 1.0;
    for (int i = 0; i < t; ++i) {
      b1t *= b1;
      b2t *= b2;
    }
    const double m_hat = m / (1 - b1t);
    const double v_hat = v / (1 - b2t);
    return p - lr * decay * p - lr * m_hat / (std::sqrt(v_hat) + eps);
  }
};

/// Brute-force multi-label tally: returns {tp, fp, fn, tn} per column.
inline std::vector<std::array<std::size_t, 4>> tally(
    const std::vector<std::vector<int>>& preds,
    const std::vector<std::vector<int>>& targets) {
  std::vector<std::array<std::size_t, 4>> out(preds.empty() ? 0 : preds[0].size());
  for (std::size_t n = 0; n < preds.size(); ++n) {
    for (std::size_t c = 0; c < out.size(); ++c) {
      if (preds[n][c] == 1 && targets[n][c] == 1) out[c][0]++;
      else if (preds[n][c] == 1 && targets[n][c] == 0) out[c][1]++;
      else if (preds[n][c] == 0 && targets[n][c] == 1) out[c][2]++;
      else out[c][3]++;
    }
  }
  return out;
}

}  // namespace dysflux::oracle
