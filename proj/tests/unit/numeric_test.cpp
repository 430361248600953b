// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "dysflux/error.hpp"
#include "dysflux/numeric.hpp"
#include "oracles.hpp"

namespace dysflux {
namespace {

TEST(Sigmoid, ZeroIsOneHalf) { EXPECT_EQ(sigmoid(0.0), 0.5); }

TEST(Sigmoid, SaturatesWithoutUnderflowInLogSpace) {
  const double s = sigmoid(-40.0);
  EXPECT_LT(s, 1e-17);
  EXPECT_GT(s, 0.0);
  EXPECT_TRUE(std::isfinite(log_sigmoid(-40.0)));
  for (double x = -500.0; x <= 500.0; x += 0.5) {
    ASSERT_TRUE(std::isfinite(log_sigmoid(x))) << x;
    ASSERT_TRUE(std::isfinite(log_sigmoid(-x))) << x;
  }
  EXPECT_NEAR(log_sigmoid(-500.0), -500.0, 1e-12);
}

TEST(Sigmoid, ValueAndGradientAgainstFiniteDifferences) {
  // sigma(1.7) and its derivative from a 40-digit evaluation.
  EXPECT_NEAR(sigmoid(1.7), 0.8455347349164652957, 1e-15);
  EXPECT_NEAR(sigmoid_grad(1.7), 0.1306057469662080588, 1e-15);
  const double eps = 1e-5;
  const double fd = (sigmoid(1.7 + eps) - sigmoid(1.7 - eps)) / (2 * eps);
  EXPECT_LT(std::abs(sigmoid_grad(1.7) - fd) / std::abs(fd), 1e-6);
}

TEST(Sigmoid, MatchesOracleOnGrid) {
  for (double x = -30.0; x <= 30.0; x += 0.37) {
    EXPECT_NEAR(sigmoid(x), oracle::sigmoid(x), 1e-15)
        << x;
  }
}

TEST(Softmax, SymmetricInputsAreUniform) {
  const std::vector<double> two{0.0, 0.0};
  EXPECT_EQ(softmax(two), (std::vector<double>{0.5, 0.5}));
  const std::vector<double> four(4, 3.25);
  for (double p : softmax(four)) EXPECT_EQ(p, 0.25);
}

TEST(Softmax, MatchesExtendedPrecisionOracle) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(5);
    for (auto& x : v) x = n(rng);
    const auto p = softmax(v);
    const auto ref = oracle::softmax(v);
    for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(p[i], ref[i], 1e-12);
  }
}

TEST(Softmax, LargeMagnitudesStayNormalized) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(7);
    for (auto& x : v) x = u(rng);
    const auto p = softmax(v);
    const double sum = std::accumulate(p.begin(), p.end(), 0.0);
    ASSERT_NEAR(sum, 1.0, 1e-12);
    for (double x : p) ASSERT_TRUE(std::isfinite(x) && x >= 0.0);
  }
}

TEST(Softmax, ShiftInvariant) {
  const std::vector<double> v{0.3, -1.2, 2.5, 0.0};
  auto shifted = v;
  for (auto& x : shifted) x += 123.0;
  const auto a = softmax(v);
  const auto b = softmax(shifted);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
}

TEST(Softmax, TensorLastAxis) {
  const Tensor t = Tensor::matrix(2, 2, {0.0, 0.0, 1.0, 1.0});
  const Tensor p = softmax(t);
  for (double v : p.values()) EXPECT_EQ(v, 0.5);
}

TEST(Attention, SingleKeyReturnsValue) {
  const Tensor q = Tensor::matrix(1, 3, {0.4, -2.0, 1.0});
  const Tensor k = Tensor::matrix(1, 3, {9.0, 1.0, -3.0});
  const Tensor v = Tensor::matrix(1, 3, {1.5, 2.5, -0.5});
  const auto r = scaled_dot_attention(q, k, v);
  EXPECT_EQ(r.output, v);
  EXPECT_EQ(r.weights[0], 1.0);
}

TEST(Attention, IdenticalKeysAverageValues) {
  const Tensor q = Tensor::matrix(1, 2, {0.7, -0.3});
  const Tensor k = Tensor::matrix(3, 2, {1, 2, 1, 2, 1, 2});
  const Tensor v = Tensor::matrix(3, 2, {1, 10, 2, 20, 6, 60});
  const auto r = scaled_dot_attention(q, k, v);
  EXPECT_NEAR(r.output[0], 3.0, 1e-12);
  EXPECT_NEAR(r.output[1], 30.0, 1e-12);
}

TEST(Attention, DimensionMismatchIsShapeError) {
  const Tensor q({1, 3});
  const Tensor k({2, 4});
  const Tensor v({2, 4});
  EXPECT_THROW(scaled_dot_attention(q, k, v), ShapeError);
  EXPECT_THROW(scaled_dot_attention(Tensor({1, 4}), k, Tensor({3, 4})),
               ShapeError);
}

TEST(Attention, MatchesOracleAndWeightsAreConvex) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const Tensor q = oracle::random_tensor({1, 8}, rng);
    const Tensor k = oracle::random_tensor({5, 8}, rng);
    const Tensor v = oracle::random_tensor({5, 8}, rng);
    const auto r = scaled_dot_attention(q, k, v);
    const auto ref = oracle::attention(oracle::rows(q), oracle::rows(k),
                                       oracle::rows(v));
    for (std::size_t c = 0; c < 8; ++c) EXPECT_NEAR(r.output[c], ref[0][c], 1e-12);
    double sum = 0.0;
    for (double w : r.weights.values()) {
      EXPECT_GE(w, 0.0);
      EXPECT_LE(w, 1.0);
      sum += w;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

// Gradient of <R, attention(Q, K, V)> w.r.t. one of Q, K, V.
double attention_probe(const Tensor& q, const Tensor& k, const Tensor& v,
                       const Tensor& r, int which, const Tensor& x,
                       Tensor* grad) {
  const Tensor& qq = which == 0 ? x : q;
  const Tensor& kk = which == 1 ? x : k;
  const Tensor& vv = which == 2 ? x : v;
  const auto out = scaled_dot_attention(qq, kk, vv);
  double f = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) f += r[i] * out.output[i];
  if (grad) {
    auto g = scaled_dot_attention_backward(qq, kk, vv, out.weights, r);
    *grad = which == 0 ? g.d_query : which == 1 ? g.d_key : g.d_value;
  }
  return f;
}

TEST(Attention, GradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor q = oracle::random_tensor({1, 8}, rng);
    const Tensor k = oracle::random_tensor({5, 8}, rng);
    const Tensor v = oracle::random_tensor({5, 8}, rng);
    const Tensor r = oracle::random_tensor({1, 8}, rng);
    for (int which = 0; which < 3; ++which) {
      const Tensor& x = which == 0 ? q : which == 1 ? k : v;
      const auto check = finite_difference_check(
          [&](const Tensor& xx, Tensor* g) {
            return attention_probe(q, k, v, r, which, xx, g);
          },
          x, 1e-5);
      ASSERT_LT(check.max_rel_error, 1e-4)
          << "trial " << trial << " input " << which;
    }
  }
}

TEST(Attention, MultiQueryGradients) {
  std::mt19937_64 rng(6);
  const Tensor q = oracle::random_tensor({3, 4}, rng);
  const Tensor k = oracle::random_tensor({6, 4}, rng);
  const Tensor v = oracle::random_tensor({6, 2}, rng);
  const Tensor r = oracle::random_tensor({3, 2}, rng);
  for (int which = 0; which < 3; ++which) {
    const Tensor& x = which == 0 ? q : which == 1 ? k : v;
    const auto check = finite_difference_check(
        [&](const Tensor& xx, Tensor* g) {
          return attention_probe(q, k, v, r, which, xx, g);
        },
        x);
    EXPECT_LT(check.max_rel_error, 1e-4) << which;
  }
}

TEST(SoftmaxVjp, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const Tensor x = oracle::random_tensor({6}, rng);
    const Tensor r = oracle::random_tensor({6}, rng);
    const auto check = finite_difference_check(
        [&](const Tensor& xx, Tensor* g) {
          const auto p = softmax(xx.data());
          double f = 0.0;
          for (std::size_t i = 0; i < p.size(); ++i) f += r[i] * p[i];
          if (g) *g = Tensor::from_vector(softmax_vjp(p, r.data()));
          return f;
        },
        x);
    ASSERT_LT(check.max_rel_error, 1e-4);
  }
}

TEST(FiniteDifferenceCheck, ConstantFunctionHasZeroError) {
  const Tensor x = Tensor::from_vector({1.0, -2.0, 0.5});
  const auto check = finite_difference_check(
      [](const Tensor& xx, Tensor* g) {
        if (g) *g = Tensor(xx.shape());
        return 4.2;
      },
      x);
  EXPECT_EQ(check.max_rel_error, 0.0);
}

TEST(FiniteDifferenceCheck, SumOfSquares) {
  const Tensor x = Tensor::from_vector({1.0, 2.0, 3.0});
  Tensor grad;
  const auto check = finite_difference_check(
      [&](const Tensor& xx, Tensor* g) {
        double f = 0.0;
        for (double v : xx.values()) f += v * v;
        if (g) {
          *g = xx;
          for (auto& v : g->data()) v *= 2.0;
          grad = *g;
        }
        return f;
      },
      x, 1e-5);
  EXPECT_EQ(grad, Tensor::from_vector({2.0, 4.0, 6.0}));
  EXPECT_LT(check.max_rel_error, 1e-9);
}

TEST(FiniteDifferenceCheck, DetectsWrongGradient) {
  const Tensor x = Tensor::from_vector({1.0, 2.0});
  const auto check = finite_difference_check(
      [](const Tensor& xx, Tensor* g) {
        if (g) *g = Tensor::from_vector({1.0, 1.0});
        return xx[0] * xx[0] + xx[1];
      },
      x);
  EXPECT_GT(check.max_rel_error, 0.4);
  EXPECT_EQ(check.worst_index, 0u);
}

TEST(FiniteDifferenceCheck, NonFiniteValueIsOracleError) {
  const Tensor x = Tensor::from_vector({0.0});
  EXPECT_THROW(finite_difference_check(
                   [](const Tensor& xx, Tensor* g) {
                     if (g) *g = Tensor(xx.shape());
                     return xx[0] > 0 ? std::nan("") : 0.0;
                   },
                   x),
               OracleError);
}

TEST(Tensor, ShapeMustMatchData) {
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  EXPECT_THROW(Tensor({0, 3}), ShapeError);
  const Tensor t({2, 3, 4});
  EXPECT_EQ(t.size(), 24u);
  EXPECT_EQ(t.slice(1).size(), 12u);
}

}  // namespace
}  // namespace dysflux
