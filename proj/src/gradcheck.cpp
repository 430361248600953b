// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/gradcheck.hpp"

#include <algorithm>

#include "dysflux/error.hpp"
#include "dysflux/head.hpp"
#include "dysflux/objective.hpp"
#include "dysflux/random.hpp"

namespace dysflux {

GradientSuite run_gradient_suite(const GradientSuiteOptions& options) {
  if (options.frames.empty() || options.classes.empty()) {
    throw ConfigError("gradient suite needs at least one frame and class count");
  }
  options.loss.validate();
  GradientSuite suite;
  std::size_t index = 0;
  for (const auto seed : options.seeds) {
    const std::size_t T = options.frames[index % options.frames.size()];
    const std::size_t C =
        options.classes[(index / options.frames.size()) % options.classes.size()];
    ++index;
    const std::size_t L = options.layers;
    const std::size_t D = options.width;

    Rng rng(seed);
    Tensor hidden({L, T, D});
    for (auto& v : hidden.data()) v = rng.normal();
    HeadParams params = make_params(L, D, C);
    params.for_each([&](std::string_view name, Tensor& t) {
      if (name == "layer_weights") {
        for (auto& v : t.data()) {
          v = 1.0 / static_cast<double>(L) + 0.1 * rng.normal();
        }
      } else {
        for (auto& v : t.data()) v = 0.3 * rng.normal();
      }
    });
    ClipTargets targets;
    for (std::size_t c = 0; c < C; ++c) {
      targets.labels.push_back(static_cast<int>(rng.below(2)));
    }
    targets.aux = static_cast<int>(rng.below(2));

    const LossConfig& loss = options.loss;
    auto f = [&](const Tensor& theta, Tensor* grad) {
      HeadParams p = params;
      p.unflatten(theta.data());
      if (!grad) {
        const auto l = clip_objective(hidden, p, targets, loss);
        return mtl_loss(l.main, l.aux, loss.w_main);
      }
      HeadGrads g = p.zeros_like();
      const auto l = clip_objective(hidden, p, targets, loss, &g, loss.w_main,
                                    1.0 - loss.w_main);
      *grad = Tensor::from_vector(g.flatten());
      return mtl_loss(l.main, l.aux, loss.w_main);
    };
    GradientCase c{seed, L, T, D, C,
                   finite_difference_check(
                       f, Tensor::from_vector(params.flatten()), options.eps)};
    suite.worst = std::max(suite.worst, c.check.max_rel_error);
    suite.cases.push_back(c);
  }
  return suite;
}

}  // namespace dysflux
