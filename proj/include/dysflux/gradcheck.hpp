// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dysflux/losses.hpp"
#include "dysflux/numeric.hpp"

namespace dysflux {

struct GradientCase {
  std::uint64_t seed = 0;
  std::size_t layers = 0, frames = 0, width = 0, classes = 0;
  GradientCheck check;
};

struct GradientSuite {
  std::vector<GradientCase> cases;
  double worst = 0.0;
  bool passed(double tolerance) const { return worst < tolerance; }
};

struct GradientSuiteOptions {
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> frames{1, 3, 7};
  std::vector<std::size_t> classes{6, 7};
  std::size_t layers = 12;
  std::size_t width = 16;
  double eps = 1e-5;
  LossConfig loss;
};

/// For each seed draws random hidden states, parameters, labels and an
/// auxiliary target, then checks the analytic gradient of the full
/// head + main loss + auxiliary loss + weighted combination w.r.t. every
/// parameter against central differences. Frame and class counts cycle
/// through the option lists so every combination is covered.
GradientSuite run_gradient_suite(const GradientSuiteOptions& options);

}  // namespace dysflux
