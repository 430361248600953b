// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/objective.hpp"

#include "dysflux/error.hpp"

namespace dysflux {

void axpy(HeadParams& dst, const HeadParams& src, double scale) {
  std::vector<const Tensor*> from;
  src.for_each([&](std::string_view, const Tensor& t) { from.push_back(&t); });
  std::size_t i = 0;
  dst.for_each([&](std::string_view name, Tensor& t) {
    const Tensor& s = *from[i++];
    if (s.shape() != t.shape()) {
      throw ShapeError("axpy: field " + std::string(name) + " shape mismatch");
    }
    auto d = t.data();
    const auto v = s.data();
    for (std::size_t k = 0; k < d.size(); ++k) d[k] += scale * v[k];
  });
}

ClipLoss clip_objective(const Tensor& hidden, const HeadParams& params,
                        const ClipTargets& targets, const LossConfig& loss,
                        HeadGrads* grads, double main_scale, double aux_scale) {
  if (targets.labels.size() != params.num_classes()) {
    throw ShapeError("clip has " + std::to_string(targets.labels.size()) +
                     " labels, head predicts " +
                     std::to_string(params.num_classes()) + " classes");
  }
  ForwardTrace trace;
  ClipLoss out;
  out.output = head_forward(hidden, params, grads ? &trace : nullptr);

  const auto main = main_loss_logits(loss, out.output.main_logits,
                                     targets.labels, targets.mask);
  out.main = main.value;

  std::vector<double> d_aux(2, 0.0);
  if (targets.aux) {
    std::span<const double> aux_w;
    if (loss.aux_class_weights) aux_w = *loss.aux_class_weights;
    const auto aux =
        aux_cross_entropy_logits(out.output.aux_logits, *targets.aux, aux_w);
    out.aux = aux.value;
    out.has_aux = true;
    for (std::size_t k = 0; k < 2; ++k) d_aux[k] = aux_scale * aux.d_logits[k];
  }

  if (grads) {
    std::vector<double> d_main(main.d_logits.size());
    for (std::size_t c = 0; c < d_main.size(); ++c) {
      d_main[c] = main_scale * main.d_logits[c];
    }
    const auto g = head_backward(hidden, params, trace, d_main, d_aux);
    axpy(*grads, g, 1.0);
  }
  return out;
}

}  // namespace dysflux
