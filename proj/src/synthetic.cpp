// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include "dysflux/synthetic.hpp"

#include <cstdio>

#include "dysflux/error.hpp"
#include "dysflux/features_io.hpp"
#include "dysflux/random.hpp"

namespace dysflux {

SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec,
                                      std::uint64_t seed) {
  if (spec.width < kNumLabels) {
    throw ConfigError("synthetic corpus needs width >= " + std::to_string(kNumLabels));
  }
  if (spec.train_speakers == 0 || spec.dev_speakers == 0 ||
      spec.train_speakers + spec.dev_speakers >= spec.speakers) {
    throw ConfigError("synthetic corpus needs train, dev and test speakers");
  }
  if (spec.layers == 0 || spec.frames == 0 || spec.clips_per_speaker == 0) {
    throw ConfigError("synthetic corpus dimensions must be positive");
  }
  SyntheticCorpus out;
  Manifest& m = out.manifest;
  m.name = "synthetic-" + std::to_string(seed);
  m.dataset_id = spec.dataset_id;
  m.class_set = ClassSet::seven;

  Rng rng(seed);
  for (std::size_t s = 0; s < spec.speakers; ++s) {
    const Split split = s < spec.train_speakers ? Split::train
                        : s < spec.train_speakers + spec.dev_speakers ? Split::dev
                                                                      : Split::test;
    for (std::size_t k = 0; k < spec.clips_per_speaker; ++k) {
      ClipRecord r;
      char id[32];
      std::snprintf(id, sizeof id, "syn%02zu_%03zu", s, k);
      r.clip_id = id;
      r.dataset_id = spec.dataset_id;
      r.speaker_id = "spk" + std::to_string(s);
      r.gender = s % 2 ? Gender::male : Gender::female;
      r.split = split;
      for (std::size_t c = 0; c < kNoDfIndex; ++c) {
        r.labels[c] = rng.uniform() < spec.positive_rate ? 1 : 0;
      }
      r.labels[kNoDfIndex] = r.any_label() ? 0 : 1;

      Tensor hidden({spec.layers, spec.frames, spec.width});
      for (std::size_t l = 0; l < spec.layers; ++l) {
        for (std::size_t t = 0; t < spec.frames; ++t) {
          for (std::size_t d = 0; d < spec.width; ++d) {
            const double shift = d < kNumLabels && r.labels[d] ? spec.separation : 0.0;
            hidden.at(l, t, d) = rng.normal() + shift;
          }
        }
      }
      out.features.add(r.clip_id, std::move(hidden));
      m.records.push_back(std::move(r));
    }
  }
  validate_manifest(m);
  return out;
}

void write_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed,
                            const std::filesystem::path& dir) {
  const auto corpus = make_synthetic_corpus(spec, seed);
  save_manifest(corpus.manifest, dir / "manifest.jsonl");
  for (const auto& r : corpus.manifest.records) {
    write_features(dir / "features", r.clip_id, corpus.features.load(r.clip_id));
  }
}

}  // namespace dysflux
