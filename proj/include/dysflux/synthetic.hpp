// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#pragma once

#include <cstdint>
#include <filesystem>

#include "dysflux/datasets.hpp"
#include "dysflux/training.hpp"

namespace dysflux {

/// A small, linearly separable multi-label corpus for sanity checks.
///
/// Every clip belongs to one of `speakers` speakers with `clips_per_speaker`
/// clips each. Each dysfluency class (Mod..Wd) is positive independently
/// with probability `positive_rate`; No-Df is positive iff none is. Hidden
/// states are N(0, 1) per (layer, frame, dim) plus `separation` on dim c
/// for every positive class c. The first `train_speakers` speakers form the
/// train split, the next `dev_speakers` the dev split, the rest test.
struct SyntheticSpec {
  std::size_t speakers = 8;
  std::size_t clips_per_speaker = 8;
  std::size_t train_speakers = 6;
  std::size_t dev_speakers = 1;
  std::size_t layers = 12;
  std::size_t frames = 10;
  std::size_t width = 16;
  double positive_rate = 1.0 / 3.0;
  double separation = 1.0;
  std::string dataset_id = "SYNTH";
};

struct SyntheticCorpus {
  Manifest manifest;
  MemoryFeatures features;
};

/// Deterministic in (spec, seed). Throws ConfigError if width < 7 or the
/// speaker split does not leave at least one test speaker.
SyntheticCorpus make_synthetic_corpus(const SyntheticSpec& spec,
                                      std::uint64_t seed);

/// Writes manifest.jsonl and one .dyfh per clip under `dir`.
void write_synthetic_corpus(const SyntheticSpec& spec, std::uint64_t seed,
                            const std::filesystem::path& dir);

}  // namespace dysflux
