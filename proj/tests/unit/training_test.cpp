// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The dysflux Authors

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "dysflux/error.hpp"
#include "dysflux/features_io.hpp"
#include "dysflux/files.hpp"
#include "dysflux/synthetic.hpp"
#include "dysflux/training.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

namespace dysflux {
namespace {

using testing::TempDir;

TrainConfig small_config(std::uint64_t seed = 0) {
  TrainConfig c;
  c.learning_rate = 3e-4;
  c.batch_size = 16;
  c.max_epochs = 8;
  c.patience = 5;
  c.seed = seed;
  return c;
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.layers = 3;
  s.frames = 4;
  s.width = 8;
  return s;
}

TEST(TrainConfig, DefaultsAndValidation) {
  TrainConfig c;
  EXPECT_EQ(c.learning_rate, 3e-5);
  EXPECT_EQ(c.batch_size, 256u);
  EXPECT_EQ(c.max_epochs, 20u);
  EXPECT_EQ(c.patience, 5u);
  EXPECT_EQ(c.weight_decay, 0.01);
  EXPECT_EQ(c.loss.w_main, 0.9);
  EXPECT_EQ(c.loss.alpha, 0.7);
  EXPECT_EQ(c.loss.gamma, 3.0);
  EXPECT_EQ(c.monitor, Monitor::total);
  EXPECT_NO_THROW(c.validate());
  auto bad = c;
  bad.patience = 21;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.learning_rate = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.weight_decay = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.adam_beta2 = 1.0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = c;
  bad.loss.class_weights = std::vector<double>(6, 1.0);
  EXPECT_THROW(bad.validate(), ConfigError);
  bad.class_set = ClassSet::six;
  EXPECT_NO_THROW(bad.validate());
}

TEST(TrainConfig, JsonRoundTrip) {
  TrainConfig c = small_config(12345678901234ull);
  c.loss.class_weights = std::vector<double>{1, 2, 3, 4, 5, 6, 0.1};
  c.aux_task = AuxTask::gender;
  c.monitor = Monitor::main;
  c.mask_mod_for_english = true;
  const auto back = TrainConfig::from_json(Json::parse(c.to_json().dump()));
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.seed, 12345678901234ull);
  EXPECT_THROW(TrainConfig::from_json(Json::object()), FormatError);
}

TEST(AdamW, ZeroGradsNoDecayIsIdentity) {
  std::mt19937_64 rng(1);
  const HeadParams p0 = oracle::random_params(3, 4, 7, rng, 0.5);
  HeadParams p = p0;
  AdamState state = AdamState::zeros_like(p);
  TrainConfig c;
  c.weight_decay = 0.0;
  for (int i = 0; i < 3; ++i) optimizer_step(p, p.zeros_like(), state, c);
  EXPECT_EQ(p, p0);
  EXPECT_EQ(state.step, 3u);
}

TEST(AdamW, ZeroGradsScaleByDecayExactly) {
  std::mt19937_64 rng(2);
  const HeadParams p0 = oracle::random_params(3, 4, 6, rng, 0.5);
  HeadParams p = p0;
  AdamState state = AdamState::zeros_like(p);
  TrainConfig c;
  c.learning_rate = 1e-2;
  c.weight_decay = 0.3;
  optimizer_step(p, p.zeros_like(), state, c);
  const double keep = 1.0 - c.learning_rate * c.weight_decay;
  const auto a = p.flatten();
  const auto b = p0.flatten();
  const std::size_t L = p0.num_layers();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i < L) {
      EXPECT_EQ(a[i], b[i]) << "layer weight " << i << " must not decay";
    } else {
      EXPECT_EQ(a[i], b[i] * keep) << i;
    }
  }
}

TEST(AdamW, MatchesScalarOracleOverSeveralSteps) {
  std::mt19937_64 rng(3);
  HeadParams p = oracle::random_params(4, 5, 7, rng, 1.0);
  TrainConfig c;
  c.learning_rate = 3e-3;
  c.weight_decay = 0.05;
  AdamState state = AdamState::zeros_like(p);
  auto ref = p.flatten();
  std::vector<oracle::AdamScalar> scalars(ref.size());
  const std::size_t L = p.num_layers();
  for (int step = 0; step < 5; ++step) {
    const HeadParams g = oracle::random_params(4, 5, 7, rng, 1.0);
    const auto gf = g.flatten();
    optimizer_step(p, g, state, c);
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ref[i] = scalars[i].step(ref[i], gf[i], c.learning_rate, c.adam_beta1,
                               c.adam_beta2, c.adam_eps, i < L ? 0.0 : c.weight_decay);
    }
    const auto got = p.flatten();
    for (std::size_t i = 0; i < ref.size(); ++i) {
      ASSERT_NEAR(got[i], ref[i], 1e-12 * std::max(1.0, std::fabs(ref[i])))
          << "step " << step << " index " << i;
    }
  }
}

TEST(AdamW, NoDecayCoincidesWithAdam) {
  std::mt19937_64 rng(4);
  HeadParams p = oracle::random_params(2, 3, 6, rng, 1.0);
  const HeadParams g = oracle::random_params(2, 3, 6, rng, 1.0);
  TrainConfig c;
  c.weight_decay = 0.0;
  c.learning_rate = 0.1;
  AdamState state = AdamState::zeros_like(p);
  const auto before = p.flatten();
  optimizer_step(p, g, state, c);
  // First Adam step moves every coordinate by lr · g/(|g| + ε/…) ≈ lr·sign(g).
  const auto after = p.flatten();
  const auto gf = g.flatten();
  for (std::size_t i = 0; i < gf.size(); ++i) {
    const double expected = before[i] - c.learning_rate * gf[i] / (std::fabs(gf[i]) + c.adam_eps);
    EXPECT_NEAR(after[i], expected, 1e-15);
  }
}

TEST(AdamW, ShapeMismatch) {
  HeadParams p = make_params(2, 3, 6);
  AdamState state = AdamState::zeros_like(p);
  EXPECT_THROW(optimizer_step(p, make_params(2, 3, 7), state, TrainConfig{}), ShapeError);
  EXPECT_THROW(optimizer_step(p, make_params(3, 3, 6), state, TrainConfig{}), ShapeError);
}

TEST(EarlyStopping, DefinitionExample) {
  EarlyStopper s(5);
  const std::vector<double> losses{3, 2, 2.1, 2.2, 2.3, 2.4, 2.5, 1.0};
  std::size_t stopped_at = 0;
  for (std::size_t e = 0; e < losses.size(); ++e) {
    if (s.update(e + 1, losses[e])) {
      stopped_at = e + 1;
      break;
    }
  }
  EXPECT_EQ(stopped_at, 7u);
  EXPECT_EQ(s.best_epoch(), 2u);
  EXPECT_EQ(s.best_loss(), 2.0);
}

TEST(EarlyStopping, ImprovementIsStrict) {
  EarlyStopper s(2);
  EXPECT_FALSE(s.update(1, 1.0));
  EXPECT_FALSE(s.update(2, 1.0));
  EXPECT_FALSE(s.improved());
  EXPECT_TRUE(s.update(3, 1.0));
  EXPECT_EQ(s.best_epoch(), 1u);
  EarlyStopper t(2);
  t.update(1, 1.0);
  t.update(2, 1.0);
  EXPECT_FALSE(t.update(3, std::nextafter(1.0, 0.0)));
  EXPECT_EQ(t.best_epoch(), 3u);
}

TEST(Targets, AuxAndMasking) {
  ClipRecord r = testing::make_record("a", "SEP28K-E", "s", Split::train, {2});
  r.gender = Gender::unknown;
  TrainConfig c;
  auto t = make_targets(r, c);
  EXPECT_EQ(t.labels, (std::vector<int>{0, 0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(t.aux, 1);
  EXPECT_TRUE(t.mask.empty());
  c.aux_task = AuxTask::gender;
  EXPECT_FALSE(make_targets(r, c).aux.has_value());
  r.gender = Gender::male;
  EXPECT_EQ(make_targets(r, c).aux, 1);
  r.gender = Gender::female;
  EXPECT_EQ(make_targets(r, c).aux, 0);
  c.mask_mod_for_english = true;
  EXPECT_EQ(make_targets(r, c).mask, (std::vector<int>{0, 1, 1, 1, 1, 1, 1}));
  r.dataset_id = "KSOF";
  EXPECT_TRUE(make_targets(r, c).mask.empty());
  c.class_set = ClassSet::six;
  r.dataset_id = "FBANK";
  EXPECT_TRUE(make_targets(r, c).mask.empty());
  EXPECT_EQ(make_targets(r, c).labels.size(), 6u);
}

TEST(Train, DeterministicAndBestEpochIsMinimum) {
  const auto corpus = make_synthetic_corpus(small_spec(), 5);
  const auto cfg = small_config(5);
  const auto a = train(cfg, corpus.manifest, corpus.features);
  const auto b = train(cfg, corpus.manifest, corpus.features);
  ASSERT_EQ(a.history.size(), b.history.size());
  for (std::size_t i = 0; i < a.history.size(); ++i) {
    EXPECT_EQ(a.history[i].train.total, b.history[i].train.total);
    EXPECT_EQ(a.history[i].dev.total, b.history[i].dev.total);
  }
  EXPECT_EQ(a.params, b.params);
  double lowest = INFINITY;
  for (const auto& e : a.history) lowest = std::min(lowest, e.monitored);
  EXPECT_EQ(a.best().monitored, lowest);
  for (const auto& e : a.history) EXPECT_LE(a.best().monitored, e.monitored);
  // The returned parameters reproduce the best epoch's dev loss.
  const auto dev = evaluate_loss(a.params, corpus.manifest, Split::dev,
                                 corpus.features, cfg);
  EXPECT_EQ(dev.total, a.best().dev.total);
  EXPECT_LT(a.history.back().train.total, a.initial_train.total);
}

TEST(Train, SingleTaskIgnoresAux) {
  const auto corpus = make_synthetic_corpus(small_spec(), 6);
  auto cfg = small_config(6);
  cfg.loss.w_main = 1.0;
  cfg.weight_decay = 0.0;  // decay alone would move the aux branch
  cfg.max_epochs = 3;
  cfg.patience = 3;
  const auto ck = train(cfg, corpus.manifest, corpus.features);
  for (const auto& e : ck.history) {
    EXPECT_EQ(e.train.total, e.train.main);
    EXPECT_EQ(e.dev.total, e.dev.main);
  }
  // The aux branch receives no gradient, so it keeps its initial values.
  const auto init = init_params(cfg.seed, 3, 8, 7);
  EXPECT_EQ(ck.params.aux_weight, init.aux_weight);
  EXPECT_EQ(ck.params.aux_bias, init.aux_bias);
}

TEST(Train, GenderAuxUsesMaskedMean) {
  auto corpus = make_synthetic_corpus(small_spec(), 7);
  for (std::size_t i = 0; i < corpus.manifest.records.size(); i += 3) {
    corpus.manifest.records[i].gender = Gender::unknown;
  }
  auto cfg = small_config(7);
  cfg.aux_task = AuxTask::gender;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto ck = train(cfg, corpus.manifest, corpus.features);
  std::size_t known_dev = 0;
  for (const auto* r : corpus.manifest.select(Split::dev)) {
    known_dev += r->gender != Gender::unknown;
  }
  EXPECT_EQ(ck.history[0].dev.aux_clips, known_dev);
  EXPECT_LT(ck.history[0].dev.aux_clips, ck.history[0].dev.clips);
  EXPECT_LT(ck.history[0].train.aux_clips, ck.history[0].train.clips);
}

TEST(Train, EarlyStopsAndKeepsBest) {
  const auto corpus = make_synthetic_corpus(small_spec(), 8);
  auto cfg = small_config(8);
  cfg.learning_rate = 0.05;  // large steps make the dev loss bounce
  cfg.max_epochs = 60;
  cfg.patience = 2;
  std::size_t callbacks = 0;
  const auto ck = train(cfg, corpus.manifest, corpus.features, std::nullopt,
                        [&](const EpochRecord&) { ++callbacks; });
  EXPECT_EQ(callbacks, ck.history.size());
  if (ck.history.size() < cfg.max_epochs) {
    EXPECT_EQ(ck.history.size(), ck.best_epoch + cfg.patience);
  }
  for (const auto& e : ck.history) EXPECT_LE(ck.best().monitored, e.monitored);
}

TEST(Train, Errors) {
  auto corpus = make_synthetic_corpus(small_spec(), 9);
  const auto cfg = small_config();
  MemoryFeatures partial;
  for (const auto& r : corpus.manifest.records) {
    if (r.clip_id != "syn03_002") partial.add(r.clip_id, corpus.features.load(r.clip_id));
  }
  try {
    train(cfg, corpus.manifest, partial);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("syn03_002"), std::string::npos);
  }
  Manifest no_dev = corpus.manifest;
  std::erase_if(no_dev.records, [](const ClipRecord& r) { return r.split == Split::dev; });
  EXPECT_THROW(train(cfg, no_dev, corpus.features), DataError);
  TrainInit init{make_params(4, 8, 7), {}};
  EXPECT_THROW(train(cfg, corpus.manifest, corpus.features, init), IncompatibleError);
}

TEST(Train, TrainLossDecreasesEarlyOnMostSeeds) {
  int monotone = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto corpus = make_synthetic_corpus({}, seed);
    auto cfg = small_config(seed);
    cfg.max_epochs = 5;
    const auto ck = train(cfg, corpus.manifest, corpus.features);
    bool ok = ck.history[0].train.total <= ck.initial_train.total + 1e-3;
    for (std::size_t e = 1; e < ck.history.size(); ++e) {
      ok = ok && ck.history[e].train.total <= ck.history[e - 1].train.total;
    }
    monotone += ok;
  }
  EXPECT_GE(monotone, 9);
}

TEST(Checkpoint, SaveLoadRoundTrip) {
  TempDir dir;
  const auto corpus = make_synthetic_corpus(small_spec(), 10);
  auto cfg = small_config(10);
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto ck = train(cfg, corpus.manifest, corpus.features);
  save_checkpoint(ck, dir / "ck");
  EXPECT_EQ(std::filesystem::file_size(dir / "ck" / "params.bin"),
            4 * ck.params.parameter_count());
  const auto back = load_checkpoint(dir / "ck");
  EXPECT_EQ(back.config.to_json(), ck.config.to_json());
  EXPECT_EQ(back.best_epoch, ck.best_epoch);
  ASSERT_EQ(back.history.size(), ck.history.size());
  EXPECT_EQ(back.history[1].dev.total, ck.history[1].dev.total);
  EXPECT_EQ(back.sources, ck.sources);
  const auto a = ck.params.flatten();
  const auto b = back.params.flatten();
  for (std::size_t i = 0; i < a.size(); ++i) {
    ASSERT_EQ(b[i], static_cast<double>(static_cast<float>(a[i])));
  }
  // Saving the loaded checkpoint reproduces the files byte for byte.
  save_checkpoint(back, dir / "again");
  EXPECT_EQ(read_file(dir / "ck" / "params.bin"), read_file(dir / "again" / "params.bin"));
  EXPECT_EQ(read_file(dir / "ck" / "params.json"), read_file(dir / "again" / "params.json"));

  std::filesystem::resize_file(dir / "again" / "params.bin", 8);
  EXPECT_THROW(load_checkpoint(dir / "again"), FormatError);
  write_file_atomic(dir / "again" / "params.json", "{");
  EXPECT_THROW(load_checkpoint(dir / "again"), FormatError);
  EXPECT_THROW(load_checkpoint(dir / "missing"), IoError);
}

Checkpoint fake_checkpoint(ClassSet set, std::uint64_t seed) {
  Checkpoint ck;
  ck.config.class_set = set;
  ck.config.seed = seed;
  std::mt19937_64 rng(seed);
  ck.params = oracle::random_params(3, 8, num_classes(set), rng, 1.0);
  ck.lineage = {"root"};
  return ck;
}

TEST(WarmStart, SameClassSetCopiesEverything) {
  const auto src = fake_checkpoint(ClassSet::six, 1);
  TrainConfig cfg;
  cfg.class_set = ClassSet::six;
  const auto init = warm_start(src, cfg, 3, 8);
  EXPECT_EQ(init.params, src.params);
  ASSERT_EQ(init.lineage.size(), 2u);
  EXPECT_EQ(init.lineage[0], "root");
  EXPECT_EQ(init.lineage[1], src.describe());
}

TEST(WarmStart, SixToSevenAddsFreshModRow) {
  const auto src = fake_checkpoint(ClassSet::six, 2);
  TrainConfig cfg;
  cfg.class_set = ClassSet::seven;
  cfg.seed = 99;
  const auto init = warm_start(src, cfg, 3, 8);
  ASSERT_EQ(init.params.num_classes(), 7u);
  const auto fresh = init_params(99, 3, 8, 7);
  for (std::size_t d = 0; d < 8; ++d) {
    EXPECT_EQ(init.params.main_weight.at(0, d), fresh.main_weight.at(0, d));
    for (std::size_t c = 1; c < 7; ++c) {
      EXPECT_EQ(init.params.main_weight.at(c, d), src.params.main_weight.at(c - 1, d));
    }
  }
  EXPECT_EQ(init.params.main_bias[0], 0.0);
  for (std::size_t c = 1; c < 7; ++c) {
    EXPECT_EQ(init.params.main_bias[c], src.params.main_bias[c - 1]);
  }
  EXPECT_EQ(init.params.q_weight, src.params.q_weight);
  EXPECT_EQ(init.params.aux_weight, src.params.aux_weight);
  EXPECT_EQ(init.params.layer_weights, src.params.layer_weights);
}

TEST(WarmStart, SevenToSixDropsMod) {
  const auto src = fake_checkpoint(ClassSet::seven, 3);
  TrainConfig cfg;
  cfg.class_set = ClassSet::six;
  const auto init = warm_start(src, cfg, 3, 8);
  ASSERT_EQ(init.params.num_classes(), 6u);
  for (std::size_t c = 0; c < 6; ++c) {
    for (std::size_t d = 0; d < 8; ++d) {
      EXPECT_EQ(init.params.main_weight.at(c, d), src.params.main_weight.at(c + 1, d));
    }
    EXPECT_EQ(init.params.main_bias[c], src.params.main_bias[c + 1]);
  }
}

TEST(WarmStart, Incompatible) {
  const auto src = fake_checkpoint(ClassSet::six, 4);
  TrainConfig cfg;
  EXPECT_THROW(warm_start(src, cfg, 4, 8), IncompatibleError);
  EXPECT_THROW(warm_start(src, cfg, 3, 16), IncompatibleError);
  cfg.project_qkv = false;
  EXPECT_THROW(warm_start(src, cfg, 3, 8), IncompatibleError);
}

TEST(WarmStart, TrainRecordsLineage) {
  const auto corpus = make_synthetic_corpus(small_spec(), 11);
  auto cfg = small_config(11);
  cfg.class_set = ClassSet::six;
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto first = train(cfg, corpus.manifest, corpus.features);
  auto cfg7 = cfg;
  cfg7.class_set = ClassSet::seven;
  const auto second = train(cfg7, corpus.manifest, corpus.features,
                            warm_start(first, cfg7, 3, 8));
  ASSERT_EQ(second.lineage.size(), 1u);
  EXPECT_EQ(second.lineage[0], first.describe());
  EXPECT_EQ(second.params.num_classes(), 7u);
}

TEST(Grid, StandardGridHas135Cells) {
  const auto g = Grid::standard();
  EXPECT_EQ(g.size(), 135u);
  EXPECT_EQ(g.w_main.size(), 5u);
  EXPECT_EQ(g.alpha.size(), 9u);
  EXPECT_EQ(g.gamma.size(), 3u);
}

TEST(Grid, Parse) {
  const auto g = Grid::parse("0.5, 0.9;0.7;1,2,3");
  EXPECT_EQ(g.w_main, (std::vector<double>{0.5, 0.9}));
  EXPECT_EQ(g.alpha, (std::vector<double>{0.7}));
  EXPECT_EQ(g.gamma, (std::vector<double>{1, 2, 3}));
  EXPECT_THROW(Grid::parse("0.5;0.7"), ConfigError);
  EXPECT_THROW(Grid::parse("0.5;x;1"), ConfigError);
  EXPECT_THROW(Grid::parse("0.5;;1"), ConfigError);
}

TEST(Grid, RankingTieBreakIsLexicographic) {
  std::vector<GridCell> cells{{0.9, 0.1, 1, 0.5, 1, 1},
                              {0.5, 0.7, 3, 0.5, 1, 1},
                              {0.5, 0.7, 2, 0.5, 1, 1},
                              {0.5, 0.2, 3, NAN, 1, 1},
                              {0.6, 0.9, 3, 0.4, 1, 1}};
  rank_cells(cells);
  EXPECT_EQ(cells[0].w_main, 0.6);
  EXPECT_EQ(cells[1].gamma, 2.0);
  EXPECT_EQ(cells[2].gamma, 3.0);
  EXPECT_EQ(cells[3].w_main, 0.9);
  EXPECT_TRUE(std::isnan(cells[4].monitored));
}

TEST(Grid, SingleCellEqualsTrainAndJobsDoNotMatter) {
  const auto corpus = make_synthetic_corpus(small_spec(), 12);
  auto cfg = small_config(12);
  cfg.max_epochs = 2;
  cfg.patience = 2;
  const auto one = grid_search(cfg, corpus.manifest, corpus.features,
                               Grid{{0.9}, {0.7}, {3}});
  const auto direct = train(cfg, corpus.manifest, corpus.features);
  EXPECT_EQ(one.best.params, direct.params);
  EXPECT_EQ(one.ranked[0].monitored, direct.best().monitored);

  const Grid g{{0.5, 0.9}, {0.3, 0.7}, {1, 3}};
  const auto serial = grid_search(cfg, corpus.manifest, corpus.features, g, 1);
  const auto parallel = grid_search(cfg, corpus.manifest, corpus.features, g, 4);
  ASSERT_EQ(serial.ranked.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(serial.ranked[i].monitored, parallel.ranked[i].monitored);
    EXPECT_EQ(serial.ranked[i].w_main, parallel.ranked[i].w_main);
    EXPECT_EQ(serial.ranked[i].alpha, parallel.ranked[i].alpha);
    EXPECT_EQ(serial.ranked[i].gamma, parallel.ranked[i].gamma);
  }
  EXPECT_EQ(serial.best.params, parallel.best.params);
  EXPECT_EQ(serial.best_config.loss.w_main, serial.ranked[0].w_main);
  for (std::size_t i = 1; i < 8; ++i) {
    EXPECT_LE(serial.ranked[i - 1].monitored, serial.ranked[i].monitored);
  }
}

TEST(Features, DirectorySourceCachesAndMatchesFiles) {
  TempDir dir;
  const auto corpus = make_synthetic_corpus(small_spec(), 13);
  for (const auto& r : corpus.manifest.records) {
    write_features(dir.path(), r.clip_id, corpus.features.load(r.clip_id));
  }
  DirectoryFeatures cached(dir.path());
  DirectoryFeatures uncached(dir.path(), 0);
  for (const auto& r : corpus.manifest.records) {
    ASSERT_TRUE(cached.contains(r.clip_id));
    const auto from_memory = corpus.features.load(r.clip_id);
    const auto a = cached.load(r.clip_id);
    EXPECT_EQ(cached.load(r.clip_id), a);
    EXPECT_EQ(uncached.load(r.clip_id), a);
    for (std::size_t i = 0; i < a.size(); ++i) {
      ASSERT_EQ(a[i], static_cast<double>(static_cast<float>(from_memory[i])));
    }
  }
  EXPECT_FALSE(cached.contains("nope"));
}

}  // namespace
}  // namespace dysflux
