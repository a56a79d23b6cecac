/**
 * Copyright 2026 The earcough Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "earcough/dsp.hpp"
#include "earcough/evalkit.hpp"
#include "earcough/nn.hpp"
#include "earcough/pipeline.hpp"
#include "earcough/random.hpp"
#include "earcough/train.hpp"
#include "label_oracle.hpp"
#include "test_util.hpp"

using namespace earcough;
using namespace earcough::pipeline;
using synth::AnnotatedSegment;
using synth::EventLabel;
using test::thrown_code;

namespace {

LabeledWindow fake_window(int user, WindowLabel label, float value = 0.0f) {
  LabeledWindow w;
  w.window = test::make_window(Eigen::VectorXf::Constant(8, value), Eigen::VectorXf::Constant(8, value), 16);
  w.user_id = user;
  w.label = label;
  return w;
}

// Separable toy problem for the reduced spec: subject windows are loud,
// everything else is quiet.
std::vector<LabeledWindow> toy_set(std::size_t n, std::uint64_t seed) {
  const nn::ModelSpec spec = nn::reduced_spec();
  Rng rng = make_rng(seed);
  std::normal_distribution<float> g(0.0f, 1.0f);
  std::vector<LabeledWindow> out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool subject = i % 3 == 0;
    const float amp = subject ? 2.0f : 0.25f;
    Eigen::VectorXf a(spec.input_length), b(spec.input_length);
    for (Eigen::Index t = 0; t < a.size(); ++t) {
      a(t) = amp * g(rng);
      b(t) = amp * g(rng);
    }
    LabeledWindow w;
    w.window = test::make_window(a, b, spec.sample_rate_hz);
    w.label = subject ? WindowLabel::subject_cough : (i % 3 == 1 ? WindowLabel::env_cough : WindowLabel::other);
    w.user_id = 1;
    out.push_back(std::move(w));
  }
  return out;
}

double accuracy(const nn::ModelSpec& spec, const nn::ModelParams<float>& params, const std::vector<LabeledWindow>& set) {
  const std::vector<float> p = evalkit::predict(spec, params, set);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < set.size(); ++i) {
    ok += ((p[i] >= 0.5f) == (set[i].label == WindowLabel::subject_cough)) ? 1 : 0;
  }
  return static_cast<double>(ok) / static_cast<double>(set.size());
}

// Small on-disk dataset: one 3 s recording per user with a subject cough
// at 0.2-0.6 s and an environmental cough at 1.6-2.1 s.
std::filesystem::path write_small_dataset(const test::TempDir& dir, int users) {
  synth::DatasetManifest m;
  m.seed = 1;
  for (int u = 1; u <= users; ++u) {
    const std::string stem = "u" + std::to_string(u);
    Eigen::VectorXf x = test::sine(3 * 8000, 8000, 300.0 + 10.0 * u, 0.1);
    dsp::save_recording(test::make_recording(x, x, 8000), dir / (stem + ".wav"), wav::SampleFormat::Pcm16);
    synth::write_annotations(dir / (stem + ".tsv"),
                             std::vector<AnnotatedSegment>{{0.2, 0.6, EventLabel::single_cough_sitting},
                                                           {1.6, 2.1, EventLabel::environmental_cough}});
    m.entries.push_back({stem + ".wav", stem + ".tsv", u, synth::Environment::quiet, synth::Posture::sitting});
  }
  synth::write_manifest(dir / "manifest.json", m);
  return dir / "manifest.json";
}

}  // namespace

TEST(LabelIntervalTest, DocumentedExamples) {
  const std::vector<AnnotatedSegment> a{{1.0, 1.4, EventLabel::single_cough_sitting}};
  EXPECT_EQ(label_interval(1.0, 1.5, a), WindowLabel::subject_cough);
  const std::vector<AnnotatedSegment> b{{1.45, 1.80, EventLabel::single_cough_sitting}};
  EXPECT_EQ(label_interval(1.0, 1.5, b), WindowLabel::other);
}

TEST(LabelIntervalTest, SubjectOutranksEnvironmental) {
  const std::vector<AnnotatedSegment> a{{0.0, 0.3, EventLabel::environmental_cough},
                                        {0.3, 0.45, EventLabel::continuous_cough_walking}};
  EXPECT_EQ(label_interval(0.0, 0.5, a), WindowLabel::subject_cough);
  const std::vector<AnnotatedSegment> b{{0.0, 0.3, EventLabel::environmental_cough},
                                        {0.3, 0.4, EventLabel::single_cough_sitting}};
  EXPECT_EQ(label_interval(0.0, 0.5, b), WindowLabel::env_cough);
  const std::vector<AnnotatedSegment> c{{0.0, 0.5, EventLabel::laughing}, {0.0, 10.0, EventLabel::background_noise}};
  EXPECT_EQ(label_interval(0.0, 0.5, c), WindowLabel::other);
}

TEST(LabelIntervalTest, ThresholdIsInclusive) {
  const std::vector<AnnotatedSegment> a{{0.38, 0.9, EventLabel::single_cough_sitting}};
  EXPECT_EQ(label_interval(0.0, 0.5, a), WindowLabel::subject_cough);
  const std::vector<AnnotatedSegment> b{{0.381, 0.9, EventLabel::single_cough_sitting}};
  EXPECT_EQ(label_interval(0.0, 0.5, b), WindowLabel::other);
}

TEST(LabelIntervalTest, MatchesBruteForceOracle) {
  Rng rng = make_rng(77);
  for (int layout = 0; layout < 300; ++layout) {
    const auto segs = test::random_layout(rng, 6000);
    const auto ann = test::to_annotations(segs);
    for (int k = 0; k < 12; ++k) {
      ASSERT_EQ(label_interval(k * 0.5, (k + 1) * 0.5, ann), test::oracle_label(k * 500, (k + 1) * 500, segs))
          << "layout " << layout << " window " << k;
    }
  }
}

TEST(LabelWindowsTest, SlicesAndCarriesMetadata) {
  const Eigen::VectorXf x = test::sine(8000 * 2 + 100, 8000, 200.0, 0.3);
  const DualChannelRecording rec = test::make_recording(x, x, 8000);
  const std::vector<AnnotatedSegment> ann{{0.6, 0.9, EventLabel::single_cough_sitting},
                                          {1.1, 1.4, EventLabel::environmental_cough}};
  const auto w = label_windows(rec, ann, 4, synth::Environment::noisy);
  ASSERT_EQ(w.size(), 4u);
  EXPECT_EQ(w[0].label, WindowLabel::other);
  EXPECT_EQ(w[1].label, WindowLabel::subject_cough);
  EXPECT_EQ(w[2].label, WindowLabel::env_cough);
  EXPECT_EQ(w[3].label, WindowLabel::other);
  for (const auto& lw : w) {
    EXPECT_EQ(lw.user_id, 4);
    EXPECT_EQ(lw.environment, synth::Environment::noisy);
    EXPECT_FALSE(lw.window.normalized);
    EXPECT_EQ(lw.window.length(), 4000);
  }
}

TEST(SplitTest, PartitionsByUser) {
  std::vector<LabeledWindow> all;
  for (int u = 1; u <= 10; ++u) {
    for (int k = 0; k < u; ++k) all.push_back(fake_window(u, WindowLabel::other, static_cast<float>(k)));
  }
  const DatasetSplits s = split_by_user(all, SplitConfig{});
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), all.size());
  auto users = [](const std::vector<LabeledWindow>& v) {
    std::set<int> ids;
    for (const auto& w : v) ids.insert(w.user_id);
    return ids;
  };
  EXPECT_EQ(users(s.train), (std::set<int>{1, 2, 3, 4, 5, 6}));
  EXPECT_EQ(users(s.val), (std::set<int>{7, 8}));
  EXPECT_EQ(users(s.test), (std::set<int>{9, 10}));
  EXPECT_EQ(s.test.size(), 19u);
}

TEST(SplitTest, RepeatedUserIsRejected) {
  SplitConfig cfg;
  cfg.test_users = {9, 3};
  EXPECT_EQ(thrown_code([&] { cfg.validate(); }), Errc::OverlappingUserSets);
  std::vector<LabeledWindow> none;
  EXPECT_EQ(thrown_code([&] { split_by_user(none, cfg); }), Errc::OverlappingUserSets);
}

TEST(SplitTest, RemovingATestUserIsLocal) {
  std::vector<LabeledWindow> all;
  for (int u = 1; u <= 10; ++u) {
    for (int k = 0; k < 3 + u; ++k) all.push_back(fake_window(u, WindowLabel::other));
  }
  SplitConfig full;
  SplitConfig reduced;
  reduced.test_users = {9};
  const DatasetSplits a = split_by_user(all, full);
  const DatasetSplits b = split_by_user(all, reduced);
  EXPECT_EQ(a.test.size() - b.test.size(), 13u);
  for (const auto& w : b.test) EXPECT_EQ(w.user_id, 9);
  EXPECT_EQ(a.train.size(), b.train.size());
  EXPECT_EQ(a.val.size(), b.val.size());
}

TEST(SplitTest, LoadsFromManifest) {
  test::TempDir dir;
  const auto manifest = write_small_dataset(dir, 10);
  const DatasetSplits s = split_by_user(manifest, SplitConfig{}, 8000);
  EXPECT_EQ(s.train.size(), 36u);
  EXPECT_EQ(s.val.size(), 12u);
  EXPECT_EQ(s.test.size(), 12u);
  const ClassCounts c = count_labels(s.train);
  EXPECT_EQ(c.subject_cough, 6u);
  EXPECT_EQ(c.env_cough, 6u);
  EXPECT_EQ(c.other, 24u);
  for (const auto& w : s.test) {
    EXPECT_TRUE(w.user_id == 9 || w.user_id == 10);
    EXPECT_TRUE(w.window.normalized);
  }
  const auto only = load_labeled_windows(manifest, 8000, std::vector<int>{3});
  EXPECT_EQ(only.size(), 6u);
  EXPECT_EQ(thrown_code([&] { load_labeled_windows(manifest, 11025); }), Errc::UnsupportedRate);
}

// Counting oracle on the generator's timelines: every split shows
// other >= 3x environmental, environmental >= 1.2x subject.
TEST(ClassBalanceTest, SyntheticSplitsFollowTableOrdering) {
  synth::SynthConfig cfg;
  const SplitConfig split;
  for (const auto* users : {&split.train_users, &split.val_users, &split.test_users}) {
    std::array<std::size_t, 3> counts{};
    for (int u : *users) {
      for (auto env : {synth::Environment::quiet, synth::Environment::noisy, synth::Environment::env_cough}) {
        for (int g = 0; g < synth::kGroupCount; ++g) {
          const auto tl = synth::group_timeline(cfg, u, env, g);
          auto ann = tl.events;
          ann.insert(ann.end(), tl.environmental.begin(), tl.environmental.end());
          const int n = static_cast<int>(tl.length_s / 0.5 + 1e-9);
          for (int k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(label_interval(k * 0.5, (k + 1) * 0.5, ann))];
        }
      }
    }
    const auto subject = counts[0], env = counts[1], other = counts[2];
    EXPECT_GE(10 * env, 12 * subject);
    EXPECT_GE(other, 3 * env);
  }
}

TEST(TrainConfigTest, ValidateRejectsBadValues) {
  TrainConfig c;
  c.early_stop_patience = 0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), Error);
  EXPECT_EQ(parse_optimizer("momentum"), Optimizer::momentum);
  EXPECT_EQ(to_string(Optimizer::adam), "adam");
  EXPECT_THROW(parse_optimizer("rmsprop"), Error);
}

TEST(EarlyStoppingTest, TiesKeepEarliestEpoch) {
  EarlyStopping s(2);
  EXPECT_TRUE(s.update(1, 0.5));
  EXPECT_FALSE(s.update(2, 0.5));
  EXPECT_FALSE(s.should_stop());
  EXPECT_TRUE(s.update(3, 0.6));
  EXPECT_FALSE(s.update(4, 0.6));
  EXPECT_FALSE(s.update(5, 0.1));
  EXPECT_TRUE(s.should_stop());
  EXPECT_EQ(s.best_epoch(), 3);
}

TEST(TrainTest, SeparableToyProblemIsLearned) {
  const nn::ModelSpec spec = nn::reduced_spec();
  const auto train_set = toy_set(300, 1);
  const auto val_set = toy_set(90, 2);
  TrainConfig cfg;
  cfg.epochs_max = 30;
  cfg.batch_size = 16;
  cfg.learning_rate = 3e-3;
  cfg.early_stop_patience = 30;
  const TrainResult r = train(train_set, val_set, spec, cfg);
  EXPECT_LE(r.history.size(), 30u);
  EXPECT_GE(accuracy(spec, r.params, train_set), 0.99);
  EXPECT_GE(accuracy(spec, r.params, val_set), 0.95);
}

TEST(TrainTest, PatienceOneStopsAfterFirstNonImprovement) {
  const nn::ModelSpec spec = nn::reduced_spec();
  const auto train_set = toy_set(60, 3);
  // No subject windows in validation: F1-1 is 0 in every epoch.
  std::vector<LabeledWindow> val_set;
  for (const auto& w : toy_set(30, 4)) {
    if (w.label != WindowLabel::subject_cough) val_set.push_back(w);
  }
  TrainConfig cfg;
  cfg.epochs_max = 20;
  cfg.early_stop_patience = 1;
  const TrainResult r = train(train_set, val_set, spec, cfg);
  ASSERT_EQ(r.history.size(), 2u);
  EXPECT_EQ(r.history.back().epoch, 2);
  EXPECT_EQ(r.best_epoch, 1);
}

TEST(TrainTest, SameSeedsReproduceHistoryAndParams) {
  const nn::ModelSpec spec = nn::reduced_spec();
  const auto train_set = toy_set(90, 5);
  const auto val_set = toy_set(30, 6);
  TrainConfig cfg;
  cfg.epochs_max = 4;
  cfg.windows_per_epoch = 50;
  augment::AugmentPlan plan;
  plan.stages.background = false;
  const TrainResult a = train(train_set, val_set, spec, cfg, &plan);
  const TrainResult b = train(train_set, val_set, spec, cfg, &plan);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(a.params, b.params);
  cfg.jobs = 3;
  const TrainResult c = train(train_set, val_set, spec, cfg, &plan);
  EXPECT_EQ(a.history, c.history);
  EXPECT_EQ(a.params, c.params);
  cfg.seed = 2;
  EXPECT_FALSE(train(train_set, val_set, spec, cfg, &plan).params == a.params);
}

TEST(TrainTest, ReturnsBestEpochCheckpoint) {
  test::TempDir dir;
  const nn::ModelSpec spec = nn::reduced_spec();
  const auto train_set = toy_set(120, 7);
  const auto val_set = toy_set(60, 8);
  TrainConfig cfg;
  cfg.epochs_max = 6;
  cfg.checkpoint_dir = dir.path();
  std::vector<EpochRecord> seen;
  cfg.on_epoch = [&](const EpochRecord& r) { seen.push_back(r); };
  const TrainResult r = train(train_set, val_set, spec, cfg);
  EXPECT_EQ(seen, r.history);
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& h : r.history) {
    if (h.val_f1_1 > best) {
      best = h.val_f1_1;
      best_epoch = h.epoch;
    }
  }
  EXPECT_EQ(r.best_epoch, best_epoch);
  char name[32];
  std::snprintf(name, sizeof(name), "epoch_%03d.ecn1", best_epoch);
  EXPECT_EQ(nn::load_model(dir / name).params, r.params);
  EXPECT_EQ(std::distance(std::filesystem::directory_iterator(dir.path()), {}),
            static_cast<std::ptrdiff_t>(r.history.size()));
}

TEST(TrainTest, SingleClassIsRejected) {
  const nn::ModelSpec spec = nn::reduced_spec();
  std::vector<LabeledWindow> others;
  for (const auto& w : toy_set(30, 9)) {
    if (w.label != WindowLabel::subject_cough) others.push_back(w);
  }
  EXPECT_EQ(thrown_code([&] { train(others, {}, spec, TrainConfig{}); }), Errc::SingleClassTrainingSet);
}

TEST(TrainTest, DivergenceIsReported) {
  const nn::ModelSpec spec = nn::reduced_spec();
  auto train_set = toy_set(30, 10);
  train_set[0].window.data(0, 0) = std::numeric_limits<float>::infinity();
  TrainConfig cfg;
  cfg.epochs_max = 1;
  cfg.batch_size = 30;
  EXPECT_EQ(thrown_code([&] { train(train_set, {}, spec, cfg); }), Errc::NonFiniteLoss);
}

TEST(HistoryTest, CsvHasHeaderAndOneRowPerEpoch) {
  test::TempDir dir;
  const std::vector<EpochRecord> h{{1, 0.7, 0.8, 0.5}, {2, 0.5, 0.9, 0.75}};
  write_history(dir / "h.csv", h);
  std::ifstream f(dir / "h.csv");
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(f, line)) lines.push_back(line);
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "epoch,train_loss,val_acc1,val_f1_1");
  EXPECT_EQ(lines[2], "2,0.500000,0.900000,0.750000");
}
