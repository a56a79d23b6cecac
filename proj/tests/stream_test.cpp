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

#include <json.hpp>
#include <sstream>
#include <thread>

#include "earcough/dsp.hpp"
#include "earcough/nn.hpp"
#include "earcough/stream.hpp"
#include "stream_fixture.hpp"
#include "test_util.hpp"

using namespace earcough;
using namespace earcough::stream;

namespace {

struct Model {
  nn::ModelSpec spec = nn::reduced_spec();
  nn::ModelParams<float> params;

  explicit Model(std::uint64_t seed) {
    Rng rng = make_rng(seed);
    params = nn::init_params<float>(spec, rng);
  }
};

std::vector<DetectionEvent> step_all(std::span<const double> p, const MergeConfig& cfg) {
  std::vector<DetectionEvent> out;
  StreamState s;
  for (std::size_t i = 0; i < p.size(); ++i) {
    StepResult r = stream_state_step(s, {static_cast<std::int64_t>(i), p[i]}, cfg);
    s = r.state;
    if (r.event) out.push_back(*r.event);
  }
  if (auto e = stream_flush(s).event) out.push_back(*e);
  return out;
}

double total_duration(const std::vector<DetectionEvent>& events) {
  double d = 0.0;
  for (const auto& e : events) d += e.end_s - e.start_s;
  return d;
}

std::vector<double> random_probabilities(Rng& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p(n);
  for (auto& x : p) x = u(rng);
  return p;
}

}  // namespace

TEST(MergeTest, DocumentedExample) {
  const std::vector<double> p{0.9, 0.8, 0.1, 0.7};
  const auto e = merge_windows(p);
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].start_s, 0.0);
  EXPECT_EQ(e[0].end_s, 1.0);
  EXPECT_NEAR(e[0].mean_confidence, 0.85, 1e-12);
  EXPECT_EQ(e[0].window_count, 2);
  EXPECT_EQ(e[1].start_s, 1.5);
  EXPECT_EQ(e[1].end_s, 2.0);
  EXPECT_EQ(e[1].window_count, 1);
}

TEST(MergeTest, GapToleranceBridgesShortDips) {
  const std::vector<double> p{0.9, 0.1, 0.8, 0.1, 0.1, 0.6};
  const auto e = merge_windows(p, {0.5, 1});
  ASSERT_EQ(e.size(), 2u);
  EXPECT_EQ(e[0].end_s, 1.5);
  EXPECT_EQ(e[0].window_count, 2);
  EXPECT_NEAR(e[0].mean_confidence, 0.85, 1e-12);
  EXPECT_EQ(e[1].start_s, 2.5);
}

TEST(MergeTest, EventsAreOrderedDisjointAndWholeWindows) {
  Rng rng = make_rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_probabilities(rng, 60);
    for (int gap : {0, 1, 3}) {
      const auto e = merge_windows(p, {0.6, gap});
      for (std::size_t i = 0; i < e.size(); ++i) {
        const double len = e[i].end_s - e[i].start_s;
        EXPECT_GT(len, 0.0);
        EXPECT_NEAR(len / 0.5, std::round(len / 0.5), 1e-12);
        EXPECT_GE(e[i].window_count, 1);
        EXPECT_GE(e[i].mean_confidence, 0.6);
        EXPECT_LE(e[i].mean_confidence, 1.0);
        if (i > 0) EXPECT_LT(e[i - 1].end_s, e[i].start_s);
      }
    }
  }
}

TEST(MergeTest, RaisingThresholdNeverAddsDuration) {
  Rng rng = make_rng(6);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_probabilities(rng, 40);
    double prev = std::numeric_limits<double>::infinity();
    for (double th = 0.0; th <= 1.0; th += 0.05) {
      const double d = total_duration(merge_windows(p, {th, 0}));
      EXPECT_LE(d, prev);
      prev = d;
    }
  }
}

TEST(StreamStepTest, MatchesBatchMergeExactly) {
  Rng rng = make_rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    const auto p = random_probabilities(rng, 1 + trial % 50);
    for (int gap : {0, 1, 2}) {
      const MergeConfig cfg{0.55, gap};
      EXPECT_EQ(step_all(p, cfg), merge_windows(p, cfg));
    }
  }
}

TEST(StreamStepTest, EmitsOnFirstNegativeWindow) {
  StreamState s;
  for (std::int64_t i = 0; i < 3; ++i) {
    const StepResult r = stream_state_step(s, {i, 0.9});
    EXPECT_FALSE(r.event);
    s = r.state;
  }
  const StepResult r = stream_state_step(s, {3, 0.2});
  ASSERT_TRUE(r.event);
  EXPECT_EQ(r.event->end_s, 1.5);
  EXPECT_FALSE(r.state.in_run());
}

TEST(StreamStepTest, SkippedIndicesCountAsNegative) {
  StreamState s = stream_state_step({}, {0, 0.9}).state;
  const StepResult r = stream_state_step(s, {4, 0.9});
  ASSERT_TRUE(r.event);
  EXPECT_EQ(r.event->end_s, 0.5);
  EXPECT_EQ(r.state.run_first, 4);
}

TEST(StreamStepTest, OutOfOrderWindowIsRejected) {
  StreamState s = stream_state_step({}, {3, 0.1}).state;
  EXPECT_EQ(test::thrown_code([&] { stream_state_step(s, {3, 0.1}); }), Errc::OutOfOrderWindow);
  EXPECT_EQ(test::thrown_code([&] { stream_state_step(s, {1, 0.9}); }), Errc::OutOfOrderWindow);
}

TEST(StreamStepTest, FlushOnSilenceRestoresInitialState) {
  StreamState s;
  for (std::int64_t i = 0; i < 10; ++i) s = stream_state_step(s, {i, 0.0}).state;
  const StepResult r = stream_flush(s);
  EXPECT_FALSE(r.event);
  EXPECT_EQ(r.state, StreamState{});
}

TEST(StreamStepTest, StateCanBeResumedFromACopy) {
  Rng rng = make_rng(8);
  const auto p = random_probabilities(rng, 40);
  const MergeConfig cfg{0.4, 1};
  std::vector<DetectionEvent> events;
  StreamState s;
  for (std::size_t i = 0; i < 20; ++i) {
    StepResult r = stream_state_step(s, {static_cast<std::int64_t>(i), p[i]}, cfg);
    s = r.state;
    if (r.event) events.push_back(*r.event);
  }
  const StreamState moved = s;
  std::thread worker([&] {
    StreamState t = moved;
    for (std::size_t i = 20; i < p.size(); ++i) {
      StepResult r = stream_state_step(t, {static_cast<std::int64_t>(i), p[i]}, cfg);
      t = r.state;
      if (r.event) events.push_back(*r.event);
    }
    if (auto e = stream_flush(t).event) events.push_back(*e);
  });
  worker.join();
  EXPECT_EQ(events, merge_windows(p, cfg));
}

TEST(DetectTest, NeverAboveThresholdGivesNoEvents) {
  const nn::ModelSpec spec = nn::reduced_spec();
  const auto zero = nn::ModelParams<float>::zeros(spec);
  Rng rng = make_rng(9);
  const auto rec = test::random_stream_recording(rng, spec.sample_rate_hz, 20);
  const auto p = window_probabilities(spec, zero, rec);
  ASSERT_EQ(p.size(), 20u);
  for (double x : p) EXPECT_DOUBLE_EQ(x, 0.5);
  EXPECT_TRUE(detect(spec, zero, rec, 0.6).empty());
  EXPECT_EQ(detect(spec, zero, rec, 0.5).size(), 1u);
}

TEST(DetectTest, RateMismatchIsRejected) {
  const Model m(1);
  const DualChannelRecording rec = test::make_recording(Eigen::VectorXf::Zero(256), Eigen::VectorXf::Zero(256), 256);
  EXPECT_EQ(test::thrown_code([&] { detect(m.spec, m.params, rec); }), Errc::RateMismatch);
  StreamDetector det(m.spec, m.params);
  EXPECT_EQ(test::thrown_code([&] { det.push_window(test::make_window(Eigen::VectorXf::Zero(128),
                                                                      Eigen::VectorXf::Zero(128), 256)); }),
            Errc::RateMismatch);
}

TEST(StreamDetectorTest, MatchesDetectOnRandomRecordings) {
  Rng rng = make_rng(10);
  for (int trial = 0; trial < 25; ++trial) {
    const Model m(100 + static_cast<std::uint64_t>(trial));
    const auto rec = test::random_stream_recording(rng, m.spec.sample_rate_hz, 10 + trial * 3);
    const double th = test::median_threshold(window_probabilities(m.spec, m.params, rec));
    const int gap = trial % 3;
    const auto batch = detect(m.spec, m.params, rec, th, gap);
    EXPECT_FALSE(batch.empty());
    StreamDetector det(m.spec, m.params, {th, gap});
    EXPECT_EQ(test::stream_in_chunks(det, rec, rng), batch) << "trial " << trial;
    EXPECT_EQ(det.state(), StreamState{});
  }
}

TEST(StreamDetectorTest, PushWindowUsesWindowStartTimes) {
  const Model m(2);
  Rng rng = make_rng(11);
  const auto rec = test::random_stream_recording(rng, m.spec.sample_rate_hz, 16);
  const double th = test::median_threshold(window_probabilities(m.spec, m.params, rec));
  StreamDetector det(m.spec, m.params, {th, 0});
  std::vector<DetectionEvent> events;
  for (const auto& w : dsp::slice_windows(rec)) {
    if (auto e = det.push_window(w)) events.push_back(*e);
  }
  if (auto e = det.flush()) events.push_back(*e);
  EXPECT_EQ(events, detect(m.spec, m.params, rec, th));
}

TEST(StreamDetectorTest, MemoryIsIndependentOfStreamLength) {
  const Model m(3);
  Rng rng = make_rng(12);
  const auto short_rec = test::random_stream_recording(rng, m.spec.sample_rate_hz, 20);
  const auto long_rec = test::random_stream_recording(rng, m.spec.sample_rate_hz, 200);
  StreamDetector a(m.spec, m.params), b(m.spec, m.params);
  const std::size_t before = a.memory_bytes();
  test::stream_in_chunks(a, short_rec, rng);
  test::stream_in_chunks(b, long_rec, rng);
  EXPECT_EQ(a.memory_bytes(), before);
  EXPECT_EQ(b.memory_bytes(), before);
  EXPECT_GE(before, static_cast<std::size_t>(2 * m.spec.input_length) * sizeof(float));
}

TEST(NdjsonTest, OneObjectPerEvent) {
  const std::vector<DetectionEvent> e{{0.0, 1.0, 0.85, 2}, {1.5, 2.0, 0.7, 1}};
  std::istringstream in(to_ndjson(e));
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_DOUBLE_EQ(j["start_s"].get<double>(), e[n].start_s);
    EXPECT_DOUBLE_EQ(j["end_s"].get<double>(), e[n].end_s);
    EXPECT_NEAR(j["mean_confidence"].get<double>(), e[n].mean_confidence, 1e-6);
    EXPECT_EQ(j["window_count"].get<int>(), e[n].window_count);
    ++n;
  }
  EXPECT_EQ(n, 2);
  EXPECT_EQ(to_ndjson({}), "");
}
