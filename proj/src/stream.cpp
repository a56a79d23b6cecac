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

#include "earcough/stream.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "earcough/dsp.hpp"
#include "earcough/error.hpp"

namespace earcough::stream {
namespace {

DetectionEvent make_event(std::int64_t first, std::int64_t last, double sum, int count) {
  return {static_cast<double>(first) * kWindowSeconds, static_cast<double>(last + 1) * kWindowSeconds,
          sum / count, count};
}

void check_rate(const nn::ModelSpec& spec, int rate_hz) {
  if (rate_hz != spec.sample_rate_hz) {
    throw Error(Errc::RateMismatch, "input is " + std::to_string(rate_hz) + " Hz, model expects " +
                                        std::to_string(spec.sample_rate_hz) + " Hz");
  }
}

}  // namespace

std::vector<DetectionEvent> merge_windows(std::span<const double> p, const MergeConfig& config) {
  std::vector<DetectionEvent> events;
  const std::size_t n = p.size();
  std::size_t i = 0;
  while (i < n) {
    if (p[i] < config.threshold) {
      ++i;
      continue;
    }
    std::size_t last = i;
    double sum = p[i];
    int count = 1;
    int gap = 0;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (p[j] >= config.threshold) {
        last = j;
        sum += p[j];
        ++count;
        gap = 0;
      } else if (++gap > config.gap_tolerance) {
        break;
      }
    }
    events.push_back(make_event(static_cast<std::int64_t>(i), static_cast<std::int64_t>(last), sum, count));
    i = last + 1;
  }
  return events;
}

std::vector<double> window_probabilities(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                                         const DualChannelRecording& rec) {
  check_rate(spec, rec.sample_rate_hz);
  nn::Executor<float> exec(spec);
  std::vector<double> p;
  for (const DualChannelWindow& w : dsp::slice_windows(rec)) {
    p.push_back(exec.run(params, nn::to_input(dsp::normalize(w)))(0));
  }
  return p;
}

std::vector<DetectionEvent> detect(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                                   const DualChannelRecording& rec, double threshold, int gap_tolerance) {
  const std::vector<double> p = window_probabilities(spec, params, rec);
  return merge_windows(p, {threshold, gap_tolerance});
}

StepResult stream_state_step(const StreamState& state, const WindowScore& next, const MergeConfig& config) {
  if (next.index < state.next_index) {
    throw Error(Errc::OutOfOrderWindow, "window " + std::to_string(next.index) + " arrived after window " +
                                            std::to_string(state.next_index - 1));
  }
  StepResult r{state, std::nullopt};
  StreamState& s = r.state;
  const bool positive = next.probability >= config.threshold;
  if (s.in_run()) {
    const std::int64_t negatives = next.index - s.run_last - (positive ? 1 : 0);
    if (negatives > config.gap_tolerance) {
      r.event = make_event(s.run_first, s.run_last, s.prob_sum, s.positives);
      s.run_first = s.run_last = -1;
      s.prob_sum = 0.0;
      s.positives = 0;
    }
  }
  if (positive) {
    if (!s.in_run()) s.run_first = next.index;
    s.run_last = next.index;
    s.prob_sum += next.probability;
    ++s.positives;
  }
  s.next_index = next.index + 1;
  return r;
}

StepResult stream_flush(const StreamState& state) {
  StepResult r{StreamState{}, std::nullopt};
  if (state.in_run()) r.event = make_event(state.run_first, state.run_last, state.prob_sum, state.positives);
  return r;
}

StreamDetector::StreamDetector(nn::ModelSpec spec, nn::ModelParams<float> params, MergeConfig config)
    : spec_(std::move(spec)), params_(std::move(params)), config_(config), exec_(spec_),
      pending_(2, spec_.input_length) {
  nn::check_shapes(spec_, params_);
}

std::optional<DetectionEvent> StreamDetector::push_window(const DualChannelWindow& window) {
  check_rate(spec_, window.sample_rate_hz);
  const DualChannelWindow w = window.normalized ? window : dsp::normalize(window);
  const double p = exec_.run(params_, nn::to_input(w))(0);
  const auto index = static_cast<std::int64_t>(std::llround(window.origin.start_s / kWindowSeconds));
  StepResult r = stream_state_step(state_, {index, p}, config_);
  state_ = r.state;
  return r.event;
}

std::vector<DetectionEvent> StreamDetector::push_samples(const DualSignal& samples) {
  std::vector<DetectionEvent> events;
  const Eigen::Index len = spec_.input_length;
  Eigen::Index pos = 0;
  while (pos < samples.cols()) {
    const Eigen::Index take = std::min(len - pending_fill_, samples.cols() - pos);
    pending_.middleCols(pending_fill_, take) = samples.middleCols(pos, take);
    pending_fill_ += take;
    pos += take;
    if (pending_fill_ == len) {
      DualChannelWindow w;
      w.data = pending_;
      w.sample_rate_hz = spec_.sample_rate_hz;
      w.origin.start_s = static_cast<double>(samples_seen_) / spec_.sample_rate_hz;
      samples_seen_ += len;
      pending_fill_ = 0;
      if (auto e = push_window(w)) events.push_back(*e);
    }
  }
  return events;
}

std::optional<DetectionEvent> StreamDetector::flush() {
  StepResult r = stream_flush(state_);
  state_ = r.state;
  pending_fill_ = 0;
  samples_seen_ = 0;
  return r.event;
}

std::size_t StreamDetector::memory_bytes() const {
  return static_cast<std::size_t>(pending_.size()) * sizeof(float) + exec_.workspace_bytes();
}

std::string to_ndjson(std::span<const DetectionEvent> events) {
  std::ostringstream o;
  char line[192];
  for (const auto& e : events) {
    std::snprintf(line, sizeof(line),
                  "{\"start_s\":%.3f,\"end_s\":%.3f,\"mean_confidence\":%.6f,\"window_count\":%d}\n", e.start_s,
                  e.end_s, e.mean_confidence, e.window_count);
    o << line;
  }
  return o.str();
}

}  // namespace earcough::stream
