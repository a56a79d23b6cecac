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


#ifndef EARCOUGH_STREAM_HPP_
#define EARCOUGH_STREAM_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/nn/model.hpp"
#include "earcough/nn/params.hpp"
#include "earcough/nn/spec.hpp"

namespace earcough::stream {

struct DetectionEvent {
  double start_s = 0.0;
  double end_s = 0.0;
  double mean_confidence = 0.0;
  int window_count = 0;

  bool operator==(const DetectionEvent&) const = default;
};

struct MergeConfig {
  double threshold = 0.5;
  /// Negative windows tolerated inside one event.
  int gap_tolerance = 0;
};

/// Merges per-window subject probabilities (window k covers
/// [k * 0.5, (k + 1) * 0.5) s) into events. Events start and end on
/// positive windows; confidence is the mean over positive windows.
std::vector<DetectionEvent> merge_windows(std::span<const double> probabilities, const MergeConfig& config = {});

/// p(subject_cough) for each back-to-back window of `rec`.
/// Throws Error{RateMismatch}.
std::vector<double> window_probabilities(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                                         const DualChannelRecording& rec);

/// Throws Error{RateMismatch}.
std::vector<DetectionEvent> detect(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                                   const DualChannelRecording& rec, double threshold = 0.5, int gap_tolerance = 0);

/// Detector state between windows. Plain values, so it can be copied or
/// moved between threads at step boundaries.
struct StreamState {
  std::int64_t next_index = 0;
  std::int64_t run_first = -1;
  std::int64_t run_last = -1;
  double prob_sum = 0.0;
  int positives = 0;

  bool in_run() const { return run_first >= 0; }
  bool operator==(const StreamState&) const = default;
};

struct WindowScore {
  std::int64_t index = 0;
  double probability = 0.0;
};

struct StepResult {
  StreamState state;
  std::optional<DetectionEvent> event;
};

/// Advances the merge state by one scored window. Window indices must
/// increase; skipped indices count as negative windows.
/// Throws Error{OutOfOrderWindow}.
StepResult stream_state_step(const StreamState& state, const WindowScore& next, const MergeConfig& config = {});

/// Closes an open run, if any, and returns the state to its initial value.
StepResult stream_flush(const StreamState& state);

/// Incremental detector over a sample stream: buffers up to one window,
/// scores it and advances the merge state.
class StreamDetector {
 public:
  StreamDetector(nn::ModelSpec spec, nn::ModelParams<float> params, MergeConfig config = {});

  /// Scores one window; its start time fixes its index. Throws
  /// Error{RateMismatch}, Error{OutOfOrderWindow}, Error{ShapeMismatch}.
  std::optional<DetectionEvent> push_window(const DualChannelWindow& window);

  /// Appends raw samples; returns events completed by them.
  std::vector<DetectionEvent> push_samples(const DualSignal& samples);

  std::optional<DetectionEvent> flush();

  const StreamState& state() const { return state_; }
  /// Bytes held by the sample buffer and the inference workspace.
  std::size_t memory_bytes() const;

 private:
  nn::ModelSpec spec_;
  nn::ModelParams<float> params_;
  MergeConfig config_;
  nn::Executor<float> exec_;
  StreamState state_;
  DualSignal pending_;
  Eigen::Index pending_fill_ = 0;
  std::int64_t samples_seen_ = 0;
};

/// One JSON object per line: start_s, end_s, mean_confidence, window_count.
std::string to_ndjson(std::span<const DetectionEvent> events);

}  // namespace earcough::stream

#endif  // EARCOUGH_STREAM_HPP_
