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

#ifndef EARCOUGH_AUDIO_HPP_
#define EARCOUGH_AUDIO_HPP_

#include <Eigen/Core>

#include <string>

namespace earcough {

/// Planar two-channel buffer: row 0 is the feed-forward (outer) microphone,
/// row 1 the feedback (in-ear) microphone. Row-major so each channel is
/// contiguous.
using DualSignal = Eigen::Matrix<float, 2, Eigen::Dynamic, Eigen::RowMajor>;
using MonoSignal = Eigen::VectorXf;

inline constexpr int kFeedForward = 0;
inline constexpr int kFeedback = 1;
inline constexpr double kWindowSeconds = 0.5;

inline bool is_supported_rate(int rate_hz) {
  return rate_hz == 8000 || rate_hz == 16000 || rate_hz == 24000 || rate_hz == 48000;
}

inline Eigen::Index window_length(int rate_hz) { return rate_hz / 2; }

struct DualChannelRecording {
  DualSignal samples;
  int sample_rate_hz = 48000;
  std::string source_id;

  Eigen::Index frames() const { return samples.cols(); }
  double duration_s() const { return static_cast<double>(frames()) / sample_rate_hz; }
  auto ff() const { return samples.row(kFeedForward); }
  auto fb() const { return samples.row(kFeedback); }
};

struct WindowOrigin {
  std::string source_id;
  double start_s = 0.0;
};

struct DualChannelWindow {
  DualSignal data;
  WindowOrigin origin;
  int sample_rate_hz = 8000;
  bool normalized = false;

  Eigen::Index length() const { return data.cols(); }
};

}  // namespace earcough

#endif  // EARCOUGH_AUDIO_HPP_
