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


#ifndef EARCOUGH_PIPELINE_HPP_
#define EARCOUGH_PIPELINE_HPP_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/synth.hpp"

namespace earcough::pipeline {

enum class WindowLabel { subject_cough, env_cough, other };

std::string_view to_string(WindowLabel label);

struct LabeledWindow {
  DualChannelWindow window;
  WindowLabel label = WindowLabel::other;
  int user_id = 0;
  synth::Environment environment = synth::Environment::quiet;
};

/// Minimum overlap (seconds) between a window and a cough segment for the
/// window to take the cough's label.
inline constexpr double kMinCoughOverlap = 0.12;

/// Label of the interval [start_s, end_s) given the recording's annotations.
WindowLabel label_interval(double start_s, double end_s, std::span<const synth::AnnotatedSegment> annotations);

/// Slices `rec` into 0.5 s windows and labels each one. Windows are not
/// normalized.
std::vector<LabeledWindow> label_windows(const DualChannelRecording& rec,
                                         std::span<const synth::AnnotatedSegment> annotations, int user_id = 0,
                                         synth::Environment environment = synth::Environment::quiet);

struct SplitConfig {
  std::vector<int> train_users{1, 2, 3, 4, 5, 6};
  std::vector<int> val_users{7, 8};
  std::vector<int> test_users{9, 10};

  /// Throws Error{OverlappingUserSets} if a user id appears more than once.
  void validate() const;
};

struct DatasetSplits {
  std::vector<LabeledWindow> train;
  std::vector<LabeledWindow> val;
  std::vector<LabeledWindow> test;
};

/// Routes each window to the split owning its user; windows of users named
/// in no split are dropped.
DatasetSplits split_by_user(std::span<const LabeledWindow> windows, const SplitConfig& config);

/// Loads every recording of `users` (all users if empty) listed in the
/// manifest at `manifest_path`, decimates to `rate_hz`, labels and
/// normalizes. Recording order follows the manifest.
std::vector<LabeledWindow> load_labeled_windows(const std::filesystem::path& manifest_path, int rate_hz,
                                                std::span<const int> users = {}, int jobs = 1);

/// load_labeled_windows + split_by_user, reading only the users named in
/// `config`.
DatasetSplits split_by_user(const std::filesystem::path& manifest_path, const SplitConfig& config, int rate_hz,
                            int jobs = 1);

struct ClassCounts {
  std::size_t subject_cough = 0;
  std::size_t env_cough = 0;
  std::size_t other = 0;

  std::size_t total() const { return subject_cough + env_cough + other; }
};

ClassCounts count_labels(std::span<const LabeledWindow> windows);

}  // namespace earcough::pipeline

#endif  // EARCOUGH_PIPELINE_HPP_
