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


#ifndef EARCOUGH_EVALKIT_HPP_
#define EARCOUGH_EVALKIT_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "earcough/augment.hpp"
#include "earcough/nn/params.hpp"
#include "earcough/nn/profile.hpp"
#include "earcough/nn/spec.hpp"
#include "earcough/pipeline.hpp"
#include "earcough/train.hpp"

namespace earcough::evalkit {

/// 2x2 counts with subject_cough as the positive class.
struct Confusion {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
  /// (TP + TN) / total; 0 for an empty matrix.
  double accuracy() const;
  /// 2TP / (2TP + FP + FN); 0 when the denominator is 0.
  double f1() const;
  bool operator==(const Confusion&) const = default;
};

struct MetricsReport {
  Confusion confusion;
  double acc1 = 0.0;
  double f1_1 = 0.0;
  Confusion confusion_cough_only;
  double acc2 = 0.0;
  double f1_2 = 0.0;
  nn::ResourceProfile resource;
};

/// Scores predictions against ground truth. Acc-1/F1-1 use every window
/// (env_cough counts as negative); Acc-2/F1-2 use only windows whose truth
/// is subject_cough or env_cough.
MetricsReport score(std::span<const pipeline::WindowLabel> truth, std::span<const std::uint8_t> predicted_subject);

/// p(subject_cough) for every window.
std::vector<float> predict(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                           std::span<const pipeline::LabeledWindow> windows, int jobs = 1);

/// Thresholds p(subject_cough) at `threshold` (>= counts as subject).
/// Throws Error{EmptyTestSet}.
MetricsReport evaluate(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                       std::span<const pipeline::LabeledWindow> test_set, double threshold = 0.5, int jobs = 1);

std::string to_json(const MetricsReport& report);
/// Aligned plain-text table with both confusion matrices.
std::string format_table(const MetricsReport& report, const std::string& title);

enum class ChannelMode { dual, feed_forward, feedback };

std::string_view to_string(ChannelMode mode);

/// Copies the chosen channel into both rows; `dual` returns the input.
DualChannelWindow with_channel_mode(const DualChannelWindow& window, ChannelMode mode);
std::vector<pipeline::LabeledWindow> with_channel_mode(std::span<const pipeline::LabeledWindow> windows,
                                                       ChannelMode mode);

struct AblationResult {
  ChannelMode mode = ChannelMode::dual;
  MetricsReport report;
  pipeline::TrainResult training;
};

/// Trains and evaluates the dual-channel model and both single-channel
/// variants on identical splits and settings.
std::vector<AblationResult> ablation(const pipeline::DatasetSplits& splits, const nn::ModelSpec& spec,
                                     const pipeline::TrainConfig& config, const augment::AugmentPlan* plan,
                                     std::span<const DualChannelWindow> noise_pool, double threshold = 0.5);

std::string ablation_table(std::span<const AblationResult> results);

struct ResourceRow {
  int sample_rate_hz = 0;
  nn::ResourceProfile profile;
};

inline constexpr int kDefaultRates[] = {8000, 16000, 24000, 48000};

std::vector<ResourceRow> resource_table(std::span<const int> rates = kDefaultRates);
/// CSV header: rate_khz,flops_m,space_kb,param_count,param_bytes,peak_activation_bytes
/// (1 kB = 1000 bytes).
std::string resource_csv(std::span<const ResourceRow> rows);

}  // namespace earcough::evalkit

#endif  // EARCOUGH_EVALKIT_HPP_
