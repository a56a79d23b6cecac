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


#ifndef EARCOUGH_TRAIN_HPP_
#define EARCOUGH_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/augment.hpp"
#include "earcough/nn/params.hpp"
#include "earcough/nn/spec.hpp"
#include "earcough/pipeline.hpp"

namespace earcough::pipeline {

enum class Optimizer { sgd, momentum, adam };

std::string_view to_string(Optimizer opt);
Optimizer parse_optimizer(std::string_view name);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_acc1 = 0.0;
  double val_f1_1 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct TrainConfig {
  int epochs_max = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  double momentum = 0.9;
  int early_stop_patience = 5;
  std::uint64_t seed = 1;
  /// Inverse-frequency loss weights for the two classes.
  bool class_weighting = false;
  /// Windows drawn (without replacement) per epoch; 0 uses the whole
  /// training set every epoch.
  std::size_t windows_per_epoch = 0;
  /// Decision threshold for the validation metrics.
  double threshold = 0.5;
  int jobs = 1;
  /// When non-empty, the parameters after every epoch are written here as
  /// `epoch_NNN.ecn1`.
  std::filesystem::path checkpoint_dir;
  /// Called after every epoch (progress reporting); may be empty.
  std::function<void(const EpochRecord&)> on_epoch;

  /// Throws Error{InvalidArgument}.
  void validate() const;
};

struct TrainResult {
  nn::ModelParams<float> params;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
};

/// Tracks the best validation score; ties keep the earlier epoch.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience);

  /// Records the score of `epoch` (1-based, increasing). Returns true if it
  /// is the new best.
  bool update(int epoch, double score);
  bool should_stop() const { return since_best_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best_score() const { return best_score_; }

 private:
  int patience_;
  int best_epoch_ = 0;
  double best_score_ = 0.0;
  int since_best_ = 0;
};

/// The 2-way training target of a window (env_cough trains as "other").
int target_of(WindowLabel label);

/// Minibatch training with early stopping on validation F1-1. When `plan`
/// is given the training windows are augmented first (validation windows
/// never are). Returns the parameters of the best validation epoch.
/// Throws Error{SingleClassTrainingSet}, Error{NonFiniteLoss}.
TrainResult train(std::span<const LabeledWindow> train_set, std::span<const LabeledWindow> val_set,
                  const nn::ModelSpec& spec, const TrainConfig& config, const augment::AugmentPlan* plan = nullptr,
                  std::span<const DualChannelWindow> noise_pool = {});

/// CSV with header `epoch,train_loss,val_acc1,val_f1_1`.
void write_history(const std::filesystem::path& path, std::span<const EpochRecord> history);

}  // namespace earcough::pipeline

#endif  // EARCOUGH_TRAIN_HPP_
