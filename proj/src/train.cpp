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

#include "earcough/train.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "earcough/error.hpp"
#include "earcough/evalkit.hpp"
#include "earcough/nn/model.hpp"
#include "earcough/nn/serialize.hpp"
#include "earcough/parallel.hpp"
#include "earcough/random.hpp"

namespace earcough::pipeline {
namespace {

using FlatVec = nn::Vec<float>;

class OptimizerState {
 public:
  OptimizerState(const TrainConfig& cfg, Eigen::Index n)
      : cfg_(cfg), m_(FlatVec::Zero(n)), v_(FlatVec::Zero(n)) {}

  void step(FlatVec& params, const FlatVec& grad) {
    const auto lr = static_cast<float>(cfg_.learning_rate);
    switch (cfg_.optimizer) {
      case Optimizer::sgd: params -= lr * grad; break;
      case Optimizer::momentum:
        m_ = static_cast<float>(cfg_.momentum) * m_ + grad;
        params -= lr * m_;
        break;
      case Optimizer::adam: {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        ++t_;
        m_ = static_cast<float>(b1) * m_ + static_cast<float>(1.0 - b1) * grad;
        v_ = static_cast<float>(b2) * v_ + static_cast<float>(1.0 - b2) * grad.cwiseProduct(grad);
        const auto c1 = static_cast<float>(1.0 - std::pow(b1, t_));
        const auto c2 = static_cast<float>(1.0 - std::pow(b2, t_));
        params.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + static_cast<float>(eps));
        break;
      }
    }
  }

 private:
  const TrainConfig& cfg_;
  FlatVec m_;
  FlatVec v_;
  int t_ = 0;
};

}  // namespace

std::string_view to_string(Optimizer opt) {
  switch (opt) {
    case Optimizer::sgd: return "sgd";
    case Optimizer::momentum: return "momentum";
    case Optimizer::adam: return "adam";
  }
  return "adam";
}

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "momentum") return Optimizer::momentum;
  if (name == "adam") return Optimizer::adam;
  throw Error(Errc::InvalidArgument, "unknown optimizer '" + std::string(name) + "'");
}

void TrainConfig::validate() const {
  if (epochs_max < 1) throw Error(Errc::InvalidArgument, "epochs_max must be >= 1");
  if (batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be >= 1");
  if (early_stop_patience < 1) throw Error(Errc::InvalidArgument, "early_stop_patience must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw Error(Errc::InvalidArgument, "learning_rate must be positive");
  }
  if (momentum < 0.0 || momentum >= 1.0) throw Error(Errc::InvalidArgument, "momentum must lie in [0, 1)");
  if (threshold < 0.0 || threshold > 1.0) throw Error(Errc::InvalidArgument, "threshold must lie in [0, 1]");
  if (jobs < 1) throw Error(Errc::InvalidArgument, "jobs must be >= 1");
}

EarlyStopping::EarlyStopping(int patience) : patience_(patience) {
  if (patience < 1) throw Error(Errc::InvalidArgument, "patience must be >= 1");
}

bool EarlyStopping::update(int epoch, double score) {
  if (best_epoch_ == 0 || score > best_score_) {
    best_epoch_ = epoch;
    best_score_ = score;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

int target_of(WindowLabel label) {
  return label == WindowLabel::subject_cough ? static_cast<int>(nn::Target::subject_cough)
                                             : static_cast<int>(nn::Target::other);
}

TrainResult train(std::span<const LabeledWindow> train_set, std::span<const LabeledWindow> val_set,
                  const nn::ModelSpec& spec, const TrainConfig& config, const augment::AugmentPlan* plan,
                  std::span<const DualChannelWindow> noise_pool) {
  config.validate();
  spec.validate();

  // Training examples: originals, or originals plus augmented copies.
  std::vector<DualChannelWindow> augmented;
  std::vector<const DualChannelWindow*> inputs;
  std::vector<int> targets;
  if (plan != nullptr) {
    std::vector<DualChannelWindow> originals;
    originals.reserve(train_set.size());
    for (const auto& w : train_set) originals.push_back(w.window);
    augmented = augment::apply_plan(originals, *plan, noise_pool);
    originals.clear();
    const std::size_t per = augmented.size() / std::max<std::size_t>(train_set.size(), 1);
    for (std::size_t i = 0; i < augmented.size(); ++i) {
      inputs.push_back(&augmented[i]);
      targets.push_back(target_of(train_set[i / per].label));
    }
  } else {
    for (const auto& w : train_set) {
      inputs.push_back(&w.window);
      targets.push_back(target_of(w.label));
    }
  }
  for (const DualChannelWindow* w : inputs) {
    if (w->length() != spec.input_length) {
      throw Error(Errc::ShapeMismatch, "training window length does not match the model input");
    }
  }
  const std::size_t n = inputs.size();
  const auto positives = static_cast<std::size_t>(std::count(targets.begin(), targets.end(), 0));
  if (positives == 0 || positives == n) {
    throw Error(Errc::SingleClassTrainingSet, "training set must contain subject coughs and other windows");
  }
  std::array<float, 2> class_weight{1.0f, 1.0f};
  if (config.class_weighting) {
    class_weight[0] = static_cast<float>(static_cast<double>(n) / (2.0 * static_cast<double>(positives)));
    class_weight[1] = static_cast<float>(static_cast<double>(n) / (2.0 * static_cast<double>(n - positives)));
  }

  Rng init_rng = make_rng(config.seed, {0x696e6974ull});
  nn::ModelParams<float> params = nn::init_params<float>(spec, init_rng);
  FlatVec flat = params.flatten();
  OptimizerState opt(config, flat.size());

  const auto batch = static_cast<std::size_t>(config.batch_size);
  const std::size_t workers = static_cast<std::size_t>(config.jobs);
  std::vector<nn::ModelParams<float>> sample_grads(batch, nn::ModelParams<float>::zeros(spec));
  std::vector<float> sample_loss(batch);
  std::vector<nn::ForwardCache<float>> caches(workers);

  TrainResult result;
  result.params = params;
  EarlyStopping stopper(config.early_stop_patience);
  std::vector<std::size_t> order(n);

  for (int epoch = 1; epoch <= config.epochs_max; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng = make_rng(config.seed, {0x65706f6368ull, static_cast<std::uint64_t>(epoch)});
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const std::size_t used = config.windows_per_epoch > 0 ? std::min(n, config.windows_per_epoch) : n;

    double loss_sum = 0.0;
    for (std::size_t b0 = 0; b0 < used; b0 += batch) {
      const std::size_t b = std::min(batch, used - b0);
      parallel_for(b, config.jobs, [&](std::size_t i, std::size_t w) {
        const std::size_t idx = order[b0 + i];
        sample_grads[i].set_zero();
        const nn::Mat<float> x = nn::to_input(*inputs[idx]);
        const auto target = static_cast<nn::Target>(targets[idx]);
        sample_loss[i] = nn::accumulate_gradient<float>(spec, params, x, target,
                                                        class_weight[static_cast<std::size_t>(targets[idx])],
                                                        sample_grads[i], caches[w]);
      });
      // Fixed reduction order keeps results independent of the worker count.
      FlatVec grad = FlatVec::Zero(flat.size());
      double batch_loss = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        grad += sample_grads[i].flatten();
        batch_loss += sample_loss[i];
      }
      if (!std::isfinite(batch_loss) || !grad.allFinite()) {
        throw Error(Errc::NonFiniteLoss, "training diverged in epoch " + std::to_string(epoch));
      }
      loss_sum += batch_loss;
      grad /= static_cast<float>(b);
      opt.step(flat, grad);
      params.unflatten(flat);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(used);
    if (!val_set.empty()) {
      const evalkit::MetricsReport m = evalkit::evaluate(spec, params, val_set, config.threshold, config.jobs);
      rec.val_acc1 = m.acc1;
      rec.val_f1_1 = m.f1_1;
    }
    result.history.push_back(rec);
    if (config.on_epoch) config.on_epoch(rec);
    if (!config.checkpoint_dir.empty()) {
      char name[32];
      std::snprintf(name, sizeof(name), "epoch_%03d.ecn1", epoch);
      nn::save_model(config.checkpoint_dir / name, spec, params);
    }
    if (stopper.update(epoch, rec.val_f1_1)) result.params = params;
    if (stopper.should_stop()) break;
  }
  result.best_epoch = stopper.best_epoch();
  return result;
}

void write_history(const std::filesystem::path& path, std::span<const EpochRecord> history) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string());
  f << "epoch,train_loss,val_acc1,val_f1_1\n";
  char line[128];
  for (const auto& r : history) {
    std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%.6f\n", r.epoch, r.train_loss, r.val_acc1, r.val_f1_1);
    f << line;
  }
  if (!f) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

}  // namespace earcough::pipeline
