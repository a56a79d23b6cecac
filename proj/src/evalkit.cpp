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

#include "earcough/evalkit.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>

#include "earcough/error.hpp"
#include "earcough/nn/model.hpp"
#include "earcough/parallel.hpp"

namespace earcough::evalkit {

using pipeline::LabeledWindow;
using pipeline::WindowLabel;

double Confusion::accuracy() const {
  const std::uint64_t n = total();
  return n == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(n);
}

double Confusion::f1() const {
  const std::uint64_t d = 2 * tp + fp + fn;
  return d == 0 ? 0.0 : static_cast<double>(2 * tp) / static_cast<double>(d);
}

namespace {

void tally(Confusion& c, bool truth, bool predicted) {
  if (truth) {
    predicted ? ++c.tp : ++c.fn;
  } else {
    predicted ? ++c.fp : ++c.tn;
  }
}

nlohmann::json confusion_json(const Confusion& c) {
  return {{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}};
}

std::string confusion_lines(const Confusion& c, const char* negative) {
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "                     pred subject  pred other\n"
                "  true subject       %12llu  %10llu\n"
                "  true %-14s %12llu  %10llu\n",
                static_cast<unsigned long long>(c.tp), static_cast<unsigned long long>(c.fn), negative,
                static_cast<unsigned long long>(c.fp), static_cast<unsigned long long>(c.tn));
  return buf;
}

}  // namespace

MetricsReport score(std::span<const WindowLabel> truth, std::span<const std::uint8_t> predicted_subject) {
  if (truth.size() != predicted_subject.size()) throw Error(Errc::ShapeMismatch, "truth/prediction size mismatch");
  MetricsReport r;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool is_subject = truth[i] == WindowLabel::subject_cough;
    const bool pred = predicted_subject[i] != 0;
    tally(r.confusion, is_subject, pred);
    if (truth[i] != WindowLabel::other) tally(r.confusion_cough_only, is_subject, pred);
  }
  r.acc1 = r.confusion.accuracy();
  r.f1_1 = r.confusion.f1();
  r.acc2 = r.confusion_cough_only.accuracy();
  r.f1_2 = r.confusion_cough_only.f1();
  return r;
}

std::vector<float> predict(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                           std::span<const LabeledWindow> windows, int jobs) {
  std::vector<float> p(windows.size());
  std::vector<nn::Executor<float>> execs(static_cast<std::size_t>(std::max(jobs, 1)), nn::Executor<float>(spec));
  parallel_for(windows.size(), jobs, [&](std::size_t i, std::size_t w) {
    p[i] = execs[w].run(params, nn::to_input(windows[i].window))(0);
  });
  return p;
}

MetricsReport evaluate(const nn::ModelSpec& spec, const nn::ModelParams<float>& params,
                       std::span<const LabeledWindow> test_set, double threshold, int jobs) {
  if (test_set.empty()) throw Error(Errc::EmptyTestSet, "nothing to evaluate");
  const std::vector<float> p = predict(spec, params, test_set, jobs);
  std::vector<WindowLabel> truth;
  std::vector<std::uint8_t> pred;
  truth.reserve(p.size());
  pred.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    truth.push_back(test_set[i].label);
    pred.push_back(static_cast<double>(p[i]) >= threshold ? 1 : 0);
  }
  MetricsReport r = score(truth, pred);
  r.resource = nn::profile(spec);
  return r;
}

std::string to_json(const MetricsReport& r) {
  nlohmann::json j;
  j["acc1"] = r.acc1;
  j["f1_1"] = r.f1_1;
  j["acc2"] = r.acc2;
  j["f1_2"] = r.f1_2;
  j["confusion"] = confusion_json(r.confusion);
  j["confusion_cough_only"] = confusion_json(r.confusion_cough_only);
  j["resource"] = {{"flops", r.resource.flops},
                   {"param_count", r.resource.param_count},
                   {"param_bytes", r.resource.param_bytes},
                   {"peak_activation_bytes", r.resource.peak_activation_bytes},
                   {"space_bytes", r.resource.space_bytes}};
  return j.dump(2) + "\n";
}

std::string format_table(const MetricsReport& r, const std::string& title) {
  std::ostringstream o;
  char buf[256];
  o << title << "\n";
  std::snprintf(buf, sizeof(buf), "  %-8s %-8s %-8s %-8s %-10s %-10s\n", "Acc-1", "F1-1", "Acc-2", "F1-2", "FLOPs(M)",
                "Space(kB)");
  o << buf;
  std::snprintf(buf, sizeof(buf), "  %-8.4f %-8.4f %-8.4f %-8.4f %-10.3f %-10.3f\n", r.acc1, r.f1_1, r.acc2, r.f1_2,
                static_cast<double>(r.resource.flops) / 1e6, static_cast<double>(r.resource.space_bytes) / 1e3);
  o << buf;
  o << "Subject cough vs. all other windows\n" << confusion_lines(r.confusion, "other");
  o << "Subject cough vs. environmental cough\n" << confusion_lines(r.confusion_cough_only, "env cough");
  return o.str();
}

std::string_view to_string(ChannelMode mode) {
  switch (mode) {
    case ChannelMode::dual: return "dual";
    case ChannelMode::feed_forward: return "feed_forward";
    case ChannelMode::feedback: return "feedback";
  }
  return "dual";
}

DualChannelWindow with_channel_mode(const DualChannelWindow& window, ChannelMode mode) {
  DualChannelWindow out = window;
  if (mode == ChannelMode::feed_forward) out.data.row(kFeedback) = window.data.row(kFeedForward);
  if (mode == ChannelMode::feedback) out.data.row(kFeedForward) = window.data.row(kFeedback);
  return out;
}

std::vector<LabeledWindow> with_channel_mode(std::span<const LabeledWindow> windows, ChannelMode mode) {
  std::vector<LabeledWindow> out;
  out.reserve(windows.size());
  for (const auto& w : windows) out.push_back({with_channel_mode(w.window, mode), w.label, w.user_id, w.environment});
  return out;
}

std::vector<AblationResult> ablation(const pipeline::DatasetSplits& splits, const nn::ModelSpec& spec,
                                     const pipeline::TrainConfig& config, const augment::AugmentPlan* plan,
                                     std::span<const DualChannelWindow> noise_pool, double threshold) {
  std::vector<AblationResult> results;
  for (ChannelMode mode : {ChannelMode::dual, ChannelMode::feed_forward, ChannelMode::feedback}) {
    AblationResult r;
    r.mode = mode;
    if (mode == ChannelMode::dual) {
      r.training = pipeline::train(splits.train, splits.val, spec, config, plan, noise_pool);
      r.report = evaluate(spec, r.training.params, splits.test, threshold, config.jobs);
    } else {
      // Noise clips go through the same channel duplication as the data.
      std::vector<DualChannelWindow> pool;
      pool.reserve(noise_pool.size());
      for (const auto& w : noise_pool) pool.push_back(with_channel_mode(w, mode));
      const auto train = with_channel_mode(splits.train, mode);
      const auto val = with_channel_mode(splits.val, mode);
      r.training = pipeline::train(train, val, spec, config, plan, pool);
      const auto test = with_channel_mode(splits.test, mode);
      r.report = evaluate(spec, r.training.params, test, threshold, config.jobs);
    }
    results.push_back(std::move(r));
  }
  return results;
}

std::string ablation_table(std::span<const AblationResult> results) {
  std::ostringstream o;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-14s %-8s %-8s %-8s %-8s %-10s\n", "input", "Acc-1", "F1-1", "Acc-2", "F1-2",
                "best_epoch");
  o << buf;
  for (const auto& r : results) {
    std::snprintf(buf, sizeof(buf), "%-14s %-8.4f %-8.4f %-8.4f %-8.4f %-10d\n", std::string(to_string(r.mode)).c_str(),
                  r.report.acc1, r.report.f1_1, r.report.acc2, r.report.f1_2, r.training.best_epoch);
    o << buf;
  }
  return o.str();
}

std::vector<ResourceRow> resource_table(std::span<const int> rates) {
  std::vector<ResourceRow> rows;
  for (int rate : rates) rows.push_back({rate, nn::profile(nn::default_spec(rate))});
  return rows;
}

std::string resource_csv(std::span<const ResourceRow> rows) {
  std::ostringstream o;
  o << "rate_khz,flops_m,space_kb,param_count,param_bytes,peak_activation_bytes\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%d,%.3f,%.3f,%llu,%llu,%llu\n", r.sample_rate_hz / 1000,
                  static_cast<double>(r.profile.flops) / 1e6, static_cast<double>(r.profile.space_bytes) / 1e3,
                  static_cast<unsigned long long>(r.profile.param_count),
                  static_cast<unsigned long long>(r.profile.param_bytes),
                  static_cast<unsigned long long>(r.profile.peak_activation_bytes));
    o << buf;
  }
  return o.str();
}

}  // namespace earcough::evalkit
