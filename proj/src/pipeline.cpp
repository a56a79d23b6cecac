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

#include "earcough/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "earcough/dsp.hpp"
#include "earcough/error.hpp"
#include "earcough/parallel.hpp"

namespace earcough::pipeline {
namespace {

// Tolerance on the overlap threshold; annotation times carry at most
// microsecond precision.
constexpr double kOverlapEps = 1e-9;

double overlap(double a0, double a1, double b0, double b1) { return std::max(0.0, std::min(a1, b1) - std::max(a0, b0)); }

bool contains(std::span<const int> v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

std::string_view to_string(WindowLabel label) {
  switch (label) {
    case WindowLabel::subject_cough: return "subject_cough";
    case WindowLabel::env_cough: return "env_cough";
    case WindowLabel::other: return "other";
  }
  return "other";
}

WindowLabel label_interval(double start_s, double end_s, std::span<const synth::AnnotatedSegment> annotations) {
  bool env = false;
  for (const auto& a : annotations) {
    const double o = overlap(start_s, end_s, a.start_s, a.end_s);
    if (o + kOverlapEps < kMinCoughOverlap) continue;
    if (synth::is_subject_cough(a.label)) return WindowLabel::subject_cough;
    if (a.label == synth::EventLabel::environmental_cough) env = true;
  }
  return env ? WindowLabel::env_cough : WindowLabel::other;
}

std::vector<LabeledWindow> label_windows(const DualChannelRecording& rec,
                                         std::span<const synth::AnnotatedSegment> annotations, int user_id,
                                         synth::Environment environment) {
  std::vector<LabeledWindow> out;
  for (DualChannelWindow& w : dsp::slice_windows(rec)) {
    const double start = w.origin.start_s;
    const double end = start + static_cast<double>(w.length()) / w.sample_rate_hz;
    const WindowLabel label = label_interval(start, end, annotations);
    out.push_back({std::move(w), label, user_id, environment});
  }
  return out;
}

void SplitConfig::validate() const {
  std::set<int> seen;
  for (const auto* set : {&train_users, &val_users, &test_users}) {
    for (int u : *set) {
      if (!seen.insert(u).second) {
        throw Error(Errc::OverlappingUserSets, "user " + std::to_string(u) + " appears in more than one split");
      }
    }
  }
}

DatasetSplits split_by_user(std::span<const LabeledWindow> windows, const SplitConfig& config) {
  config.validate();
  DatasetSplits s;
  for (const LabeledWindow& w : windows) {
    if (contains(config.train_users, w.user_id)) {
      s.train.push_back(w);
    } else if (contains(config.val_users, w.user_id)) {
      s.val.push_back(w);
    } else if (contains(config.test_users, w.user_id)) {
      s.test.push_back(w);
    }
  }
  return s;
}

std::vector<LabeledWindow> load_labeled_windows(const std::filesystem::path& manifest_path, int rate_hz,
                                                std::span<const int> users, int jobs) {
  if (!is_supported_rate(rate_hz)) throw Error(Errc::UnsupportedRate, std::to_string(rate_hz) + " Hz");
  const synth::DatasetManifest manifest = synth::read_manifest(manifest_path);
  const std::filesystem::path root = manifest_path.parent_path();
  std::vector<const synth::ManifestEntry*> selected;
  for (const auto& e : manifest.entries) {
    if (users.empty() || contains(users, e.user_id)) selected.push_back(&e);
  }
  std::vector<std::vector<LabeledWindow>> per_entry(selected.size());
  parallel_for(selected.size(), jobs, [&](std::size_t i, std::size_t) {
    const synth::ManifestEntry& e = *selected[i];
    const DualChannelRecording rec = dsp::decimate(dsp::load_recording(root / e.wav_path), rate_hz);
    const auto annotations = synth::read_annotations(root / e.annotation_path);
    per_entry[i] = label_windows(rec, annotations, e.user_id, e.environment);
    for (auto& w : per_entry[i]) w.window = dsp::normalize(std::move(w.window));
  });
  std::vector<LabeledWindow> out;
  for (auto& v : per_entry) std::move(v.begin(), v.end(), std::back_inserter(out));
  return out;
}

DatasetSplits split_by_user(const std::filesystem::path& manifest_path, const SplitConfig& config, int rate_hz,
                            int jobs) {
  config.validate();
  std::vector<int> users;
  users.insert(users.end(), config.train_users.begin(), config.train_users.end());
  users.insert(users.end(), config.val_users.begin(), config.val_users.end());
  users.insert(users.end(), config.test_users.begin(), config.test_users.end());
  const std::vector<LabeledWindow> all = load_labeled_windows(manifest_path, rate_hz, users, jobs);
  return split_by_user(all, config);
}

ClassCounts count_labels(std::span<const LabeledWindow> windows) {
  ClassCounts c;
  for (const auto& w : windows) {
    switch (w.label) {
      case WindowLabel::subject_cough: ++c.subject_cough; break;
      case WindowLabel::env_cough: ++c.env_cough; break;
      case WindowLabel::other: ++c.other; break;
    }
  }
  return c;
}

}  // namespace earcough::pipeline
