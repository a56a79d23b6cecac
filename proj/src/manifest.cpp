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

#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "earcough/error.hpp"
#include "earcough/synth.hpp"

namespace earcough::synth {
namespace {

constexpr std::array<std::string_view, kEventLabelCount> kLabelNames = {
    "single_cough_sitting", "continuous_cough_sitting", "bite_apple",
    "sip_water",            "laughing",                 "reading",
    "head_movement",        "walking",                  "single_cough_walking",
    "continuous_cough_walking", "environmental_cough",  "background_noise",
};

}  // namespace

std::string_view to_string(EventLabel label) { return kLabelNames[static_cast<std::size_t>(label)]; }

std::optional<EventLabel> parse_label(std::string_view name) {
  for (std::size_t i = 0; i < kLabelNames.size(); ++i) {
    if (kLabelNames[i] == name) return static_cast<EventLabel>(i);
  }
  return std::nullopt;
}

bool is_subject_cough(EventLabel label) {
  switch (label) {
    case EventLabel::single_cough_sitting:
    case EventLabel::continuous_cough_sitting:
    case EventLabel::single_cough_walking:
    case EventLabel::continuous_cough_walking:
      return true;
    default:
      return false;
  }
}

std::string_view to_string(Environment env) {
  switch (env) {
    case Environment::quiet: return "quiet";
    case Environment::noisy: return "noisy";
    case Environment::env_cough: return "env_cough";
  }
  return "quiet";
}

std::string_view to_string(Posture posture) {
  return posture == Posture::walking ? "walking" : "sitting";
}

Environment parse_environment(std::string_view name) {
  if (name == "quiet") return Environment::quiet;
  if (name == "noisy") return Environment::noisy;
  if (name == "env_cough") return Environment::env_cough;
  throw Error(Errc::InvalidArgument, "unknown environment '" + std::string(name) + "'");
}

Posture parse_posture(std::string_view name) {
  if (name == "sitting") return Posture::sitting;
  if (name == "walking") return Posture::walking;
  throw Error(Errc::InvalidArgument, "unknown posture '" + std::string(name) + "'");
}

std::set<int> DatasetManifest::users() const {
  std::set<int> ids;
  for (const auto& e : entries) ids.insert(e.user_id);
  return ids;
}

std::vector<AnnotatedSegment> read_annotations(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  std::vector<AnnotatedSegment> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string start, end, name;
    if (!std::getline(fields, start, '\t') || !std::getline(fields, end, '\t') ||
        !std::getline(fields, name)) {
      throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": expected 3 fields");
    }
    auto label = parse_label(name);
    if (!label) throw Error(Errc::InvalidArgument, "unknown label '" + name + "'");
    AnnotatedSegment seg{std::stod(start), std::stod(end), *label};
    if (!(seg.start_s >= 0.0 && seg.end_s > seg.start_s)) {
      throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(lineno) + ": empty segment");
    }
    out.push_back(seg);
  }
  return out;
}

void write_annotations(const std::filesystem::path& path, std::span<const AnnotatedSegment> segments) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out.precision(6);
  out << std::fixed;
  for (const auto& s : segments) out << s.start_s << '\t' << s.end_s << '\t' << to_string(s.label) << '\n';
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

DatasetManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot open " + path.string());
  nlohmann::json j;
  try {
    in >> j;
    DatasetManifest m;
    m.format_version = j.at("format_version").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.wav_path = e.at("wav_path").get<std::string>();
      entry.annotation_path = e.at("annotation_path").get<std::string>();
      entry.user_id = e.at("user_id").get<int>();
      entry.environment = parse_environment(e.at("environment").get<std::string>());
      entry.posture = parse_posture(e.at("posture").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
    return m;
  } catch (const nlohmann::json::exception& ex) {
    throw Error(Errc::InvalidArgument, path.string() + ": " + ex.what());
  }
}

void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest) {
  nlohmann::json j;
  j["format_version"] = manifest.format_version;
  j["seed"] = manifest.seed;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : manifest.entries) {
    j["entries"].push_back({{"wav_path", e.wav_path},
                            {"annotation_path", e.annotation_path},
                            {"user_id", e.user_id},
                            {"environment", std::string(to_string(e.environment))},
                            {"posture", std::string(to_string(e.posture))}});
  }
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot create " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(Errc::IoFailure, "short write to " + path.string());
}

}  // namespace earcough::synth
