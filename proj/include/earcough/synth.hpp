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

#ifndef EARCOUGH_SYNTH_HPP_
#define EARCOUGH_SYNTH_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earcough/audio.hpp"
#include "earcough/random.hpp"

namespace earcough::synth {

enum class EventLabel {
  single_cough_sitting,
  continuous_cough_sitting,
  bite_apple,
  sip_water,
  laughing,
  reading,
  head_movement,
  walking,
  single_cough_walking,
  continuous_cough_walking,
  environmental_cough,
  background_noise,
};

inline constexpr int kEventLabelCount = 12;

std::string_view to_string(EventLabel label);
std::optional<EventLabel> parse_label(std::string_view name);

/// Coughs produced by the wearer.
bool is_subject_cough(EventLabel label);

struct AnnotatedSegment {
  double start_s = 0.0;
  double end_s = 0.0;
  EventLabel label = EventLabel::background_noise;

  double duration_s() const { return end_s - start_s; }
  bool operator==(const AnnotatedSegment&) const = default;
};

/// Tab-separated `start_s<TAB>end_s<TAB>label`, one segment per line.
std::vector<AnnotatedSegment> read_annotations(const std::filesystem::path& path);
void write_annotations(const std::filesystem::path& path, std::span<const AnnotatedSegment> segments);

enum class Environment { quiet, noisy, env_cough };
enum class Posture { sitting, walking };

std::string_view to_string(Environment env);
std::string_view to_string(Posture posture);
Environment parse_environment(std::string_view name);
Posture parse_posture(std::string_view name);

struct ManifestEntry {
  std::string wav_path;         // relative to the manifest's directory
  std::string annotation_path;  // relative to the manifest's directory
  int user_id = 0;
  Environment environment = Environment::quiet;
  Posture posture = Posture::sitting;

  bool operator==(const ManifestEntry&) const = default;
};

struct DatasetManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t seed = 0;
  int format_version = 1;

  std::set<int> users() const;
  bool operator==(const DatasetManifest&) const = default;
};

DatasetManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const DatasetManifest& manifest);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Acoustic surrogate for the two ANC microphones. Sounds produced by the
/// wearer reach the in-ear (feedback) microphone through the body with a
/// low-frequency emphasis; external sounds reach it through the ear seal,
/// attenuated and low-passed.
struct ChannelModel {
  double subject_fb_gain_db = 6.0;
  double subject_lowshelf_hz = 800.0;
  double subject_lowshelf_db = 6.0;
  Interval env_isolation_db{15.0, 30.0};
  double env_lowpass_hz = 1000.0;
  int env_lowpass_order = 2;
  Interval env_distance_db{-8.0, -2.0};
  int env_delay_max_samples_48k = 8;

  /// Throws Error{InvalidArgument} if the isolation lower bound is < 10 dB.
  void validate() const;
};

/// Band-limited (350 Hz - 4 kHz) burst with a sharp attack, exponential decay
/// and a weaker voiced tail. Peak amplitude lies in [0.3, 0.9].
MonoSignal synth_cough(double duration_s, int rate_hz, Rng& rng);

/// Channel 0 = mono; channel 1 = mono with the body-conduction gain and
/// low-shelf boost, no inter-channel delay.
DualSignal render_subject(const MonoSignal& mono, int rate_hz, const ChannelModel& model, Rng& rng);

struct EnvironmentRender {
  DualSignal signal;
  double isolation_db = 0.0;  // effective attenuation of cough-band material
  int delay_samples = 0;
};

/// Channel 0 = mono at a distance-attenuated level; channel 1 = channel 0
/// attenuated by an isolation draw (calibrated over the cough band),
/// low-passed and delayed.
EnvironmentRender render_environment(const MonoSignal& mono, int rate_hz, const ChannelModel& model,
                                     Rng& rng);

struct SynthConfig {
  int n_users = 10;
  std::uint64_t seed = 7;
  int sample_rate_hz = 48000;
  /// Scales the long non-cough activities (eating, reading, head movement,
  /// walking) so a ten-user set stays desk-sized. Cough durations are never
  /// scaled.
  double activity_time_scale = 0.2;
  ChannelModel channel;
};

/// One rendered recording: the audio plus its ground-truth segments.
struct RenderedRecording {
  DualChannelRecording recording;
  std::vector<AnnotatedSegment> annotations;
  Posture posture = Posture::sitting;
};

/// Activity groups recorded per user and environment.
inline constexpr int kGroupCount = 10;
std::string_view group_name(int group);

/// Event layout of one recording, without audio.
struct GroupTimeline {
  double length_s = 0.0;
  Posture posture = Posture::sitting;
  std::vector<AnnotatedSegment> events;         // wearer activity
  std::vector<AnnotatedSegment> environmental;  // environmental coughs
};

GroupTimeline group_timeline(const SynthConfig& config, int user, Environment env, int group);

/// Renders group `group` of `user` in `env`. Deterministic in
/// (config.seed, user, env, group).
RenderedRecording render_group(const SynthConfig& config, int user, Environment env, int group);

/// Writes `<out_dir>/manifest.json`, one WAV (48 kHz stereo, 16-bit) and one
/// annotation file per (user, environment, group). Users are numbered from 1.
/// Throws Error{IoFailure}.
DatasetManifest generate_dataset(const SynthConfig& config, const std::filesystem::path& out_dir);

/// Environmental background clips for the mixing stage of augmentation.
std::vector<DualChannelWindow> synth_noise_pool(int count, int rate_hz, std::uint64_t seed,
                                                const ChannelModel& model = {});
void write_noise_pool(const std::filesystem::path& dir, std::span<const DualChannelWindow> clips);

/// A quiet-room recording with `n_coughs` well-separated wearer coughs and
/// some unrelated activity in between.
RenderedRecording render_cough_demo(double duration_s, int n_coughs, int rate_hz, std::uint64_t seed,
                                    const ChannelModel& model = {});

}  // namespace earcough::synth

#endif  // EARCOUGH_SYNTH_HPP_
