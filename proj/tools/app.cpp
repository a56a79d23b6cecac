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

#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include "earcough/augment.hpp"
#include "earcough/config.hpp"
#include "earcough/dsp.hpp"
#include "earcough/error.hpp"
#include "earcough/evalkit.hpp"
#include "earcough/nn.hpp"
#include "earcough/pipeline.hpp"
#include "earcough/stream.hpp"
#include "earcough/synth.hpp"
#include "earcough/train.hpp"

namespace earcough::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

const std::vector<int> kRates = {8000, 16000, 24000, 48000};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<int> parse_users(const std::string& text) {
  std::vector<int> users;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    users.push_back(static_cast<int>(config::to_int("users", item)));
  }
  return users;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw Error(Errc::IoFailure, "write failed for " + path.string());
}

void write_run_config(const fs::path& dir, const std::string& subcommand, const json& options) {
  json j;
  j["subcommand"] = subcommand;
  j["options"] = options;
  write_text(dir / "run_config.json", j.dump(2) + "\n");
}

// Options shared by train / eval / ablate.
struct DataOptions {
  std::string manifest;
  std::string train_users = "1,2,3,4,5,6";
  std::string val_users = "7,8";
  std::string test_users = "9,10";

  pipeline::SplitConfig split() const {
    pipeline::SplitConfig s;
    s.train_users = parse_users(train_users);
    s.val_users = parse_users(val_users);
    s.test_users = parse_users(test_users);
    return s;
  }
};

struct TrainOptions {
  DataOptions data;
  int rate = 8000;
  std::string out;
  std::string history;
  std::string checkpoints;
  std::string plan;
  std::string noise_dir;
  bool no_augment = false;
  std::string optimizer = "adam";
  pipeline::TrainConfig cfg;
};

struct Globals {
  int jobs = 1;
  std::string config_path;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--manifest", d.manifest, "Dataset manifest.json")->required()->check(CLI::ExistingFile);
  cmd->add_option("--train-users", d.train_users, "Comma-separated training user ids")->capture_default_str();
  cmd->add_option("--val-users", d.val_users, "Comma-separated validation user ids")->capture_default_str();
  cmd->add_option("--test-users", d.test_users, "Comma-separated test user ids")->capture_default_str();
}

void add_train_options(CLI::App* cmd, TrainOptions& t) {
  add_data_options(cmd, t.data);
  cmd->add_option("--rate", t.rate, "Model sample rate (Hz)")->check(CLI::IsMember(kRates))->capture_default_str();
  cmd->add_option("--epochs", t.cfg.epochs_max, "Maximum epochs")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--batch-size", t.cfg.batch_size, "Minibatch size")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--lr", t.cfg.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--optimizer", t.optimizer, "sgd | momentum | adam")
      ->check(CLI::IsMember({"sgd", "momentum", "adam"}))
      ->capture_default_str();
  cmd->add_option("--patience", t.cfg.early_stop_patience, "Early-stopping patience (epochs)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--seed", t.cfg.seed, "Initialization, shuffling and augmentation seed")->capture_default_str();
  cmd->add_flag("--class-weighting", t.cfg.class_weighting, "Inverse-frequency loss weights");
  cmd->add_option("--windows-per-epoch", t.cfg.windows_per_epoch, "Windows sampled per epoch (0 = all)")
      ->capture_default_str();
  cmd->add_option("--threshold", t.cfg.threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  cmd->add_option("--plan", t.plan, "Augmentation plan file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option("--noise-dir", t.noise_dir, "Directory of background WAV clips for augmentation");
  cmd->add_flag("--no-augment", t.no_augment, "Train on the original windows only");
}

// Values from --config apply where the corresponding flag was not given.
void apply_config_file(const std::string& path, CLI::App* cmd, TrainOptions& t) {
  const config::KeyValues kv = path.empty() ? config::KeyValues{} : config::load(path);
  const auto given = [cmd](const char* flag) { return cmd->count(flag) > 0; };
  const std::map<std::string, std::pair<const char*, std::function<void(const std::string&, const std::string&)>>>
      table = {
          {"rate", {"--rate", [&](auto& k, auto& v) { t.rate = static_cast<int>(config::to_int(k, v)); }}},
          {"epochs_max", {"--epochs", [&](auto& k, auto& v) { t.cfg.epochs_max = static_cast<int>(config::to_int(k, v)); }}},
          {"batch_size", {"--batch-size", [&](auto& k, auto& v) { t.cfg.batch_size = static_cast<int>(config::to_int(k, v)); }}},
          {"learning_rate", {"--lr", [&](auto& k, auto& v) { t.cfg.learning_rate = config::to_double(k, v); }}},
          {"optimizer", {"--optimizer", [&](auto&, auto& v) { t.optimizer = v; }}},
          {"momentum", {"", [&](auto& k, auto& v) { t.cfg.momentum = config::to_double(k, v); }}},
          {"early_stop_patience",
           {"--patience", [&](auto& k, auto& v) { t.cfg.early_stop_patience = static_cast<int>(config::to_int(k, v)); }}},
          {"seed", {"--seed", [&](auto& k, auto& v) { t.cfg.seed = config::to_uint64(k, v); }}},
          {"class_weighting", {"--class-weighting", [&](auto& k, auto& v) { t.cfg.class_weighting = config::to_bool(k, v); }}},
          {"windows_per_epoch",
           {"--windows-per-epoch", [&](auto& k, auto& v) { t.cfg.windows_per_epoch = static_cast<std::size_t>(config::to_int(k, v)); }}},
          {"threshold", {"--threshold", [&](auto& k, auto& v) { t.cfg.threshold = config::to_double(k, v); }}},
          {"augment", {"--no-augment", [&](auto& k, auto& v) { t.no_augment = !config::to_bool(k, v); }}},
          {"train_users", {"--train-users", [&](auto&, auto& v) { t.data.train_users = v; }}},
          {"val_users", {"--val-users", [&](auto&, auto& v) { t.data.val_users = v; }}},
          {"test_users", {"--test-users", [&](auto&, auto& v) { t.data.test_users = v; }}},
      };
  for (const auto& [key, value] : kv) {
    const auto it = table.find(key);
    if (it == table.end()) throw UsageError("unknown config key '" + key + "' in " + path);
    const char* flag = it->second.first;
    if (*flag != '\0' && given(flag)) continue;
    it->second.second(key, value);
  }
  try {
    t.cfg.optimizer = pipeline::parse_optimizer(t.optimizer);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (std::find(kRates.begin(), kRates.end(), t.rate) == kRates.end()) {
    throw UsageError("config rate " + std::to_string(t.rate) + " is not one of 8000, 16000, 24000, 48000");
  }
}

json train_options_json(const TrainOptions& t, int jobs) {
  const auto& c = t.cfg;
  return {{"manifest", t.data.manifest},
          {"train_users", t.data.train_users},
          {"val_users", t.data.val_users},
          {"test_users", t.data.test_users},
          {"rate", t.rate},
          {"epochs_max", c.epochs_max},
          {"batch_size", c.batch_size},
          {"learning_rate", c.learning_rate},
          {"optimizer", std::string(pipeline::to_string(c.optimizer))},
          {"momentum", c.momentum},
          {"early_stop_patience", c.early_stop_patience},
          {"seed", c.seed},
          {"class_weighting", c.class_weighting},
          {"windows_per_epoch", c.windows_per_epoch},
          {"threshold", c.threshold},
          {"augment", !t.no_augment},
          {"plan", t.plan},
          {"noise_dir", t.noise_dir},
          {"jobs", jobs}};
}

struct TrainingInputs {
  augment::AugmentPlan plan;
  std::vector<DualChannelWindow> noise_pool;
};

TrainingInputs training_inputs(const TrainOptions& t) {
  TrainingInputs in;
  in.plan = t.plan.empty() ? augment::AugmentPlan{} : augment::load_plan(t.plan);
  if (t.plan.empty()) in.plan.seed = t.cfg.seed;
  if (t.no_augment) return in;
  fs::path noise = t.noise_dir;
  if (noise.empty()) {
    const fs::path beside = fs::path(t.data.manifest).parent_path() / "noise";
    if (fs::is_directory(beside)) noise = beside;
  }
  in.noise_pool = noise.empty() ? synth::synth_noise_pool(64, t.rate, t.cfg.seed)
                                : augment::load_noise_pool(noise, t.rate);
  return in;
}

void progress(std::ostream& err, const pipeline::EpochRecord& r) {
  char line[128];
  std::snprintf(line, sizeof(line), "epoch %3d  loss %.4f  val_acc1 %.4f  val_f1_1 %.4f\n", r.epoch, r.train_loss,
                r.val_acc1, r.val_f1_1);
  err << line << std::flush;
}

int cmd_synth(const fs::path& out_dir, synth::SynthConfig cfg, int pool_clips, std::ostream& out) {
  const synth::DatasetManifest manifest = synth::generate_dataset(cfg, out_dir);
  const auto pool = synth::synth_noise_pool(pool_clips, cfg.sample_rate_hz, cfg.seed, cfg.channel);
  synth::write_noise_pool(out_dir / "noise", pool);
  write_run_config(out_dir, "synth",
                   {{"out", out_dir.string()},
                    {"users", cfg.n_users},
                    {"seed", cfg.seed},
                    {"rate", cfg.sample_rate_hz},
                    {"activity_time_scale", cfg.activity_time_scale},
                    {"noise_clips", pool_clips},
                    {"recordings", manifest.entries.size()}});
  out << (out_dir / "manifest.json").string() << "\n";
  return kExitOk;
}

int cmd_train(const TrainOptions& t, int jobs, std::ostream& out, std::ostream& err) {
  const fs::path model_path = t.out;
  const fs::path out_dir = model_path.has_parent_path() ? model_path.parent_path() : fs::path(".");
  fs::create_directories(out_dir);
  pipeline::TrainConfig cfg = t.cfg;
  cfg.jobs = jobs;
  cfg.checkpoint_dir = t.checkpoints;
  if (!cfg.checkpoint_dir.empty()) fs::create_directories(cfg.checkpoint_dir);
  cfg.on_epoch = [&err](const pipeline::EpochRecord& r) { progress(err, r); };

  const pipeline::DatasetSplits splits = pipeline::split_by_user(t.data.manifest, t.data.split(), t.rate, jobs);
  const TrainingInputs in = training_inputs(t);
  const nn::ModelSpec spec = nn::default_spec(t.rate);
  const pipeline::TrainResult r =
      pipeline::train(splits.train, splits.val, spec, cfg, t.no_augment ? nullptr : &in.plan, in.noise_pool);
  nn::save_model(model_path, spec, r.params);
  const fs::path history = t.history.empty() ? fs::path(model_path.string() + ".history.csv") : fs::path(t.history);
  pipeline::write_history(history, r.history);
  json opts = train_options_json(t, jobs);
  opts["out"] = t.out;
  opts["history"] = history.string();
  opts["best_epoch"] = r.best_epoch;
  opts["epochs_run"] = r.history.size();
  write_run_config(out_dir, "train", opts);
  out << model_path.string() << "\n";
  return kExitOk;
}

int cmd_eval(const DataOptions& d, const std::string& model_path, const std::string& out_dir, double threshold,
             int jobs, std::ostream& out) {
  const nn::StoredModel m = nn::load_model(model_path);
  pipeline::SplitConfig split = d.split();
  split.validate();
  const auto test = pipeline::load_labeled_windows(d.manifest, m.spec.sample_rate_hz, split.test_users, jobs);
  const evalkit::MetricsReport report = evalkit::evaluate(m.spec, m.params, test, threshold, jobs);
  const std::string table = evalkit::format_table(report, "test users " + d.test_users);
  fs::create_directories(out_dir);
  write_text(fs::path(out_dir) / "metrics.json", evalkit::to_json(report));
  write_text(fs::path(out_dir) / "metrics.txt", table);
  write_run_config(out_dir, "eval",
                   {{"manifest", d.manifest},
                    {"model", model_path},
                    {"test_users", d.test_users},
                    {"threshold", threshold},
                    {"jobs", jobs}});
  out << table;
  return kExitOk;
}

int cmd_ablate(const TrainOptions& t, const std::string& out_dir, int jobs, std::ostream& out, std::ostream& err) {
  pipeline::TrainConfig cfg = t.cfg;
  cfg.jobs = jobs;
  cfg.on_epoch = [&err](const pipeline::EpochRecord& r) { progress(err, r); };
  const pipeline::DatasetSplits splits = pipeline::split_by_user(t.data.manifest, t.data.split(), t.rate, jobs);
  const TrainingInputs in = training_inputs(t);
  const nn::ModelSpec spec = nn::default_spec(t.rate);
  const auto results =
      evalkit::ablation(splits, spec, cfg, t.no_augment ? nullptr : &in.plan, in.noise_pool, cfg.threshold);
  json j = json::array();
  for (const auto& r : results) {
    j.push_back({{"input", std::string(evalkit::to_string(r.mode))},
                 {"best_epoch", r.training.best_epoch},
                 {"metrics", json::parse(evalkit::to_json(r.report))}});
  }
  fs::create_directories(out_dir);
  const std::string table = evalkit::ablation_table(results);
  write_text(fs::path(out_dir) / "ablation.json", j.dump(2) + "\n");
  write_text(fs::path(out_dir) / "ablation.txt", table);
  json opts = train_options_json(t, jobs);
  opts["out"] = out_dir;
  write_run_config(out_dir, "ablate", opts);
  out << table;
  return kExitOk;
}

int cmd_profile(const std::vector<int>& rates, const std::string& out_path, std::ostream& out) {
  const std::string csv = evalkit::resource_csv(evalkit::resource_table(rates));
  if (!out_path.empty()) {
    write_text(out_path, csv);
    const fs::path p(out_path);
    write_run_config(p.has_parent_path() ? p.parent_path() : fs::path("."), "profile",
                     {{"rates", rates}, {"out", out_path}});
  }
  out << csv;
  return kExitOk;
}

int cmd_detect(const std::string& wav_path, const std::string& model_path, const std::string& out_path,
               double threshold, int gap, std::ostream& out) {
  const nn::StoredModel m = nn::load_model(model_path);
  DualChannelRecording rec = dsp::load_recording(wav_path);
  if (rec.sample_rate_hz != m.spec.sample_rate_hz) rec = dsp::decimate(rec, m.spec.sample_rate_hz);
  const auto events = stream::detect(m.spec, m.params, rec, threshold, gap);
  const std::string nd = stream::to_ndjson(events);
  if (out_path.empty()) {
    out << nd;
  } else {
    write_text(out_path, nd);
    const fs::path p(out_path);
    write_run_config(p.has_parent_path() ? p.parent_path() : fs::path("."), "detect",
                     {{"wav", wav_path}, {"model", model_path}, {"threshold", threshold}, {"gap_tolerance", gap}});
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Subject-aware cough detection from dual ANC microphones"};
  app.name("earcough");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--config", g.config_path, "key = value overrides for train/ablate")->check(CLI::ExistingFile);
  app.fallthrough();

  synth::SynthConfig synth_cfg;
  std::string synth_out;
  int pool_clips = 64;
  auto* synth_cmd = app.add_subcommand("synth", "Generate the synthetic dual-channel dataset");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--users", synth_cfg.n_users, "Number of users")->check(CLI::Range(1, 1000))->capture_default_str();
  synth_cmd->add_option("--seed", synth_cfg.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--rate", synth_cfg.sample_rate_hz, "Recording rate (Hz)")
      ->check(CLI::IsMember(kRates))
      ->capture_default_str();
  synth_cmd->add_option("--activity-scale", synth_cfg.activity_time_scale, "Duration scale for long activities")
      ->check(CLI::Range(0.01, 1.0))
      ->capture_default_str();
  synth_cmd->add_option("--noise-clips", pool_clips, "Background clips written to <out>/noise")
      ->check(CLI::Range(1, 100000))
      ->capture_default_str();

  TrainOptions train_opts;
  auto* train_cmd = app.add_subcommand("train", "Train a model on the training users");
  add_train_options(train_cmd, train_opts);
  train_cmd->add_option("--out", train_opts.out, "Output model file (ECN1)")->required();
  train_cmd->add_option("--history", train_opts.history, "History CSV (default <out>.history.csv)");
  train_cmd->add_option("--checkpoints", train_opts.checkpoints, "Directory for per-epoch checkpoints");

  DataOptions eval_data;
  std::string eval_model, eval_out;
  double eval_threshold = 0.5;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a model on the test users");
  add_data_options(eval_cmd, eval_data);
  eval_cmd->add_option("--model", eval_model, "Model file (ECN1)")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", eval_out, "Output directory")->required();
  eval_cmd->add_option("--threshold", eval_threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();

  TrainOptions ablate_opts;
  std::string ablate_out;
  auto* ablate_cmd = app.add_subcommand("ablate", "Dual- vs. single-channel ablation");
  add_train_options(ablate_cmd, ablate_opts);
  ablate_cmd->add_option("--out", ablate_out, "Output directory")->required();

  std::vector<int> profile_rates = kRates;
  std::string profile_out;
  auto* profile_cmd = app.add_subcommand("profile", "FLOPs and space of the default models");
  profile_cmd->add_option("--rates", profile_rates, "Sample rates (Hz)")->check(CLI::IsMember(kRates))->delimiter(',');
  profile_cmd->add_option("--out", profile_out, "CSV output path");

  std::string detect_wav, detect_model, detect_out;
  double detect_threshold = 0.5;
  int detect_gap = 0;
  auto* detect_cmd = app.add_subcommand("detect", "Cough events in a recording as NDJSON");
  detect_cmd->add_option("--wav", detect_wav, "Stereo WAV (feed-forward, feedback)")->required()->check(CLI::ExistingFile);
  detect_cmd->add_option("--model", detect_model, "Model file (ECN1)")->required()->check(CLI::ExistingFile);
  detect_cmd->add_option("--out", detect_out, "NDJSON output path (default stdout)");
  detect_cmd->add_option("--threshold", detect_threshold, "Decision threshold")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  detect_cmd->add_option("--gap", detect_gap, "Negative windows tolerated inside an event")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    if (*train_cmd) apply_config_file(g.config_path, train_cmd, train_opts);
    if (*ablate_cmd) apply_config_file(g.config_path, ablate_cmd, ablate_opts);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (*synth_cmd) return cmd_synth(synth_out, synth_cfg, pool_clips, out);
    if (*train_cmd) return cmd_train(train_opts, g.jobs, out, err);
    if (*eval_cmd) return cmd_eval(eval_data, eval_model, eval_out, eval_threshold, g.jobs, out);
    if (*ablate_cmd) return cmd_ablate(ablate_opts, ablate_out, g.jobs, out, err);
    if (*profile_cmd) return cmd_profile(profile_rates, profile_out, out);
    if (*detect_cmd) return cmd_detect(detect_wav, detect_model, detect_out, detect_threshold, detect_gap, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace earcough::app
