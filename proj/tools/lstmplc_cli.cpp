// Copyright 2026 The lstmplc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: pretrain, conceal, evaluate and sweep.
//
// Exit codes: 0 success, 1 sweep finished with failed points, 2 configuration
// or usage error, 3 I/O error, 4 numerical abort during online training,
// 5 corrupt checkpoint or unsupported file format/version, 6 internal error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lstmplc/lstmplc.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSweepFailures = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumerical = 4;
constexpr int kExitData = 5;
constexpr int kExitInternal = 6;

struct CliError : std::runtime_error {
  CliError(int code, const std::string& what) : std::runtime_error(what), exit_code(code) {}
  int exit_code;
};

int exit_code_for(plc_status s) {
  switch (s) {
    case PLC_OK: return kExitOk;
    case PLC_ERR_ARGUMENT:
    case PLC_ERR_CONFIG: return kExitConfig;
    case PLC_ERR_IO: return kExitIo;
    case PLC_ERR_NUMERICAL: return kExitNumerical;
    case PLC_ERR_INTEGRITY:
    case PLC_ERR_VERSION:
    case PLC_ERR_FORMAT: return kExitData;
    case PLC_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

void check(plc_status s) {
  if (s != PLC_OK) throw CliError(exit_code_for(s), std::string(plc_status_string(s)) + ": " + plc_last_error());
}

struct ConfigDeleter { void operator()(plc_config* p) const { plc_config_destroy(p); } };
struct AudioDeleter { void operator()(plc_audio* p) const { plc_audio_destroy(p); } };
struct SessionDeleter { void operator()(plc_session* p) const { plc_session_destroy(p); } };
using ConfigPtr = std::unique_ptr<plc_config, ConfigDeleter>;
using AudioPtr = std::unique_ptr<plc_audio, AudioDeleter>;
using SessionPtr = std::unique_ptr<plc_session, SessionDeleter>;

std::string take_string(char* s) {
  std::string out(s ? s : "");
  plc_string_free(s);
  return out;
}

AudioPtr read_audio(const fs::path& p) {
  plc_audio* a = nullptr;
  check(plc_audio_read_wav(p.string().c_str(), &a));
  return AudioPtr(a);
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw CliError(kExitIo, "cannot open '" + p.string() + "' for writing");
  out << text;
  if (!out) throw CliError(kExitIo, "write failed for '" + p.string() + "'");
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw CliError(kExitIo, "cannot open '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw CliError(kExitConfig, p.string() + ": " + e.what());
  }
}

// --- run configuration ------------------------------------------------------

// Everything outside the predictor configuration.
struct RunOptions {
  double loss_rate = 0.1;
  std::string pattern = "even";
  std::optional<std::uint64_t> loss_seed;  // defaults to the model seed
  std::int64_t loss_offset = -1;
  std::string method = "lstm";
  std::size_t score_from_frame = 0;
};

const std::vector<std::string> kRunKeys = {"loss_rate", "pattern", "loss_seed", "loss_offset", "method",
                                           "score_from_frame"};

struct PredictorFlags {
  std::optional<int> frame_len, window, timesteps, hidden, layers, passes;
  std::optional<std::uint32_t> sample_rate;
  std::optional<double> alpha, clip_norm, init_bound;
  bool no_clip = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> rollout, supervision, precision;
};

void add_predictor_flags(CLI::App* cmd, PredictorFlags& f) {
  cmd->add_option("--frame-len", f.frame_len, "Samples per frame N (default 80)");
  cmd->add_option("--window", f.window, "Sliding window length L (default 80)");
  cmd->add_option("--timesteps", f.timesteps, "Time steps T per sequence (default 160)");
  cmd->add_option("--hidden", f.hidden, "Neurons per layer H (default 80)");
  cmd->add_option("--layers", f.layers, "Number of LSTM layers (default 1)");
  cmd->add_option("--passes", f.passes, "Online training passes P per received frame (default 20)");
  cmd->add_option("--sample-rate", f.sample_rate, "Expected sample rate in Hz (default 8000)");
  cmd->add_option("--alpha", f.alpha, "Adam learning rate (default 1e-3)");
  cmd->add_option("--clip-norm", f.clip_norm, "Online gradient clip threshold (default 1.0)");
  cmd->add_flag("--no-clip", f.no_clip, "Disable online gradient clipping");
  cmd->add_option("--init-bound", f.init_bound, "Uniform init bound; <= 0 uses 1/sqrt(fan_in)");
  cmd->add_option("--seed", f.seed, "Model seed (default 1)");
  cmd->add_option("--rollout", f.rollout, "Lost-frame rollout: carried|fresh");
  cmd->add_option("--supervision", f.supervision, "Training targets: final|all");
  cmd->add_option("--precision", f.precision, "Scalar precision: f32|f64");
}

void add_run_flags(CLI::App* cmd, RunOptions& run, std::optional<double>& rate, std::optional<std::string>& pattern,
                   std::optional<std::uint64_t>& loss_seed) {
  (void)run;
  cmd->add_option("--loss-rate", rate, "Packet loss rate in [0, 1) (default 0.1)");
  cmd->add_option("--pattern", pattern, "Loss pattern: even|random (default even)");
  cmd->add_option("--loss-seed", loss_seed, "Seed for random loss patterns (default: model seed)");
}

// Defaults, then the config file, then explicit flags.
ConfigPtr build_config(const std::string& config_path, const PredictorFlags& f, RunOptions* run) {
  plc_config* raw = nullptr;
  check(plc_config_create(&raw));
  ConfigPtr cfg(raw);
  if (!config_path.empty()) {
    json file = read_json_file(config_path);
    if (!file.is_object()) throw CliError(kExitConfig, config_path + ": configuration must be a JSON object");
    json predictor = json::object();
    for (const auto& [key, value] : file.items()) {
      if (std::find(kRunKeys.begin(), kRunKeys.end(), key) == kRunKeys.end()) {
        predictor[key] = value;
        continue;
      }
      if (run == nullptr) continue;
      try {
        if (key == "loss_rate") run->loss_rate = value.get<double>();
        else if (key == "pattern") run->pattern = value.get<std::string>();
        else if (key == "loss_seed") run->loss_seed = value.get<std::uint64_t>();
        else if (key == "loss_offset") run->loss_offset = value.get<std::int64_t>();
        else if (key == "method") run->method = value.get<std::string>();
        else if (key == "score_from_frame") run->score_from_frame = value.get<std::size_t>();
      } catch (const json::exception& e) {
        throw CliError(kExitConfig, config_path + ": bad value for '" + key + "': " + e.what());
      }
    }
    check(plc_config_merge_json(cfg.get(), predictor.dump().c_str()));
  }
  json overrides = json::object();
  if (f.frame_len) overrides["frame_len"] = *f.frame_len;
  if (f.window) overrides["window"] = *f.window;
  if (f.timesteps) overrides["timesteps"] = *f.timesteps;
  if (f.hidden) overrides["hidden"] = *f.hidden;
  if (f.layers) overrides["layers"] = *f.layers;
  if (f.passes) overrides["passes"] = *f.passes;
  if (f.sample_rate) overrides["sample_rate"] = *f.sample_rate;
  if (f.alpha) overrides["alpha"] = *f.alpha;
  if (f.clip_norm) overrides["clip_norm"] = *f.clip_norm;
  if (f.no_clip) overrides["clip_norm"] = nullptr;
  if (f.init_bound) overrides["init_bound"] = *f.init_bound;
  if (f.seed) overrides["seed"] = *f.seed;
  if (f.rollout) overrides["rollout"] = *f.rollout;
  if (f.supervision) overrides["supervision"] = *f.supervision;
  if (f.precision) overrides["precision"] = *f.precision;
  check(plc_config_merge_json(cfg.get(), overrides.dump().c_str()));
  return cfg;
}

json config_json(const plc_config* cfg) {
  char* s = nullptr;
  check(plc_config_to_json(cfg, &s));
  return json::parse(take_string(s));
}

ConfigPtr clone_with(const plc_config* base, const json& overrides) {
  plc_config* raw = nullptr;
  check(plc_config_clone(base, &raw));
  ConfigPtr cfg(raw);
  check(plc_config_merge_json(cfg.get(), overrides.dump().c_str()));
  return cfg;
}

// --- shared concealment path ------------------------------------------------

struct Concealment {
  AudioPtr reference;  // whole-frame prefix of the input
  AudioPtr output;
  std::vector<std::uint8_t> available;
  std::size_t dropped = 0;
  std::string frame_log;
  bool numerical_abort = false;
  json metrics;
};

std::vector<std::uint8_t> make_pattern(std::size_t frames, const RunOptions& run, std::uint64_t model_seed) {
  if (run.pattern != "even" && run.pattern != "random") {
    throw CliError(kExitConfig, "unknown loss pattern '" + run.pattern + "' (expected even|random)");
  }
  std::vector<std::uint8_t> available(frames, 1);
  if (frames == 0) return available;
  check(plc_loss_pattern(frames, run.loss_rate, run.pattern == "even" ? PLC_LOSS_EVEN : PLC_LOSS_RANDOM,
                         run.loss_seed.value_or(model_seed), run.loss_offset, available.data()));
  return available;
}

json pattern_json(const RunOptions& run, std::uint64_t model_seed) {
  return {{"loss_rate", run.loss_rate},
          {"pattern", run.pattern},
          {"loss_seed", run.loss_seed.value_or(model_seed)},
          {"loss_offset", run.loss_offset},
          {"method", run.method},
          {"score_from_frame", run.score_from_frame}};
}

Concealment conceal_audio(const plc_config* cfg, const std::string& checkpoint, const plc_audio* input,
                          const RunOptions& run, json metadata) {
  const json cj = config_json(cfg);
  const auto frame_len = cj.at("frame_len").get<std::size_t>();
  const auto model_seed = cj.at("seed").get<std::uint64_t>();
  if (plc_audio_sample_rate(input) != cj.at("sample_rate").get<std::uint32_t>()) {
    throw CliError(kExitConfig, "input sample rate " + std::to_string(plc_audio_sample_rate(input)) +
                                    " Hz does not match configured " + cj.at("sample_rate").dump() + " Hz");
  }

  Concealment c;
  std::size_t frames = 0;
  check(plc_audio_frame_count(input, frame_len, &frames, &c.dropped));
  if (frames == 0) throw CliError(kExitConfig, "input is shorter than one frame");
  plc_audio* ref = nullptr;
  check(plc_audio_create(plc_audio_samples(input), frames * frame_len, plc_audio_sample_rate(input), &ref));
  c.reference.reset(ref);
  c.available = make_pattern(frames, run, model_seed);

  plc_audio* out = nullptr;
  if (run.method == "lstm") {
    plc_session* raw = nullptr;
    check(plc_session_create(cfg, checkpoint.empty() ? nullptr : checkpoint.c_str(), &raw));
    SessionPtr session(raw);
    check(plc_session_process_stream(session.get(), input, c.available.data(), frames, &out));
    char* log = nullptr;
    check(plc_session_frame_log(session.get(), &log));
    c.frame_log = take_string(log);
    c.numerical_abort = c.frame_log.find("\"abort\"") != std::string::npos;
  } else if (run.method == "zero") {
    check(plc_conceal_zero_fill(input, c.available.data(), frames, frame_len, &out));
  } else if (run.method == "periodic") {
    check(plc_conceal_periodic(input, c.available.data(), frames, frame_len, 0, 0, &out));
  } else {
    throw CliError(kExitConfig, "unknown method '" + run.method + "' (expected lstm|zero|periodic)");
  }
  c.output.reset(out);

  metadata["config"] = cj;
  metadata["seed"] = model_seed;
  metadata["loss"] = pattern_json(run, model_seed);
  metadata["frames"] = frames;
  metadata["dropped_samples"] = c.dropped;
  if (!checkpoint.empty()) metadata["checkpoint"] = checkpoint;
  char* m = nullptr;
  check(plc_metrics(plc_audio_samples(c.reference.get()), plc_audio_samples(c.output.get()), frames * frame_len,
                    c.available.data(), frames, frame_len, run.score_from_frame, metadata.dump().c_str(), &m));
  c.metrics = json::parse(take_string(m));
  return c;
}

void write_audio(const plc_audio* a, const fs::path& p) { check(plc_audio_write_wav(a, p.string().c_str())); }

// --- commands ---------------------------------------------------------------

std::vector<fs::path> list_wavs(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw CliError(kExitIo, "'" + dir.string() + "' is not a directory");
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    auto ext = e.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (e.is_regular_file() && ext == ".wav") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

int cmd_pretrain(const std::string& corpus_dir, const std::string& out_ckpt, const std::string& report_path,
                 const plc_config* cfg) {
  const auto files = list_wavs(corpus_dir);
  if (files.empty()) throw CliError(kExitConfig, "corpus directory '" + corpus_dir + "' contains no WAV files");
  std::vector<std::string> names;
  for (const auto& f : files) names.push_back(f.string());
  std::vector<const char*> ptrs;
  for (const auto& n : names) ptrs.push_back(n.c_str());
  char* report = nullptr;
  check(plc_pretrain(cfg, ptrs.data(), ptrs.size(), out_ckpt.c_str(), &report));
  const json r = json::parse(take_string(report));
  for (const auto& s : r.at("streams")) {
    if (s.contains("skipped")) {
      std::cout << s.at("name").get<std::string>() << "\tskipped: " << s.at("skipped").get<std::string>() << "\n";
    } else {
      std::cout << s.at("name").get<std::string>() << "\tframes=" << s.at("frames") << "\tmean_loss="
                << s.at("mean_loss").get<double>() << "\n";
    }
  }
  for (const auto& u : r.at("unreadable")) {
    std::cerr << "skipped " << u.at("path").get<std::string>() << ": " << u.at("reason").get<std::string>() << "\n";
  }
  if (!report_path.empty()) write_text(report_path, r.dump(2) + "\n");
  std::cout << "wrote " << out_ckpt << " (" << r.at("steps") << " optimizer steps)\n";
  return kExitOk;
}

int cmd_conceal(const std::string& in, const std::string& out, const std::string& checkpoint, std::string metrics_path,
                std::string log_path, const plc_config* cfg, const RunOptions& run) {
  const AudioPtr input = read_audio(in);
  Concealment c = conceal_audio(cfg, checkpoint, input.get(), run, {{"input", in}, {"output", out}});
  write_audio(c.output.get(), out);
  if (metrics_path.empty()) metrics_path = out + ".metrics.json";
  write_text(metrics_path, c.metrics.dump(2) + "\n");
  if (run.method == "lstm") {
    if (log_path.empty()) log_path = out + ".frames.jsonl";
    write_text(log_path, c.frame_log);
  }
  std::cout << "lost_frames=" << c.metrics.at("lost_frames") << " mean_mse=" << c.metrics.at("mean_mse").get<double>()
            << " segmental_snr_db=" << c.metrics.at("segmental_snr_db").get<double>() << "\n";
  if (c.numerical_abort) {
    std::cerr << "warning: online training aborted on at least one frame (see frame log)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_evaluate(const std::string& ref_path, const std::string& test_path, const std::string& metrics_path,
                 const plc_config* cfg, const RunOptions& run) {
  const AudioPtr ref = read_audio(ref_path);
  const AudioPtr test = read_audio(test_path);
  const json cj = config_json(cfg);
  const auto frame_len = cj.at("frame_len").get<std::size_t>();
  std::size_t frames = 0;
  check(plc_audio_frame_count(ref.get(), frame_len, &frames, nullptr));
  if (frames == 0) throw CliError(kExitConfig, "reference is shorter than one frame");
  if (plc_audio_length(test.get()) < frames * frame_len) {
    throw CliError(kExitConfig, "concealed file is shorter than the reference's whole-frame prefix");
  }
  const auto available = make_pattern(frames, run, cj.at("seed").get<std::uint64_t>());
  const json metadata = {{"reference", ref_path},
                         {"concealed", test_path},
                         {"config", cj},
                         {"loss", pattern_json(run, cj.at("seed").get<std::uint64_t>())}};
  char* m = nullptr;
  check(plc_metrics(plc_audio_samples(ref.get()), plc_audio_samples(test.get()), frames * frame_len, available.data(),
                    frames, frame_len, run.score_from_frame, metadata.dump().c_str(), &m));
  const json metrics = json::parse(take_string(m));
  if (!metrics_path.empty()) write_text(metrics_path, metrics.dump(2) + "\n");
  std::cout << "lost_frames=" << metrics.at("lost_frames") << " mean_mse=" << metrics.at("mean_mse").get<double>()
            << " segmental_snr_db=" << metrics.at("segmental_snr_db").get<double>() << "\n";
  return kExitOk;
}

// --- sweep ------------------------------------------------------------------

struct SweepPoint {
  int layers, passes, hidden, timesteps;
  std::string key() const {
    return "l" + std::to_string(layers) + "_p" + std::to_string(passes) + "_h" + std::to_string(hidden) + "_t" +
           std::to_string(timesteps);
  }
};

struct PointResult {
  bool ok = false;
  std::string error;
  json summary;
};

// Pools lost frames across files.
json pool_reports(const std::vector<json>& reports) {
  double mse = 0, snr = 0;
  std::size_t lost = 0, snr_frames = 0;
  for (const auto& r : reports) {
    for (const auto& f : r.at("frames")) {
      mse += f.at("mse").get<double>();
      ++lost;
      if (!f.at("silent").get<bool>()) {
        snr += f.at("snr_db").get<double>();
        ++snr_frames;
      }
    }
  }
  return {{"lost_frames", lost},
          {"mean_mse", lost ? mse / static_cast<double>(lost) : 0.0},
          {"segmental_snr_db", snr_frames ? snr / static_cast<double>(snr_frames) : 0.0},
          {"snr_frames", snr_frames}};
}

PointResult run_point(const SweepPoint& pt, const plc_config* base, const std::vector<fs::path>& inputs,
                      const std::vector<AudioPtr>& audio, const std::string& checkpoint, const RunOptions& run,
                      const fs::path& dir) {
  PointResult res;
  try {
    const ConfigPtr cfg = clone_with(base, {{"layers", pt.layers},
                                            {"passes", pt.passes},
                                            {"hidden", pt.hidden},
                                            {"window", pt.hidden},
                                            {"timesteps", pt.timesteps}});
    fs::create_directories(dir);
    std::vector<json> reports;
    json files = json::array();
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      Concealment c = conceal_audio(cfg.get(), checkpoint, audio[i].get(), run, {{"input", inputs[i].string()}});
      write_audio(c.output.get(), dir / inputs[i].filename());
      write_text(dir / (inputs[i].stem().string() + ".frames.jsonl"), c.frame_log);
      files.push_back({{"input", inputs[i].string()}, {"report", c.metrics}});
      reports.push_back(c.metrics);
    }
    res.summary = pool_reports(reports);
    res.summary["point"] = {{"layers", pt.layers}, {"passes", pt.passes}, {"hidden", pt.hidden},
                            {"window", pt.hidden}, {"timesteps", pt.timesteps}};
    const json doc = {{"summary", res.summary}, {"config", config_json(cfg.get())}, {"files", files}};
    write_text(dir / "metrics.json", doc.dump(2) + "\n");
    write_text(dir / ".done", "");
    res.ok = true;
  } catch (const std::exception& e) {
    res.error = e.what();
  }
  return res;
}

std::vector<int> parse_axis(const std::vector<int>& given, int fallback) {
  return given.empty() ? std::vector<int>{fallback} : given;
}

int cmd_sweep(const std::vector<std::string>& in_files, const std::string& in_dir, const std::string& grid_path,
              std::vector<int> layers, std::vector<int> passes, std::vector<int> hidden, std::vector<int> timesteps,
              const std::string& out_dir, const std::string& checkpoint, unsigned jobs, const plc_config* base,
              const RunOptions& run) {
  std::vector<fs::path> inputs(in_files.begin(), in_files.end());
  if (!in_dir.empty()) {
    for (auto& p : list_wavs(in_dir)) inputs.push_back(std::move(p));
  }
  if (inputs.empty()) throw CliError(kExitConfig, "sweep needs at least one input (--in or --input-dir)");
  if (!grid_path.empty()) {
    const json grid = read_json_file(grid_path);
    auto axis = [&](const char* name, std::vector<int>& dst) {
      if (grid.contains(name)) dst = grid.at(name).get<std::vector<int>>();
    };
    axis("layers", layers);
    axis("passes", passes);
    axis("hidden", hidden);
    axis("timesteps", timesteps);
  }
  const json cj = config_json(base);
  layers = parse_axis(layers, cj.at("layers").get<int>());
  passes = parse_axis(passes, cj.at("passes").get<int>());
  hidden = parse_axis(hidden, cj.at("hidden").get<int>());
  timesteps = parse_axis(timesteps, cj.at("timesteps").get<int>());

  std::vector<SweepPoint> points;
  for (int l : layers)
    for (int p : passes)
      for (int h : hidden)
        for (int t : timesteps) points.push_back({l, p, h, t});

  std::vector<AudioPtr> audio;
  for (const auto& p : inputs) audio.push_back(read_audio(p));
  const fs::path out(out_dir);
  fs::create_directories(out);

  // Reference conditions, computed once per input.
  {
    std::ostringstream table;
    table << "method\tlost_frames\tmean_mse\tsegmental_snr_db\n";
    for (const char* method : {"zero", "periodic"}) {
      RunOptions r = run;
      r.method = method;
      std::vector<json> reports;
      for (std::size_t i = 0; i < inputs.size(); ++i) {
        reports.push_back(conceal_audio(base, "", audio[i].get(), r, {{"input", inputs[i].string()}}).metrics);
      }
      const json pooled = pool_reports(reports);
      table << method << '\t' << pooled.at("lost_frames") << '\t' << pooled.at("mean_mse").get<double>() << '\t'
            << pooled.at("segmental_snr_db").get<double>() << '\n';
    }
    write_text(out / "baselines.tsv", table.str());
  }

  std::vector<PointResult> results(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex print_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) {
      const fs::path dir = out / ("point_" + points[i].key());
      if (fs::exists(dir / ".done")) {
        try {
          results[i].summary = read_json_file(dir / "metrics.json").at("summary");
          results[i].ok = true;
          std::lock_guard<std::mutex> lock(print_mutex);
          std::cout << "skip " << points[i].key() << " (completed)\n";
          continue;
        } catch (const std::exception&) {
          // Unreadable marker contents: recompute.
        }
      }
      results[i] = run_point(points[i], base, inputs, audio, checkpoint, run, dir);
      std::lock_guard<std::mutex> lock(print_mutex);
      if (results[i].ok) {
        std::cout << "done " << points[i].key() << " segmental_snr_db="
                  << results[i].summary.at("segmental_snr_db").get<double>() << "\n";
      } else {
        std::cerr << "FAILED " << points[i].key() << ": " << results[i].error << "\n";
      }
    }
  };
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(points.size()));
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  std::ostringstream table;
  table << "layers\tpasses\thidden\twindow\ttimesteps\tlost_frames\tmean_mse\tsegmental_snr_db\tstatus\n";
  bool failed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    table << p.layers << '\t' << p.passes << '\t' << p.hidden << '\t' << p.hidden << '\t' << p.timesteps << '\t';
    if (results[i].ok) {
      const json& s = results[i].summary;
      table << s.at("lost_frames") << '\t' << s.at("mean_mse").get<double>() << '\t'
            << s.at("segmental_snr_db").get<double>() << "\tok\n";
    } else {
      failed = true;
      table << "\t\t\tfailed: " << results[i].error << '\n';
    }
  }
  write_text(out / "sweep.tsv", table.str());
  json echo = {{"base_config", cj}, {"loss", pattern_json(run, cj.at("seed").get<std::uint64_t>())}};
  echo["inputs"] = json::array();
  for (const auto& p : inputs) echo["inputs"].push_back(p.string());
  if (!checkpoint.empty()) echo["checkpoint"] = checkpoint;
  write_text(out / "sweep_config.json", echo.dump(2) + "\n");
  return failed ? kExitSweepFailures : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online-adaptive LSTM packet loss concealment"};
  app.require_subcommand(1);
  app.set_version_flag("--version", plc_version());

  PredictorFlags flags;
  RunOptions run;
  std::optional<double> loss_rate;
  std::optional<std::string> pattern;
  std::optional<std::uint64_t> loss_seed;
  std::optional<std::string> method;
  std::optional<std::size_t> score_from;
  std::string config_path;

  auto* pre = app.add_subcommand("pretrain", "One epoch of offline pretraining over a WAV directory");
  std::string corpus_dir, ckpt_out, report_path;
  pre->add_option("--corpus", corpus_dir, "Directory of 8 kHz mono 16-bit WAV files")->required();
  pre->add_option("--out", ckpt_out, "Checkpoint to write")->required();
  pre->add_option("--report", report_path, "Optional JSON report path");
  pre->add_option("--config", config_path, "JSON configuration file");
  add_predictor_flags(pre, flags);

  auto* conceal = app.add_subcommand("conceal", "Simulate packet loss on a WAV file and conceal it");
  std::string in_path, out_path, checkpoint, metrics_path, log_path;
  conceal->add_option("--in", in_path, "Input WAV")->required();
  conceal->add_option("--out", out_path, "Concealed output WAV")->required();
  conceal->add_option("--checkpoint", checkpoint, "Pretrained checkpoint (default: random init)");
  conceal->add_option("--metrics", metrics_path, "Metrics JSON (default: <out>.metrics.json)");
  conceal->add_option("--frame-log", log_path, "Frame log JSONL (default: <out>.frames.jsonl)");
  conceal->add_option("--method", method, "lstm|zero|periodic (default lstm)");
  conceal->add_option("--score-from-frame", score_from, "Only score lost frames at or after this index");
  conceal->add_option("--config", config_path, "JSON configuration file");
  add_predictor_flags(conceal, flags);
  add_run_flags(conceal, run, loss_rate, pattern, loss_seed);

  auto* evaluate = app.add_subcommand("evaluate", "Score a concealed WAV against its reference");
  std::string ref_path, test_path;
  evaluate->add_option("--ref", ref_path, "Reference WAV")->required();
  evaluate->add_option("--test", test_path, "Concealed WAV")->required();
  evaluate->add_option("--metrics", metrics_path, "Metrics JSON output");
  evaluate->add_option("--score-from-frame", score_from, "Only score lost frames at or after this index");
  evaluate->add_option("--config", config_path, "JSON configuration file");
  add_predictor_flags(evaluate, flags);
  add_run_flags(evaluate, run, loss_rate, pattern, loss_seed);

  auto* sweep = app.add_subcommand("sweep", "Run a hyperparameter grid over a set of WAV files");
  std::vector<std::string> sweep_inputs;
  std::string input_dir, grid_path, out_dir;
  std::vector<int> ax_layers, ax_passes, ax_hidden, ax_timesteps;
  unsigned jobs = 0;
  sweep->add_option("--in", sweep_inputs, "Input WAV (repeatable)");
  sweep->add_option("--input-dir", input_dir, "Directory of input WAVs");
  sweep->add_option("--grid", grid_path, "JSON grid: {\"layers\":[...],\"passes\":[...],...}");
  sweep->add_option("--layers", ax_layers, "Layer counts")->delimiter(',');
  sweep->add_option("--passes", ax_passes, "Pass counts")->delimiter(',');
  sweep->add_option("--hidden", ax_hidden, "Neurons per layer (window length follows)")->delimiter(',');
  sweep->add_option("--timesteps", ax_timesteps, "Time steps")->delimiter(',');
  sweep->add_option("--out-dir", out_dir, "Output directory")->required();
  sweep->add_option("--checkpoint", checkpoint, "Pretrained checkpoint shared by all points");
  sweep->add_option("--jobs", jobs, "Parallel points (default: core count)");
  sweep->add_option("--config", config_path, "JSON configuration file");
  sweep->add_option("--seed", flags.seed, "Model seed (default 1)");
  sweep->add_option("--alpha", flags.alpha, "Adam learning rate");
  sweep->add_option("--frame-len", flags.frame_len, "Samples per frame");
  sweep->add_option("--precision", flags.precision, "f32|f64");
  sweep->add_option("--score-from-frame", score_from, "Only score lost frames at or after this index");
  add_run_flags(sweep, run, loss_rate, pattern, loss_seed);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    const ConfigPtr cfg = build_config(config_path, flags, &run);
    if (loss_rate) run.loss_rate = *loss_rate;
    if (pattern) run.pattern = *pattern;
    if (loss_seed) run.loss_seed = *loss_seed;
    if (method) run.method = *method;
    if (score_from) run.score_from_frame = *score_from;

    if (app.got_subcommand(pre)) return cmd_pretrain(corpus_dir, ckpt_out, report_path, cfg.get());
    if (app.got_subcommand(conceal)) {
      return cmd_conceal(in_path, out_path, checkpoint, metrics_path, log_path, cfg.get(), run);
    }
    if (app.got_subcommand(evaluate)) return cmd_evaluate(ref_path, test_path, metrics_path, cfg.get(), run);
    return cmd_sweep(sweep_inputs, input_dir, grid_path, ax_layers, ax_passes, ax_hidden, ax_timesteps, out_dir,
                     checkpoint, jobs, cfg.get(), run);
  } catch (const CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInternal;
  }
}
