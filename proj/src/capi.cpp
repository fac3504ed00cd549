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

#include "lstmplc/lstmplc.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <variant>

#include "lstmplc/eval.hpp"
#include "lstmplc/plc_engine.hpp"
#include "lstmplc/wav.hpp"

struct plc_config {
  lstmplc::EngineConfig cfg;
};

struct plc_audio {
  lstmplc::AudioBuffer buf;
};

struct plc_session {
  std::variant<lstmplc::PlcSession<float>, lstmplc::PlcSession<double>> impl;
};

namespace {

thread_local std::string g_last_error;

plc_status status_for(lstmplc::ErrorCode code) {
  using lstmplc::ErrorCode;
  switch (code) {
    case ErrorCode::kConfig: return PLC_ERR_CONFIG;
    case ErrorCode::kIo: return PLC_ERR_IO;
    case ErrorCode::kIntegrity: return PLC_ERR_INTEGRITY;
    case ErrorCode::kUnsupportedVersion: return PLC_ERR_VERSION;
    case ErrorCode::kUnsupportedFormat: return PLC_ERR_FORMAT;
    case ErrorCode::kNumerical: return PLC_ERR_NUMERICAL;
  }
  return PLC_ERR_INTERNAL;
}

plc_status fail(plc_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <typename F>
plc_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return PLC_OK;
  } catch (const lstmplc::Error& e) {
    return fail(status_for(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(PLC_ERR_CONFIG, std::string("JSON: ") + e.what());
  } catch (const std::bad_alloc&) {
    return fail(PLC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PLC_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

std::vector<bool> flags(const uint8_t* available, size_t n) {
  std::vector<bool> v(n);
  for (size_t i = 0; i < n; ++i) v[i] = available[i] != 0;
  return v;
}

lstmplc::FrameStream framed(const plc_audio* input, size_t n_frames, size_t frame_len) {
  const auto fs = lstmplc::segment_frames(input->buf, static_cast<int>(frame_len));
  if (fs.frame_count() != n_frames) {
    lstmplc::config_error("loss pattern has " + std::to_string(n_frames) + " frames but audio holds " +
                          std::to_string(fs.frame_count()) + " whole frames");
  }
  return fs;
}

#define PLC_REQUIRE(cond, what) \
  if (!(cond)) return fail(PLC_ERR_ARGUMENT, what)

}  // namespace

extern "C" {

const char* plc_version(void) { return "1.0.0"; }

const char* plc_status_string(plc_status status) {
  switch (status) {
    case PLC_OK: return "ok";
    case PLC_ERR_ARGUMENT: return "invalid argument";
    case PLC_ERR_CONFIG: return "configuration error";
    case PLC_ERR_IO: return "I/O error";
    case PLC_ERR_INTEGRITY: return "integrity error";
    case PLC_ERR_VERSION: return "unsupported version";
    case PLC_ERR_FORMAT: return "unsupported format";
    case PLC_ERR_NUMERICAL: return "numerical error";
    case PLC_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* plc_last_error(void) { return g_last_error.c_str(); }

void plc_string_free(char* s) { std::free(s); }

// --- configuration ----------------------------------------------------------

plc_status plc_config_create(plc_config** out) {
  PLC_REQUIRE(out, "out is null");
  return guarded([&] { *out = new plc_config(); });
}

plc_status plc_config_clone(const plc_config* cfg, plc_config** out) {
  PLC_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = new plc_config(*cfg); });
}

plc_status plc_config_merge_json(plc_config* cfg, const char* json) {
  PLC_REQUIRE(cfg && json, "null argument");
  return guarded([&] {
    lstmplc::EngineConfig next = cfg->cfg;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      lstmplc::config_error(std::string("configuration is not valid JSON: ") + e.what());
    }
    lstmplc::apply_config_json(next, j);
    cfg->cfg = next;
  });
}

plc_status plc_config_set(plc_config* cfg, const char* key, const char* json_value) {
  PLC_REQUIRE(cfg && key && json_value, "null argument");
  return guarded([&] {
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(json_value);
    } catch (const nlohmann::json::parse_error&) {
      lstmplc::config_error(std::string("value for '") + key + "' is not valid JSON: " + json_value);
    }
    lstmplc::EngineConfig next = cfg->cfg;
    lstmplc::apply_config_json(next, nlohmann::json{{key, value}});
    cfg->cfg = next;
  });
}

plc_status plc_config_to_json(const plc_config* cfg, char** out_json) {
  PLC_REQUIRE(cfg && out_json, "null argument");
  return guarded([&] { *out_json = dup_string(lstmplc::config_to_json(cfg->cfg).dump()); });
}

void plc_config_destroy(plc_config* cfg) { delete cfg; }

// --- audio ------------------------------------------------------------------

plc_status plc_audio_read_wav(const char* path, plc_audio** out) {
  PLC_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new plc_audio{lstmplc::read_wav(path)}; });
}

plc_status plc_audio_create(const float* samples, size_t count, uint32_t sample_rate, plc_audio** out) {
  PLC_REQUIRE(out && (samples || count == 0), "null argument");
  PLC_REQUIRE(sample_rate > 0, "sample rate must be positive");
  return guarded([&] {
    auto a = std::make_unique<plc_audio>();
    a->buf.sample_rate = sample_rate;
    a->buf.samples.assign(samples, samples + count);
    *out = a.release();
  });
}

plc_status plc_audio_write_wav(const plc_audio* audio, const char* path) {
  PLC_REQUIRE(audio && path, "null argument");
  return guarded([&] { lstmplc::write_wav(audio->buf, path); });
}

size_t plc_audio_length(const plc_audio* audio) { return audio ? audio->buf.samples.size() : 0; }

uint32_t plc_audio_sample_rate(const plc_audio* audio) { return audio ? audio->buf.sample_rate : 0; }

const float* plc_audio_samples(const plc_audio* audio) { return audio ? audio->buf.samples.data() : nullptr; }

plc_status plc_audio_frame_count(const plc_audio* audio, size_t frame_len, size_t* frames, size_t* dropped) {
  PLC_REQUIRE(audio && frames, "null argument");
  PLC_REQUIRE(frame_len > 0, "frame_len must be positive");
  *frames = audio->buf.samples.size() / frame_len;
  if (dropped) *dropped = audio->buf.samples.size() % frame_len;
  return PLC_OK;
}

void plc_audio_destroy(plc_audio* audio) { delete audio; }

// --- loss patterns ----------------------------------------------------------

plc_status plc_loss_pattern(size_t n_frames, double rate, plc_loss_mode mode, uint64_t seed, int64_t even_offset,
                            uint8_t* out_available) {
  PLC_REQUIRE(out_available, "null argument");
  PLC_REQUIRE(mode == PLC_LOSS_EVEN || mode == PLC_LOSS_RANDOM, "unknown loss mode");
  return guarded([&] {
    std::optional<std::size_t> offset;
    if (even_offset >= 0) offset = static_cast<std::size_t>(even_offset);
    const auto p = lstmplc::generate_loss_pattern(
        n_frames, rate, mode == PLC_LOSS_EVEN ? lstmplc::LossMode::kEven : lstmplc::LossMode::kRandom, seed, offset);
    for (size_t i = 0; i < p.size(); ++i) out_available[i] = p[i] ? 1 : 0;
  });
}

// --- sessions ---------------------------------------------------------------

plc_status plc_session_create(const plc_config* cfg, const char* checkpoint_path, plc_session** out) {
  PLC_REQUIRE(cfg && out, "null argument");
  return guarded([&] {
    const lstmplc::PredictorConfig& pc = cfg->cfg.predictor;
    pc.validate();
    const bool f32 = cfg->cfg.precision == lstmplc::Precision::kF32;
    if (checkpoint_path == nullptr) {
      *out = f32 ? new plc_session{lstmplc::PlcSession<float>(pc)} : new plc_session{lstmplc::PlcSession<double>(pc)};
      return;
    }
    const lstmplc::ModelCheckpoint ck = lstmplc::load_checkpoint(checkpoint_path);
    lstmplc::check_compatible(ck.config, pc);
    if (f32) {
      *out = new plc_session{lstmplc::PlcSession<float>(pc, ck.params)};
    } else {
      *out = new plc_session{lstmplc::PlcSession<double>(pc, lstmplc::cast_params<double>(ck.params))};
    }
  });
}

size_t plc_session_frame_len(const plc_session* s) {
  if (!s) return 0;
  return std::visit([](const auto& impl) { return static_cast<size_t>(impl.config().frame_len); }, s->impl);
}

plc_status plc_session_process_frame(plc_session* s, const float* frame, int available, float* out) {
  PLC_REQUIRE(s && out, "null argument");
  PLC_REQUIRE(frame || !available, "received frame is null");
  return guarded([&] {
    std::visit(
        [&](auto& impl) {
          const size_t n = static_cast<size_t>(impl.config().frame_len);
          const auto result = impl.process_frame(available ? std::span<const float>(frame, n) : std::span<const float>(),
                                                 available != 0);
          for (size_t i = 0; i < n; ++i) out[i] = static_cast<float>(result[i]);
        },
        s->impl);
  });
}

plc_status plc_session_process_stream(plc_session* s, const plc_audio* input, const uint8_t* available,
                                      size_t n_frames, plc_audio** out) {
  PLC_REQUIRE(s && input && available && out, "null argument");
  return guarded([&] {
    std::visit(
        [&](auto& impl) {
          const auto fs = framed(input, n_frames, static_cast<size_t>(impl.config().frame_len));
          auto result = std::make_unique<plc_audio>();
          result->buf.sample_rate = input->buf.sample_rate;
          result->buf.samples = impl.process_stream(fs, flags(available, n_frames));
          *out = result.release();
        },
        s->impl);
  });
}

plc_status plc_session_frame_log(const plc_session* s, char** out_jsonl) {
  PLC_REQUIRE(s && out_jsonl, "null argument");
  return guarded([&] {
    *out_jsonl = dup_string(std::visit([](const auto& impl) { return impl.frame_log_jsonl(); }, s->impl));
  });
}

plc_status plc_session_save_checkpoint(const plc_session* s, const char* path, int include_optimizer) {
  PLC_REQUIRE(s && path, "null argument");
  return guarded([&] {
    std::visit(
        [&](const auto& impl) {
          lstmplc::CheckpointMeta meta;
          meta.seed = impl.config().seed;
          lstmplc::save_checkpoint(impl.checkpoint(meta, include_optimizer != 0), path);
        },
        s->impl);
  });
}

void plc_session_destroy(plc_session* s) { delete s; }

// --- pretraining ------------------------------------------------------------

plc_status plc_pretrain(const plc_config* cfg, const char* const* paths, size_t n_paths, const char* out_checkpoint,
                        char** out_report) {
  PLC_REQUIRE(cfg && out_checkpoint && (paths || n_paths == 0), "null argument");
  return guarded([&] {
    std::vector<std::filesystem::path> files;
    for (size_t i = 0; i < n_paths; ++i) files.emplace_back(paths[i]);
    const lstmplc::PretrainOutcome outcome = lstmplc::pretrain_files(files, cfg->cfg);
    lstmplc::save_checkpoint(outcome.checkpoint, out_checkpoint);
    if (out_report) {
      nlohmann::json streams = nlohmann::json::array();
      for (const auto& s : outcome.report.streams) {
        nlohmann::json e = {{"name", s.name}, {"frames", s.frames}, {"mean_loss", s.mean_loss}};
        if (s.skipped) e["skipped"] = s.reason;
        streams.push_back(e);
      }
      nlohmann::json unreadable = nlohmann::json::array();
      for (const auto& [path, reason] : outcome.unreadable) unreadable.push_back({{"path", path}, {"reason", reason}});
      const nlohmann::json report = {{"config", lstmplc::config_to_json(cfg->cfg)},
                                     {"steps", outcome.report.steps},
                                     {"skipped_steps", outcome.report.skipped_steps},
                                     {"corpus_hash", outcome.checkpoint.meta.corpus_hash},
                                     {"streams", streams},
                                     {"unreadable", unreadable}};
      *out_report = dup_string(report.dump());
    }
  });
}

// --- baselines and metrics --------------------------------------------------

plc_status plc_conceal_zero_fill(const plc_audio* input, const uint8_t* available, size_t n_frames, size_t frame_len,
                                 plc_audio** out) {
  PLC_REQUIRE(input && available && out, "null argument");
  PLC_REQUIRE(frame_len > 0, "frame_len must be positive");
  return guarded([&] {
    const auto fs = framed(input, n_frames, frame_len);
    *out = new plc_audio{{lstmplc::zero_fill(fs, flags(available, n_frames)), input->buf.sample_rate}};
  });
}

plc_status plc_conceal_periodic(const plc_audio* input, const uint8_t* available, size_t n_frames, size_t frame_len,
                                int min_pitch, int max_pitch, plc_audio** out) {
  PLC_REQUIRE(input && available && out, "null argument");
  PLC_REQUIRE(frame_len > 0, "frame_len must be positive");
  return guarded([&] {
    lstmplc::PeriodicConfig pc;
    if (min_pitch > 0) pc.min_pitch = min_pitch;
    if (max_pitch > 0) pc.max_pitch = max_pitch;
    const auto fs = framed(input, n_frames, frame_len);
    *out = new plc_audio{{lstmplc::periodic_extrapolation(fs, flags(available, n_frames), pc), input->buf.sample_rate}};
  });
}

plc_status plc_metrics(const float* reference, const float* concealed, size_t n_samples, const uint8_t* available,
                       size_t n_frames, size_t frame_len, size_t first_frame, const char* metadata_json,
                       char** out_json) {
  PLC_REQUIRE(reference && concealed && available && out_json, "null argument");
  PLC_REQUIRE(frame_len > 0, "frame_len must be positive");
  return guarded([&] {
    auto report = lstmplc::lost_frame_metrics({reference, n_samples}, {concealed, n_samples},
                                              flags(available, n_frames), static_cast<int>(frame_len), first_frame);
    if (metadata_json) {
      try {
        report.metadata = nlohmann::json::parse(metadata_json);
      } catch (const nlohmann::json::parse_error& e) {
        lstmplc::config_error(std::string("metadata is not valid JSON: ") + e.what());
      }
    }
    *out_json = dup_string(report.to_json().dump());
  });
}

}  // extern "C"
