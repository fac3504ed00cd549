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

// Copy-or-conceal session state machine, loss patterns, model checkpoints and
// configuration (de)serialization.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmplc/adam.hpp"
#include "lstmplc/predictor.hpp"
#include "lstmplc/wav.hpp"

namespace lstmplc {

// --- loss patterns ----------------------------------------------------------

enum class LossMode { kEven, kRandom };

const char* to_string(LossMode mode);
LossMode parse_loss_mode(const std::string& s);

/// Availability flags (true = received). Even mode loses frames
/// offset, offset + period, ... with period = round(1 / rate) and offset
/// defaulting to period - 1. Random mode draws i.i.d. Bernoulli(rate). Frame 0
/// is always received.
std::vector<bool> generate_loss_pattern(std::size_t n_frames, double rate, LossMode mode, std::uint64_t seed,
                                        std::optional<std::size_t> even_offset = std::nullopt);

// --- configuration ----------------------------------------------------------

enum class Precision { kF32, kF64 };

struct EngineConfig {
  PredictorConfig predictor;
  Precision precision = Precision::kF32;
};

nlohmann::json config_to_json(const EngineConfig& cfg);
/// Overlays the keys present in `j` onto `cfg`. Unknown keys are rejected.
void apply_config_json(EngineConfig& cfg, const nlohmann::json& j);

// --- checkpoints ------------------------------------------------------------

inline constexpr std::uint16_t kCheckpointVersion = 1;

struct CheckpointMeta {
  std::uint64_t seed = 0;
  std::uint64_t corpus_hash = 0;
  std::uint32_t epochs = 0;
};

/// Tensors are always stored as 32-bit floats.
struct ModelCheckpoint {
  PredictorConfig config;
  NetworkParams<float> params;
  std::optional<AdamState<float>> adam;
  CheckpointMeta meta;
};

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt);
/// Throws kIntegrity on bad magic, truncation or CRC mismatch and
/// kUnsupportedVersion on a version other than kCheckpointVersion.
ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path);
ModelCheckpoint load_checkpoint(const std::filesystem::path& path);

/// Rejects a checkpoint whose tensor shapes (window, hidden, layers) differ
/// from the session configuration.
void check_compatible(const PredictorConfig& checkpoint, const PredictorConfig& session);

template <typename To, typename From>
NetworkParams<To> cast_params(const NetworkParams<From>& p);

/// FNV-1a over names and raw sample bits, for checkpoint provenance.
std::uint64_t corpus_hash(std::span<const CorpusStream> corpus);

// --- sessions ---------------------------------------------------------------

struct FrameRecord {
  std::size_t index = 0;
  bool lost = false;
  std::vector<double> losses;  // per training pass, received frames only
  bool aborted = false;
  std::string abort_reason;
  double prediction_rms = 0.0;   // lost frames only
  double prediction_peak = 0.0;  // lost frames only
  double wall_ms = 0.0;

  nlohmann::json to_json() const;
};

template <typename T>
class PlcSession {
 public:
  /// Randomly initialized model seeded by cfg.seed.
  explicit PlcSession(PredictorConfig cfg);
  /// Starts from given parameters with a fresh optimizer state.
  PlcSession(PredictorConfig cfg, NetworkParams<T> model);

  /// Copy-and-train when available, otherwise predict. Returns the N output
  /// samples; the frame content is ignored when unavailable.
  std::vector<double> process_frame(std::span<const float> frame, bool available);

  std::vector<float> process_stream(const FrameStream& stream, const std::vector<bool>& availability);

  ModelCheckpoint checkpoint(const CheckpointMeta& meta = {}, bool include_optimizer = false) const;

  const PredictorConfig& config() const { return cfg_; }
  const NetworkParams<T>& model() const { return model_; }
  const AdamState<T>& optimizer() const { return opt_; }
  const SampleHistory& history() const { return history_; }
  const std::vector<FrameRecord>& frame_log() const { return log_; }
  std::string frame_log_jsonl() const;

 private:
  PredictorConfig cfg_;
  NetworkParams<T> model_;
  AdamState<T> opt_;
  SampleHistory history_;
  std::vector<FrameRecord> log_;
};

struct PretrainOutcome {
  ModelCheckpoint checkpoint;
  PretrainReport report;
  std::vector<std::pair<std::string, std::string>> unreadable;  // path, reason
};

/// Reads every WAV (skipping and reporting unreadable ones or those with a
/// sample rate other than cfg.sample_rate) and runs one pretraining epoch from
/// a seed-initialized model. Throws kConfig when nothing is readable.
PretrainOutcome pretrain_files(std::span<const std::filesystem::path> paths, const EngineConfig& cfg);

}  // namespace lstmplc
