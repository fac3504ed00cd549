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

// Sample history, training-batch construction, online training on a received
// frame, autoregressive frame prediction and offline pretraining.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lstmplc/adam.hpp"
#include "lstmplc/lstm.hpp"

namespace lstmplc {

enum class RolloutMode {
  kCarried,  // warm up once, then carry state across the whole lost frame
  kFresh,    // fresh T-step rollout from the zero state for every sample
};

enum class Supervision {
  kFinalStep,  // one target per sequence: the sample after the last window
  kAllSteps,   // every step predicts the sample following its window
};

struct PredictorConfig {
  int frame_len = 80;    // N
  int window_len = 80;   // L
  int time_steps = 160;  // T
  int hidden = 80;       // H
  int num_layers = 1;
  int passes = 20;       // P; 0 disables online adaptation
  std::uint32_t sample_rate = 8000;
  AdamConfig adam{1e-3, 0.9, 0.999, 1e-8, 1.0};
  std::optional<double> pretrain_clip_norm;
  double init_bound = 0.0;  // <= 0 selects 1/sqrt(fan_in)
  std::uint64_t seed = 1;
  RolloutMode rollout = RolloutMode::kCarried;
  Supervision supervision = Supervision::kFinalStep;

  void validate() const;
  /// Samples of context needed before a target: T + L - 1.
  int context_len() const { return time_steps + window_len - 1; }
};

const char* to_string(RolloutMode mode);
const char* to_string(Supervision mode);
RolloutMode parse_rollout_mode(const std::string& s);
Supervision parse_supervision(const std::string& s);

/// Ring of the most recent normalized samples, addressed by absolute index.
/// Indices that are negative or have already been evicted read as 0.
class SampleHistory {
 public:
  explicit SampleHistory(std::size_t capacity);
  static SampleHistory for_config(const PredictorConfig& cfg);

  void push(std::span<const double> samples);
  void push(std::span<const float> samples);

  double at(std::int64_t index) const;
  /// Absolute index one past the newest sample (the current frame boundary).
  std::int64_t end_index() const { return end_; }
  std::size_t size() const { return static_cast<std::size_t>(std::min<std::int64_t>(end_, capacity())); }
  std::int64_t capacity() const { return static_cast<std::int64_t>(ring_.size()); }

 private:
  std::vector<double> ring_;
  std::int64_t end_ = 0;
};

/// The per-frame training set. Sequence j predicts frame sample j; its step t
/// (0-based) sees the window context[j + t, j + t + L).
template <typename T>
struct TrainingBatch {
  int frame_len = 0;
  int window_len = 0;
  int time_steps = 0;
  std::int64_t first_target_index = 0;  // absolute index of the frame's first sample
  RealVector<T> context;                // T + L - 1 history samples, then the N frame samples

  std::int64_t context_start() const { return first_target_index - (time_steps + window_len - 1); }
  RealVector<T> window(int sequence, int step) const;
  std::vector<RealVector<T>> sequence_windows(int sequence) const;
  T target(int sequence) const { return context(time_steps + window_len - 1 + sequence); }

  SequenceInputs<T> inputs() const;
  SequenceTargets<T> targets(Supervision mode = Supervision::kFinalStep) const;
};

template <typename T>
TrainingBatch<T> build_batch(const SampleHistory& history, std::span<const double> frame,
                             const PredictorConfig& cfg);

struct TrainReport {
  std::vector<double> pass_losses;  // loss before each applied update
  bool aborted = false;
  std::string abort_reason;
};

template <typename T>
TrainReport train_on_frame(NetworkParams<T>& net, AdamState<T>& opt, const TrainingBatch<T>& batch,
                           const PredictorConfig& cfg);

/// Autoregressive reconstruction of the N samples following the history.
/// Outputs are clamped to [-1, 1]; a non-finite head output becomes 0.
template <typename T>
std::vector<double> predict_frame(const NetworkParams<T>& net, const SampleHistory& history,
                                  const PredictorConfig& cfg);

struct CorpusStream {
  std::string name;
  std::vector<float> samples;
};

struct PretrainStreamReport {
  std::string name;
  std::size_t frames = 0;
  double mean_loss = 0.0;
  bool skipped = false;
  std::string reason;
};

struct PretrainReport {
  std::vector<PretrainStreamReport> streams;  // in processing order
  std::uint64_t steps = 0;
  std::uint64_t skipped_steps = 0;  // non-finite gradients
};

/// One epoch: streams in seed-shuffled order, frames in order, one optimizer
/// step per frame. Streams with samples outside [-1, 1] are skipped.
template <typename T>
PretrainReport pretrain(NetworkParams<T>& net, AdamState<T>& opt, std::span<const CorpusStream> corpus,
                        const PredictorConfig& cfg);

/// Order in which pretrain visits `count` streams for a given seed.
std::vector<std::size_t> pretrain_order(std::size_t count, std::uint64_t seed);

}  // namespace lstmplc
