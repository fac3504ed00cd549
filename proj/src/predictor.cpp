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

#include "lstmplc/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lstmplc {

void PredictorConfig::validate() const {
  if (frame_len < 1) config_error("frame_len must be >= 1");
  if (window_len < 1) config_error("window_len must be >= 1");
  if (time_steps < 1) config_error("time_steps must be >= 1");
  if (hidden < 1) config_error("hidden must be >= 1");
  if (num_layers < 1) config_error("num_layers must be >= 1");
  if (passes < 0) config_error("passes must be >= 0");
  if (sample_rate == 0) config_error("sample_rate must be > 0");
  adam.validate();
  if (pretrain_clip_norm && !(*pretrain_clip_norm > 0)) config_error("pretrain_clip_norm must be > 0 when set");
}

const char* to_string(RolloutMode mode) { return mode == RolloutMode::kCarried ? "carried" : "fresh"; }

const char* to_string(Supervision mode) { return mode == Supervision::kFinalStep ? "final" : "all"; }

RolloutMode parse_rollout_mode(const std::string& s) {
  if (s == "carried") return RolloutMode::kCarried;
  if (s == "fresh") return RolloutMode::kFresh;
  config_error("unknown rollout mode '" + s + "' (expected carried|fresh)");
}

Supervision parse_supervision(const std::string& s) {
  if (s == "final") return Supervision::kFinalStep;
  if (s == "all") return Supervision::kAllSteps;
  config_error("unknown supervision mode '" + s + "' (expected final|all)");
}

// ---------------------------------------------------------------------------

SampleHistory::SampleHistory(std::size_t capacity) : ring_(std::max<std::size_t>(capacity, 1), 0.0) {}

SampleHistory SampleHistory::for_config(const PredictorConfig& cfg) {
  const std::int64_t span = static_cast<std::int64_t>(cfg.time_steps) + cfg.window_len;
  const std::int64_t frames = (span + cfg.frame_len - 1) / cfg.frame_len;
  return SampleHistory(static_cast<std::size_t>(std::max(span, frames * cfg.frame_len)));
}

void SampleHistory::push(std::span<const double> samples) {
  const std::int64_t cap = capacity();
  for (double s : samples) {
    ring_[static_cast<std::size_t>(end_ % cap)] = s;
    ++end_;
  }
}

void SampleHistory::push(std::span<const float> samples) {
  const std::int64_t cap = capacity();
  for (float s : samples) {
    ring_[static_cast<std::size_t>(end_ % cap)] = s;
    ++end_;
  }
}

double SampleHistory::at(std::int64_t index) const {
  if (index < 0 || index >= end_ || index < end_ - capacity()) return 0.0;
  return ring_[static_cast<std::size_t>(index % capacity())];
}

// ---------------------------------------------------------------------------

template <typename T>
RealVector<T> TrainingBatch<T>::window(int sequence, int step) const {
  return context.segment(sequence + step, window_len);
}

template <typename T>
std::vector<RealVector<T>> TrainingBatch<T>::sequence_windows(int sequence) const {
  std::vector<RealVector<T>> out;
  out.reserve(static_cast<std::size_t>(time_steps));
  for (int t = 0; t < time_steps; ++t) out.push_back(window(sequence, t));
  return out;
}

template <typename T>
SequenceInputs<T> TrainingBatch<T>::inputs() const {
  SequenceInputs<T> in;
  const int K = time_steps + frame_len - 1;
  in.bank.resize(window_len, K);
  for (int k = 0; k < K; ++k) in.bank.col(k) = context.segment(k, window_len);
  in.steps = time_steps;
  in.batch = frame_len;
  in.column.resize(static_cast<std::size_t>(time_steps) * frame_len);
  for (int t = 0; t < time_steps; ++t) {
    for (int j = 0; j < frame_len; ++j) in.column[static_cast<std::size_t>(t) * frame_len + j] = j + t;
  }
  return in;
}

template <typename T>
SequenceTargets<T> TrainingBatch<T>::targets(Supervision mode) const {
  SequenceTargets<T> tg;
  tg.value = BatchMatrix<T>::Zero(time_steps, frame_len);
  tg.weight = BatchMatrix<T>::Zero(time_steps, frame_len);
  const T n = static_cast<T>(frame_len);
  for (int j = 0; j < frame_len; ++j) {
    if (mode == Supervision::kFinalStep) {
      tg.value(time_steps - 1, j) = target(j);
      tg.weight(time_steps - 1, j) = T(1) / n;
    } else {
      for (int t = 0; t < time_steps; ++t) {
        tg.value(t, j) = context(j + t + window_len);
        tg.weight(t, j) = T(1) / (n * static_cast<T>(time_steps));
      }
    }
  }
  return tg;
}

template <typename T>
TrainingBatch<T> build_batch(const SampleHistory& history, std::span<const double> frame,
                             const PredictorConfig& cfg) {
  if (static_cast<int>(frame.size()) != cfg.frame_len) {
    config_error("build_batch: frame has " + std::to_string(frame.size()) + " samples, expected " +
                 std::to_string(cfg.frame_len));
  }
  TrainingBatch<T> batch;
  batch.frame_len = cfg.frame_len;
  batch.window_len = cfg.window_len;
  batch.time_steps = cfg.time_steps;
  batch.first_target_index = history.end_index();
  const int ctx = cfg.context_len();
  batch.context.resize(ctx + cfg.frame_len);
  const std::int64_t start = batch.context_start();
  for (int i = 0; i < ctx; ++i) batch.context(i) = static_cast<T>(history.at(start + i));
  for (int j = 0; j < cfg.frame_len; ++j) batch.context(ctx + j) = static_cast<T>(frame[static_cast<std::size_t>(j)]);
  return batch;
}

template <typename T>
TrainReport train_on_frame(NetworkParams<T>& net, AdamState<T>& opt, const TrainingBatch<T>& batch,
                           const PredictorConfig& cfg) {
  TrainReport report;
  if (cfg.passes == 0) return report;
  const SequenceInputs<T> inputs = batch.inputs();
  const SequenceTargets<T> targets = batch.targets(cfg.supervision);
  for (int pass = 0; pass < cfg.passes; ++pass) {
    const ForwardTrace<T> trace = forward_batch(net, inputs);
    const double loss = static_cast<double>(masked_loss(trace, targets));
    if (!std::isfinite(loss)) {
      report.aborted = true;
      report.abort_reason = "non-finite loss at pass " + std::to_string(pass);
      break;
    }
    const AdamStepResult step = adam_step(net, backward_batch(net, trace, targets), opt, cfg.adam);
    if (!step.applied) {
      report.aborted = true;
      report.abort_reason = "non-finite gradient at pass " + std::to_string(pass);
      break;
    }
    report.pass_losses.push_back(loss);
  }
  return report;
}

template <typename T>
std::vector<double> predict_frame(const NetworkParams<T>& net, const SampleHistory& history,
                                  const PredictorConfig& cfg) {
  const int N = cfg.frame_len;
  const int L = cfg.window_len;
  const int steps = cfg.time_steps;
  const std::int64_t n0 = history.end_index();
  const std::int64_t start = n0 - cfg.context_len();

  // History followed by the samples predicted so far.
  std::vector<T> buf(static_cast<std::size_t>(cfg.context_len() + N));
  for (int i = 0; i < cfg.context_len(); ++i) buf[static_cast<std::size_t>(i)] = static_cast<T>(history.at(start + i));

  RealVector<T> x(L);
  auto window_ending_at = [&](std::int64_t last) -> const RealVector<T>& {
    const std::int64_t first = last - L + 1 - start;
    for (int i = 0; i < L; ++i) x(i) = buf[static_cast<std::size_t>(first + i)];
    return x;
  };
  auto emit = [](T y) -> T {
    if (!std::isfinite(static_cast<double>(y))) return T(0);
    return std::clamp(y, T(-1), T(1));
  };

  StepRunner<T> runner(net);
  std::vector<double> out(static_cast<std::size_t>(N));
  if (cfg.rollout == RolloutMode::kCarried) {
    for (std::int64_t last = n0 - steps; last <= n0 - 2; ++last) runner.step(window_ending_at(last));
    for (int k = 0; k < N; ++k) {
      const T y = emit(runner.step(window_ending_at(n0 + k - 1)));
      buf[static_cast<std::size_t>(cfg.context_len() + k)] = y;
      out[static_cast<std::size_t>(k)] = static_cast<double>(y);
    }
  } else {
    for (int k = 0; k < N; ++k) {
      runner.reset();
      T y = 0;
      for (std::int64_t last = n0 + k - steps; last <= n0 + k - 1; ++last) y = runner.step(window_ending_at(last));
      y = emit(y);
      buf[static_cast<std::size_t>(cfg.context_len() + k)] = y;
      out[static_cast<std::size_t>(k)] = static_cast<double>(y);
    }
  }
  return out;
}

std::vector<std::size_t> pretrain_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  SeededRng rng(seed ^ 0x53485546464C45ull);
  for (std::size_t i = count; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_below(i));
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

template <typename T>
PretrainReport pretrain(NetworkParams<T>& net, AdamState<T>& opt, std::span<const CorpusStream> corpus,
                        const PredictorConfig& cfg) {
  cfg.validate();
  AdamConfig adam = cfg.adam;
  adam.clip_norm = cfg.pretrain_clip_norm;

  PretrainReport report;
  for (std::size_t idx : pretrain_order(corpus.size(), cfg.seed)) {
    const CorpusStream& stream = corpus[idx];
    PretrainStreamReport sr;
    sr.name = stream.name;
    const bool in_range = std::all_of(stream.samples.begin(), stream.samples.end(),
                                      [](float s) { return std::isfinite(s) && s >= -1.0f && s <= 1.0f; });
    if (!in_range) {
      sr.skipped = true;
      sr.reason = "samples outside [-1, 1]";
      report.streams.push_back(std::move(sr));
      continue;
    }

    SampleHistory history = SampleHistory::for_config(cfg);
    std::vector<double> frame(static_cast<std::size_t>(cfg.frame_len));
    double loss_sum = 0.0;
    const std::size_t frames = stream.samples.size() / static_cast<std::size_t>(cfg.frame_len);
    for (std::size_t f = 0; f < frames; ++f) {
      const float* src = stream.samples.data() + f * static_cast<std::size_t>(cfg.frame_len);
      std::copy(src, src + cfg.frame_len, frame.begin());
      const TrainingBatch<T> batch = build_batch<T>(history, frame, cfg);
      const SequenceTargets<T> targets = batch.targets(cfg.supervision);
      const ForwardTrace<T> trace = forward_batch(net, batch.inputs());
      const double loss = static_cast<double>(masked_loss(trace, targets));
      const AdamStepResult step =
          std::isfinite(loss) ? adam_step(net, backward_batch(net, trace, targets), opt, adam) : AdamStepResult{};
      if (step.applied) {
        ++report.steps;
        loss_sum += loss;
      } else {
        ++report.skipped_steps;
      }
      history.push(std::span<const double>(frame));
    }
    sr.frames = frames;
    sr.mean_loss = frames > 0 ? loss_sum / static_cast<double>(frames) : 0.0;
    report.streams.push_back(std::move(sr));
  }
  return report;
}

#define LSTMPLC_INSTANTIATE(T)                                                                              \
  template struct TrainingBatch<T>;                                                                         \
  template TrainingBatch<T> build_batch<T>(const SampleHistory&, std::span<const double>,                  \
                                           const PredictorConfig&);                                         \
  template TrainReport train_on_frame<T>(NetworkParams<T>&, AdamState<T>&, const TrainingBatch<T>&,         \
                                         const PredictorConfig&);                                           \
  template std::vector<double> predict_frame<T>(const NetworkParams<T>&, const SampleHistory&,              \
                                                const PredictorConfig&);                                    \
  template PretrainReport pretrain<T>(NetworkParams<T>&, AdamState<T>&, std::span<const CorpusStream>,      \
                                      const PredictorConfig&);

LSTMPLC_INSTANTIATE(float)
LSTMPLC_INSTANTIATE(double)

}  // namespace lstmplc
