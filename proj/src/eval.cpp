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

#include "lstmplc/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lstmplc/error.hpp"

namespace lstmplc {

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json frames_json = nlohmann::json::array();
  for (const auto& f : frames) {
    frames_json.push_back({{"index", f.index}, {"mse", f.mse}, {"snr_db", f.snr_db}, {"silent", f.silent}});
  }
  return {{"lost_frames", lost_frames},       {"snr_frames", snr_frames}, {"mean_mse", mean_mse},
          {"segmental_snr_db", segmental_snr_db}, {"frames", frames_json}, {"metadata", metadata}};
}

MetricsReport MetricsReport::from_json(const nlohmann::json& j) {
  MetricsReport r;
  for (const auto& f : j.at("frames")) {
    r.frames.push_back({f.at("index").get<std::size_t>(), f.at("mse").get<double>(), f.at("snr_db").get<double>(),
                        f.at("silent").get<bool>()});
  }
  r.mean_mse = j.at("mean_mse").get<double>();
  r.segmental_snr_db = j.at("segmental_snr_db").get<double>();
  r.lost_frames = j.at("lost_frames").get<std::size_t>();
  r.snr_frames = j.at("snr_frames").get<std::size_t>();
  r.metadata = j.value("metadata", nlohmann::json::object());
  return r;
}

MetricsReport lost_frame_metrics(std::span<const float> reference, std::span<const float> concealed,
                                 const std::vector<bool>& availability, int frame_len, std::size_t first_frame) {
  if (frame_len < 1) config_error("frame length must be >= 1");
  if (reference.size() != concealed.size()) {
    config_error("reference has " + std::to_string(reference.size()) + " samples, concealed has " +
                 std::to_string(concealed.size()));
  }
  const std::size_t n = static_cast<std::size_t>(frame_len);
  if (availability.size() * n != reference.size()) {
    config_error("loss pattern covers " + std::to_string(availability.size()) + " frames but signal has " +
                 std::to_string(reference.size()) + " samples");
  }

  MetricsReport report;
  double mse_sum = 0.0;
  double snr_sum = 0.0;
  for (std::size_t k = first_frame; k < availability.size(); ++k) {
    if (availability[k]) continue;
    double signal = 0.0;
    double error = 0.0;
    for (std::size_t i = k * n; i < (k + 1) * n; ++i) {
      const double r = reference[i];
      const double d = r - static_cast<double>(concealed[i]);
      signal += r * r;
      error += d * d;
    }
    LostFrameMetric m;
    m.index = k;
    m.mse = error / static_cast<double>(n);
    m.silent = signal < kSilenceEnergy;
    if (!m.silent) {
      const double snr = error > 0 ? 10.0 * std::log10(signal / error) : std::numeric_limits<double>::infinity();
      m.snr_db = std::clamp(snr, kSnrFloorDb, kSnrCeilDb);
      snr_sum += m.snr_db;
      ++report.snr_frames;
    }
    mse_sum += m.mse;
    report.frames.push_back(m);
  }
  report.lost_frames = report.frames.size();
  if (report.lost_frames > 0) report.mean_mse = mse_sum / static_cast<double>(report.lost_frames);
  if (report.snr_frames > 0) report.segmental_snr_db = snr_sum / static_cast<double>(report.snr_frames);
  return report;
}

namespace {

void check_pattern(const FrameStream& stream, const std::vector<bool>& availability) {
  if (availability.size() != stream.frames.size()) {
    config_error("loss pattern has " + std::to_string(availability.size()) + " entries for " +
                 std::to_string(stream.frames.size()) + " frames");
  }
}

}  // namespace

std::vector<float> zero_fill(const FrameStream& stream, const std::vector<bool>& availability) {
  check_pattern(stream, availability);
  std::vector<float> out;
  for (std::size_t k = 0; k < stream.frames.size(); ++k) {
    const auto& f = stream.frames[k];
    if (availability[k]) {
      out.insert(out.end(), f.begin(), f.end());
    } else {
      out.insert(out.end(), f.size(), 0.0f);
    }
  }
  return out;
}

int estimate_pitch(std::span<const double> seg, int min_pitch, int max_pitch) {
  if (min_pitch < 1 || max_pitch < min_pitch) config_error("pitch range must satisfy 1 <= min <= max");
  double energy = 0.0;
  for (double s : seg) energy += s * s;
  if (energy < kSilenceEnergy) return 0;

  const int m = static_cast<int>(seg.size());
  int best_lag = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int lag = min_pitch; lag <= max_pitch && lag < m; ++lag) {
    double cross = 0.0, e_now = 0.0, e_lag = 0.0;
    for (int i = lag; i < m; ++i) {
      cross += seg[static_cast<std::size_t>(i)] * seg[static_cast<std::size_t>(i - lag)];
      e_now += seg[static_cast<std::size_t>(i)] * seg[static_cast<std::size_t>(i)];
      e_lag += seg[static_cast<std::size_t>(i - lag)] * seg[static_cast<std::size_t>(i - lag)];
    }
    const double denom = std::sqrt(e_now * e_lag);
    if (denom < kSilenceEnergy) continue;
    // Near-ties go to the shorter lag so multiples of the period never win.
    const double r = cross / denom;
    if (r > best + 1e-9) {
      best = r;
      best_lag = lag;
    }
  }
  return best_lag;
}

std::vector<float> periodic_extrapolation(const FrameStream& stream, const std::vector<bool>& availability,
                                          const PeriodicConfig& cfg) {
  check_pattern(stream, availability);
  if (cfg.min_pitch < 1 || cfg.max_pitch < cfg.min_pitch) config_error("pitch range must satisfy 1 <= min <= max");
  const std::size_t analysis = 2 * static_cast<std::size_t>(cfg.max_pitch);

  std::vector<double> out;
  // State of the current loss run.
  int pitch = 0;
  int run = 0;
  std::vector<double> period, previous;

  for (std::size_t k = 0; k < stream.frames.size(); ++k) {
    const auto& frame = stream.frames[k];
    if (availability[k]) {
      out.insert(out.end(), frame.begin(), frame.end());
      run = 0;
      continue;
    }
    if (run == 0) {
      // Analysis window of past output, zero-padded at stream start.
      std::vector<double> seg(analysis, 0.0);
      const std::size_t have = std::min(analysis, out.size());
      std::copy(out.end() - static_cast<std::ptrdiff_t>(have), out.end(), seg.end() - static_cast<std::ptrdiff_t>(have));
      pitch = estimate_pitch(seg, cfg.min_pitch, cfg.max_pitch);
      if (pitch > 0) {
        period.assign(seg.end() - pitch, seg.end());
        previous.assign(seg.end() - 2 * pitch, seg.end() - pitch);
      }
    }
    const double gain = std::max(0.0, 1.0 - cfg.attenuation_per_frame * run);
    const std::size_t n = frame.size();
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      if (pitch > 0) {
        const std::size_t phase = (static_cast<std::size_t>(run) * n + i) % static_cast<std::size_t>(pitch);
        s = period[phase];
        const std::size_t fade = static_cast<std::size_t>((pitch + 3) / 4);
        if (run == 0 && i < fade) {
          // Entry crossfade from the older pitch period into the newest one.
          const double w = static_cast<double>(i + 1) / static_cast<double>(fade + 1);
          s = (1.0 - w) * previous[i] + w * s;
        }
      }
      out.push_back(gain * s);
    }
    ++run;
  }
  return {out.begin(), out.end()};
}

}  // namespace lstmplc
