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

// Objective concealment metrics and reference concealers.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmplc/wav.hpp"

namespace lstmplc {

inline constexpr double kSnrFloorDb = -10.0;
inline constexpr double kSnrCeilDb = 35.0;
inline constexpr double kSilenceEnergy = 1e-12;

struct LostFrameMetric {
  std::size_t index = 0;
  double mse = 0.0;
  double snr_db = 0.0;  // clamped to [kSnrFloorDb, kSnrCeilDb]; 0 when silent
  bool silent = false;  // reference energy below kSilenceEnergy, excluded from SNR
};

struct MetricsReport {
  std::vector<LostFrameMetric> frames;
  double mean_mse = 0.0;
  double segmental_snr_db = 0.0;
  std::size_t lost_frames = 0;
  std::size_t snr_frames = 0;  // lost frames that entered the SNR mean
  nlohmann::json metadata = nlohmann::json::object();

  nlohmann::json to_json() const;
  static MetricsReport from_json(const nlohmann::json& j);
};

/// Scores only the frames marked lost (availability false) whose index is at
/// least `first_frame`.
MetricsReport lost_frame_metrics(std::span<const float> reference, std::span<const float> concealed,
                                 const std::vector<bool>& availability, int frame_len,
                                 std::size_t first_frame = 0);

/// Received frames copied, lost frames silenced.
std::vector<float> zero_fill(const FrameStream& stream, const std::vector<bool>& availability);

struct PeriodicConfig {
  int min_pitch = 40;
  int max_pitch = 120;
  double attenuation_per_frame = 0.2;
};

/// Normalized-autocorrelation pitch estimate over the given analysis segment.
/// Returns 0 when the segment has no energy.
int estimate_pitch(std::span<const double> segment, int min_pitch, int max_pitch);

/// Simplified pitch-repetition concealer in the spirit of G.711 Appendix I.
/// It is NOT a conformant implementation of that standard.
std::vector<float> periodic_extrapolation(const FrameStream& stream, const std::vector<bool>& availability,
                                          const PeriodicConfig& cfg = {});

}  // namespace lstmplc
