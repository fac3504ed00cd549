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

// Mono 16-bit PCM WAV reading/writing and framing.

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lstmplc/error.hpp"

namespace lstmplc {

struct AudioBuffer {
  std::vector<float> samples;  // normalized to [-1, 1]
  std::uint32_t sample_rate = 8000;
};

/// Reads RIFF/WAVE PCM 16-bit mono (plain or WAVE_FORMAT_EXTENSIBLE with a PCM
/// subformat). Sample i is int16 / 32768. Unknown chunks are skipped.
AudioBuffer read_wav(const std::filesystem::path& path);

/// Writes a canonical 44-byte-header file; int16 = round(sample * 32768),
/// clamped to [-32767, 32767].
void write_wav(const AudioBuffer& buf, const std::filesystem::path& path);

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf);
AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes);

struct FrameStream {
  std::vector<std::vector<float>> frames;
  std::vector<bool> availability;  // true = received
  std::uint32_t sample_rate = 8000;
  std::size_t dropped_samples = 0;  // trailing partial frame

  std::size_t frame_count() const { return frames.size(); }
  std::vector<float> flatten() const;
};

/// floor(len / N) frames, all marked available; the remainder is dropped and
/// counted.
FrameStream segment_frames(const AudioBuffer& buf, int frame_len);

}  // namespace lstmplc
