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

#include "lstmplc/wav.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "lstmplc/error.hpp"

namespace lstmplc {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t get_u16(const std::uint8_t* p) { return static_cast<std::uint16_t>(p[0] | (p[1] << 8)); }
std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}
void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
}
void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

[[noreturn]] void format_error(const std::string& what) { throw Error(ErrorCode::kUnsupportedFormat, what); }

}  // namespace

AudioBuffer decode_wav(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    format_error("not a RIFF/WAVE file");
  }
  AudioBuffer buf;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = get_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t available = bytes.size() - body;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16 || available < 16) format_error("fmt chunk too short");
      const std::uint8_t* f = bytes.data() + body;
      std::uint16_t tag = get_u16(f);
      const std::uint16_t channels = get_u16(f + 2);
      buf.sample_rate = get_u32(f + 4);
      const std::uint16_t bits = get_u16(f + 14);
      if (tag == kFormatExtensible) {
        // The subformat GUID starts at offset 24; its first two bytes carry the format tag.
        if (size < 40 || available < 40) format_error("extensible fmt chunk too short");
        tag = get_u16(f + 24);
      }
      if (tag != kFormatPcm) format_error("unsupported WAV encoding (format tag " + std::to_string(tag) + "), only PCM is accepted");
      if (channels != 1) format_error("expected a mono file, found " + std::to_string(channels) + " channels");
      if (bits != 16) format_error("expected 16-bit samples, found " + std::to_string(bits) + "-bit");
      if (buf.sample_rate == 0) format_error("sample rate is zero");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) format_error("data chunk precedes fmt chunk");
      // Streaming writers may leave a placeholder size; read what exists.
      const std::size_t len = std::min<std::size_t>(size, available) / 2;
      buf.samples.resize(len);
      const std::uint8_t* d = bytes.data() + body;
      for (std::size_t i = 0; i < len; ++i) {
        buf.samples[i] = static_cast<float>(static_cast<std::int16_t>(get_u16(d + 2 * i))) / 32768.0f;
      }
      return buf;
    }
    pos = body + size + (size & 1u);
  }
  if (!have_fmt) format_error("missing fmt chunk");
  format_error("missing data chunk");
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buf) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(buf.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_bytes);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);
  put_u32(out, buf.sample_rate);
  put_u32(out, buf.sample_rate * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  put_tag(out, "data");
  put_u32(out, data_bytes);
  for (float s : buf.samples) {
    if (!std::isfinite(s)) config_error("cannot encode a non-finite sample");
    // Same scale as the reader so int16-grid buffers round-trip exactly; only -32768 moves.
    const double scaled = std::clamp(std::round(static_cast<double>(s) * 32768.0), -32767.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
  }
  return out;
}

void write_wav(const AudioBuffer& buf, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buf);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

std::vector<float> FrameStream::flatten() const {
  std::vector<float> out;
  for (const auto& f : frames) out.insert(out.end(), f.begin(), f.end());
  return out;
}

FrameStream segment_frames(const AudioBuffer& buf, int frame_len) {
  if (frame_len < 1) config_error("frame length must be >= 1");
  const std::size_t n = static_cast<std::size_t>(frame_len);
  FrameStream fs;
  fs.sample_rate = buf.sample_rate;
  const std::size_t count = buf.samples.size() / n;
  fs.frames.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    fs.frames.emplace_back(buf.samples.begin() + static_cast<std::ptrdiff_t>(k * n),
                           buf.samples.begin() + static_cast<std::ptrdiff_t>((k + 1) * n));
  }
  fs.availability.assign(count, true);
  fs.dropped_samples = buf.samples.size() - count * n;
  return fs;
}

}  // namespace lstmplc
