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

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <json.hpp>

#include "lstmplc/lstmplc.h"

namespace {

std::string take(char* s) {
  std::string out(s);
  plc_string_free(s);
  return out;
}

std::vector<float> tone(std::size_t n, double freq) {
  std::vector<float> x(n);
  for (std::size_t k = 0; k < n; ++k) x[k] = static_cast<float>(0.4 * std::sin(2 * std::numbers::pi * freq * k / 8000.0));
  return x;
}

plc_config* tiny_config() {
  plc_config* cfg = nullptr;
  REQUIRE(plc_config_create(&cfg) == PLC_OK);
  REQUIRE(plc_config_merge_json(cfg, R"({"frame_len":16,"window":6,"timesteps":6,"hidden":5,"passes":2})") == PLC_OK);
  return cfg;
}

std::filesystem::path temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "lstmplc_capi";
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("status strings and version") {
  CHECK(std::string(plc_version()).size() > 0);
  CHECK(std::string(plc_status_string(PLC_ERR_INTEGRITY)).size() > 0);
  plc_string_free(nullptr);
}

TEST_CASE("null arguments are rejected") {
  CHECK(plc_config_create(nullptr) == PLC_ERR_ARGUMENT);
  CHECK(plc_session_create(nullptr, nullptr, nullptr) == PLC_ERR_ARGUMENT);
  CHECK(std::string(plc_last_error()).size() > 0);
  plc_config_destroy(nullptr);
  plc_audio_destroy(nullptr);
  plc_session_destroy(nullptr);
}

TEST_CASE("configuration through the C API") {
  plc_config* cfg = tiny_config();
  CHECK(plc_config_set(cfg, "rollout", "\"fresh\"") == PLC_OK);
  CHECK(plc_config_set(cfg, "hidden", "\"many\"") == PLC_ERR_CONFIG);
  CHECK(plc_config_set(cfg, "nonsense", "1") == PLC_ERR_CONFIG);
  CHECK(plc_config_merge_json(cfg, "{not json") == PLC_ERR_CONFIG);
  char* js = nullptr;
  REQUIRE(plc_config_to_json(cfg, &js) == PLC_OK);
  const auto j = nlohmann::json::parse(take(js));
  CHECK(j.at("rollout") == "fresh");
  CHECK(j.at("hidden") == 5);
  plc_config* copy = nullptr;
  REQUIRE(plc_config_clone(cfg, &copy) == PLC_OK);
  plc_config_set(copy, "hidden", "7");
  REQUIRE(plc_config_to_json(cfg, &js) == PLC_OK);
  CHECK(nlohmann::json::parse(take(js)).at("hidden") == 5);
  plc_config_destroy(copy);
  plc_config_destroy(cfg);
}

TEST_CASE("loss patterns through the C API") {
  std::vector<std::uint8_t> av(50);
  REQUIRE(plc_loss_pattern(50, 0.1, PLC_LOSS_EVEN, 0, -1, av.data()) == PLC_OK);
  for (std::size_t k = 0; k < 50; ++k) CHECK(av[k] == (k % 10 == 9 ? 0 : 1));
  CHECK(plc_loss_pattern(50, 1.5, PLC_LOSS_EVEN, 0, -1, av.data()) == PLC_ERR_CONFIG);
}

TEST_CASE("session, metrics and checkpoint") {
  plc_config* cfg = tiny_config();
  const auto x = tone(16 * 10 + 3, 350);
  plc_audio* in = nullptr;
  REQUIRE(plc_audio_create(x.data(), x.size(), 8000, &in) == PLC_OK);
  std::size_t frames = 0, dropped = 0;
  REQUIRE(plc_audio_frame_count(in, 16, &frames, &dropped) == PLC_OK);
  CHECK(frames == 10);
  CHECK(dropped == 3);

  std::vector<std::uint8_t> av(frames);
  REQUIRE(plc_loss_pattern(frames, 0.2, PLC_LOSS_EVEN, 0, -1, av.data()) == PLC_OK);
  plc_session* s = nullptr;
  REQUIRE(plc_session_create(cfg, nullptr, &s) == PLC_OK);
  CHECK(plc_session_frame_len(s) == 16);
  plc_audio* out = nullptr;
  REQUIRE(plc_session_process_stream(s, in, av.data(), frames, &out) == PLC_OK);
  REQUIRE(plc_audio_length(out) == 160);
  CHECK(std::memcmp(plc_audio_samples(out), x.data(), 16 * sizeof(float)) == 0);
  CHECK(plc_session_process_stream(s, in, av.data(), 11, &out) == PLC_ERR_CONFIG);

  char* log = nullptr;
  REQUIRE(plc_session_frame_log(s, &log) == PLC_OK);
  const auto text = take(log);
  CHECK(std::count(text.begin(), text.end(), '\n') == 10);

  char* m = nullptr;
  REQUIRE(plc_metrics(x.data(), plc_audio_samples(out), 160, av.data(), frames, 16, 0, R"({"run":"capi"})", &m) ==
          PLC_OK);
  const auto report = nlohmann::json::parse(take(m));
  CHECK(report.at("lost_frames") == 2);
  CHECK(report.at("metadata").at("run") == "capi");

  const auto dir = temp_dir();
  const auto ck = (dir / "s.plcn").string();
  REQUIRE(plc_session_save_checkpoint(s, ck.c_str(), 1) == PLC_OK);
  plc_session* restored = nullptr;
  REQUIRE(plc_session_create(cfg, ck.c_str(), &restored) == PLC_OK);
  plc_session_destroy(restored);

  plc_config* wrong = nullptr;
  plc_config_clone(cfg, &wrong);
  plc_config_set(wrong, "hidden", "9");
  CHECK(plc_session_create(wrong, ck.c_str(), &restored) == PLC_ERR_CONFIG);
  CHECK(plc_session_create(cfg, (dir / "missing.plcn").string().c_str(), &restored) == PLC_ERR_IO);
  {
    std::FILE* f = std::fopen((dir / "bad.plcn").string().c_str(), "wb");
    std::fputs("PLCN garbage", f);
    std::fclose(f);
  }
  CHECK(plc_session_create(cfg, (dir / "bad.plcn").string().c_str(), &restored) == PLC_ERR_INTEGRITY);

  plc_audio* zf = nullptr;
  REQUIRE(plc_conceal_zero_fill(in, av.data(), frames, 16, &zf) == PLC_OK);
  REQUIRE(plc_metrics(x.data(), plc_audio_samples(zf), 160, av.data(), frames, 16, 0, nullptr, &m) == PLC_OK);
  CHECK(nlohmann::json::parse(take(m)).at("segmental_snr_db") == 0.0);
  plc_audio* pe = nullptr;
  REQUIRE(plc_conceal_periodic(in, av.data(), frames, 16, 0, 0, &pe) == PLC_OK);
  CHECK(plc_audio_length(pe) == 160);

  std::vector<float> frame(16, 0.1f), res(16);
  CHECK(plc_session_process_frame(s, frame.data(), 1, res.data()) == PLC_OK);
  CHECK(res[0] == 0.1f);
  CHECK(plc_session_process_frame(s, nullptr, 0, res.data()) == PLC_OK);
  CHECK(plc_session_process_frame(s, nullptr, 1, res.data()) == PLC_ERR_ARGUMENT);

  for (auto* a : {in, out, zf, pe}) plc_audio_destroy(a);
  plc_session_destroy(s);
  plc_config_destroy(wrong);
  plc_config_destroy(cfg);
}

TEST_CASE("wav files through the C API") {
  const auto dir = temp_dir();
  const auto x = tone(800, 200);
  plc_audio* a = nullptr;
  REQUIRE(plc_audio_create(x.data(), x.size(), 8000, &a) == PLC_OK);
  const auto path = (dir / "t.wav").string();
  REQUIRE(plc_audio_write_wav(a, path.c_str()) == PLC_OK);
  plc_audio* b = nullptr;
  REQUIRE(plc_audio_read_wav(path.c_str(), &b) == PLC_OK);
  CHECK(plc_audio_length(b) == 800);
  CHECK(plc_audio_sample_rate(b) == 8000);
  CHECK(plc_audio_read_wav((dir / "none.wav").string().c_str(), &b) == PLC_ERR_IO);
  {
    std::FILE* f = std::fopen((dir / "x.wav").string().c_str(), "wb");
    std::fputs("RIFF....WAVEjunk", f);
    std::fclose(f);
  }
  plc_audio* c = nullptr;
  CHECK(plc_audio_read_wav((dir / "x.wav").string().c_str(), &c) == PLC_ERR_FORMAT);
  plc_audio_destroy(a);
  plc_audio_destroy(b);
}

TEST_CASE("pretraining through the C API") {
  const auto dir = temp_dir() / "corpus";
  std::filesystem::create_directories(dir);
  const auto x = tone(320, 260);
  plc_audio* a = nullptr;
  plc_audio_create(x.data(), x.size(), 8000, &a);
  const auto w = (dir / "a.wav").string();
  plc_audio_write_wav(a, w.c_str());
  plc_audio_destroy(a);
  plc_config* cfg = tiny_config();
  const char* paths[] = {w.c_str()};
  char* report = nullptr;
  const auto ck = (dir / "p.plcn").string();
  REQUIRE(plc_pretrain(cfg, paths, 1, ck.c_str(), &report) == PLC_OK);
  const auto j = nlohmann::json::parse(take(report));
  CHECK(j.at("steps") == 20);
  CHECK(j.at("streams").size() == 1);
  const char* bad[] = {"/nonexistent.wav"};
  CHECK(plc_pretrain(cfg, bad, 1, ck.c_str(), nullptr) == PLC_ERR_CONFIG);
  plc_config_destroy(cfg);
}
