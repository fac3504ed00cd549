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

#include "lstmplc/plc_engine.hpp"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "lstmplc/error.hpp"

namespace lstmplc {

// --- loss patterns ----------------------------------------------------------

const char* to_string(LossMode mode) { return mode == LossMode::kEven ? "even" : "random"; }

LossMode parse_loss_mode(const std::string& s) {
  if (s == "even") return LossMode::kEven;
  if (s == "random") return LossMode::kRandom;
  config_error("unknown loss pattern '" + s + "' (expected even|random)");
}

std::vector<bool> generate_loss_pattern(std::size_t n_frames, double rate, LossMode mode, std::uint64_t seed,
                                        std::optional<std::size_t> even_offset) {
  if (n_frames < 1) config_error("loss pattern needs at least one frame");
  if (!(rate >= 0.0 && rate < 1.0)) config_error("loss rate must be in [0, 1)");
  std::vector<bool> available(n_frames, true);
  if (rate == 0.0) return available;

  if (mode == LossMode::kEven) {
    const auto period = static_cast<std::size_t>(std::max(1.0, std::round(1.0 / rate)));
    const std::size_t offset = even_offset.value_or(period - 1);
    for (std::size_t i = offset; i < n_frames; i += period) available[i] = false;
  } else {
    SeededRng rng(seed);
    for (std::size_t i = 0; i < n_frames; ++i) available[i] = !(rng.next_unit() < rate);
  }
  available[0] = true;
  return available;
}

// --- configuration ----------------------------------------------------------

namespace {

nlohmann::json optional_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); }

}  // namespace

nlohmann::json config_to_json(const EngineConfig& cfg) {
  const PredictorConfig& p = cfg.predictor;
  return {{"frame_len", p.frame_len},
          {"window", p.window_len},
          {"timesteps", p.time_steps},
          {"hidden", p.hidden},
          {"layers", p.num_layers},
          {"passes", p.passes},
          {"sample_rate", p.sample_rate},
          {"alpha", p.adam.alpha},
          {"beta1", p.adam.beta1},
          {"beta2", p.adam.beta2},
          {"epsilon", p.adam.epsilon},
          {"clip_norm", optional_json(p.adam.clip_norm)},
          {"pretrain_clip_norm", optional_json(p.pretrain_clip_norm)},
          {"init_bound", p.init_bound},
          {"seed", p.seed},
          {"rollout", to_string(p.rollout)},
          {"supervision", to_string(p.supervision)},
          {"precision", cfg.precision == Precision::kF32 ? "f32" : "f64"}};
}

void apply_config_json(EngineConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) config_error("configuration must be a JSON object");
  PredictorConfig& p = cfg.predictor;
  auto optional_real = [](const nlohmann::json& v) -> std::optional<double> {
    if (v.is_null()) return std::nullopt;
    return v.get<double>();
  };
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "frame_len") p.frame_len = v.get<int>();
      else if (key == "window") p.window_len = v.get<int>();
      else if (key == "timesteps") p.time_steps = v.get<int>();
      else if (key == "hidden") p.hidden = v.get<int>();
      else if (key == "layers") p.num_layers = v.get<int>();
      else if (key == "passes") p.passes = v.get<int>();
      else if (key == "sample_rate") p.sample_rate = v.get<std::uint32_t>();
      else if (key == "alpha") p.adam.alpha = v.get<double>();
      else if (key == "beta1") p.adam.beta1 = v.get<double>();
      else if (key == "beta2") p.adam.beta2 = v.get<double>();
      else if (key == "epsilon") p.adam.epsilon = v.get<double>();
      else if (key == "clip_norm") p.adam.clip_norm = optional_real(v);
      else if (key == "pretrain_clip_norm") p.pretrain_clip_norm = optional_real(v);
      else if (key == "init_bound") p.init_bound = v.get<double>();
      else if (key == "seed") p.seed = v.get<std::uint64_t>();
      else if (key == "rollout") p.rollout = parse_rollout_mode(v.get<std::string>());
      else if (key == "supervision") p.supervision = parse_supervision(v.get<std::string>());
      else if (key == "precision") {
        const auto s = v.get<std::string>();
        if (s == "f32") cfg.precision = Precision::kF32;
        else if (s == "f64") cfg.precision = Precision::kF64;
        else config_error("unknown precision '" + s + "' (expected f32|f64)");
      } else {
        config_error("unknown configuration key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    config_error(std::string("invalid configuration value: ") + e.what());
  }
  p.validate();
}

// --- checkpoints ------------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'P', 'L', 'C', 'N'};

class Writer {
 public:
  template <typename U>
  void put(U v) {
    static_assert(std::is_trivially_copyable_v<U>);
    std::uint8_t raw[sizeof(U)];
    std::memcpy(raw, &v, sizeof(U));
    // Little-endian on the wire regardless of host order.
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
    bytes.insert(bytes.end(), std::begin(raw), std::end(raw));
  }
  void put_bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes.insert(bytes.end(), b, b + n);
  }
  std::vector<std::uint8_t> bytes;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> b) : b_(b) {}

  template <typename U>
  U get() {
    need(sizeof(U));
    std::uint8_t raw[sizeof(U)];
    std::memcpy(raw, b_.data() + pos_, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
    pos_ += sizeof(U);
    U v;
    std::memcpy(&v, raw, sizeof(U));
    return v;
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(b_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw Error(ErrorCode::kIntegrity, "checkpoint is truncated");
  }
  std::span<const std::uint8_t> b_;
  std::size_t pos_ = 0;
};

void put_config(Writer& w, const PredictorConfig& p) {
  Writer block;
  for (int v : {p.frame_len, p.window_len, p.time_steps, p.hidden, p.num_layers, p.passes}) block.put<std::int32_t>(v);
  block.put<std::uint32_t>(p.sample_rate);
  for (double v : {p.adam.alpha, p.adam.beta1, p.adam.beta2, p.adam.epsilon}) block.put<double>(v);
  block.put<std::uint8_t>(p.adam.clip_norm.has_value());
  block.put<double>(p.adam.clip_norm.value_or(0.0));
  block.put<std::uint8_t>(p.pretrain_clip_norm.has_value());
  block.put<double>(p.pretrain_clip_norm.value_or(0.0));
  block.put<double>(p.init_bound);
  block.put<std::uint64_t>(p.seed);
  block.put<std::uint8_t>(static_cast<std::uint8_t>(p.rollout));
  block.put<std::uint8_t>(static_cast<std::uint8_t>(p.supervision));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(block.bytes.size()));
  w.put_bytes(block.bytes.data(), block.bytes.size());
}

PredictorConfig get_config(Reader& r) {
  const auto len = r.get<std::uint32_t>();
  const std::size_t start = r.pos();
  PredictorConfig p;
  p.frame_len = r.get<std::int32_t>();
  p.window_len = r.get<std::int32_t>();
  p.time_steps = r.get<std::int32_t>();
  p.hidden = r.get<std::int32_t>();
  p.num_layers = r.get<std::int32_t>();
  p.passes = r.get<std::int32_t>();
  p.sample_rate = r.get<std::uint32_t>();
  p.adam.alpha = r.get<double>();
  p.adam.beta1 = r.get<double>();
  p.adam.beta2 = r.get<double>();
  p.adam.epsilon = r.get<double>();
  const bool has_clip = r.get<std::uint8_t>() != 0;
  const double clip = r.get<double>();
  if (has_clip) p.adam.clip_norm = clip;
  else p.adam.clip_norm.reset();
  const bool has_pre = r.get<std::uint8_t>() != 0;
  const double pre = r.get<double>();
  if (has_pre) p.pretrain_clip_norm = pre;
  p.init_bound = r.get<double>();
  p.seed = r.get<std::uint64_t>();
  p.rollout = static_cast<RolloutMode>(r.get<std::uint8_t>());
  p.supervision = static_cast<Supervision>(r.get<std::uint8_t>());
  if (r.pos() - start != len) throw Error(ErrorCode::kIntegrity, "checkpoint config block has unexpected length");
  if (p.rollout != RolloutMode::kCarried && p.rollout != RolloutMode::kFresh) {
    throw Error(ErrorCode::kIntegrity, "checkpoint config has an invalid rollout mode");
  }
  if (p.supervision != Supervision::kFinalStep && p.supervision != Supervision::kAllSteps) {
    throw Error(ErrorCode::kIntegrity, "checkpoint config has an invalid supervision mode");
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kIntegrity, std::string("checkpoint config is invalid: ") + e.what());
  }
  return p;
}

void put_tensors(Writer& w, const NetworkParams<float>& p, const std::string& prefix) {
  p.for_each_tensor([&](std::string_view name, std::span<const float> data, Eigen::Index rows, Eigen::Index cols) {
    const std::string full = prefix + std::string(name);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(full.size()));
    w.put_bytes(full.data(), full.size());
    w.put<std::uint32_t>(static_cast<std::uint32_t>(rows));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(cols));
    for (float v : data) w.put<float>(v);
  });
}

void get_tensors(Reader& r, NetworkParams<float>& p, const std::string& prefix) {
  p.for_each_tensor([&](std::string_view name, std::span<float> data, Eigen::Index rows, Eigen::Index cols) {
    const std::string expected = prefix + std::string(name);
    const auto len = r.get<std::uint32_t>();
    if (len > 256) throw Error(ErrorCode::kIntegrity, "checkpoint tensor name is implausibly long");
    const std::string got = r.get_string(len);
    if (got != expected) throw Error(ErrorCode::kIntegrity, "checkpoint expected tensor '" + expected + "', found '" + got + "'");
    const auto r_rows = r.get<std::uint32_t>();
    const auto r_cols = r.get<std::uint32_t>();
    if (r_rows != rows || r_cols != cols) {
      throw Error(ErrorCode::kIntegrity, "checkpoint tensor '" + expected + "' has shape " + std::to_string(r_rows) +
                                             "x" + std::to_string(r_cols) + ", config implies " + std::to_string(rows) +
                                             "x" + std::to_string(cols));
    }
    for (float& v : data) v = r.get<float>();
  });
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  return static_cast<std::uint32_t>(::crc32(0L, bytes.data(), static_cast<uInt>(bytes.size())));
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const ModelCheckpoint& ckpt) {
  const PredictorConfig& cfg = ckpt.config;
  const auto shape = NetworkParams<float>::zeros(cfg.window_len, cfg.hidden, cfg.num_layers);
  if (!shape.same_shape(ckpt.params)) config_error("checkpoint parameters do not match their configuration");

  Writer w;
  w.put_bytes(kMagic, 4);
  w.put<std::uint16_t>(kCheckpointVersion);
  put_config(w, cfg);
  w.put<std::uint64_t>(ckpt.meta.seed);
  w.put<std::uint64_t>(ckpt.meta.corpus_hash);
  w.put<std::uint32_t>(ckpt.meta.epochs);
  w.put<std::uint8_t>(ckpt.adam.has_value());
  w.put<std::uint64_t>(ckpt.adam ? ckpt.adam->t : 0);
  const std::uint32_t per_net = static_cast<std::uint32_t>(3 * cfg.num_layers + 2);
  w.put<std::uint32_t>(ckpt.adam ? 3 * per_net : per_net);
  put_tensors(w, ckpt.params, "");
  if (ckpt.adam) {
    put_tensors(w, ckpt.adam->m, "adam.m.");
    put_tensors(w, ckpt.adam->v, "adam.v.");
  }
  w.put<std::uint32_t>(crc32_of(w.bytes));
  return std::move(w.bytes);
}

ModelCheckpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw Error(ErrorCode::kIntegrity, "not a checkpoint (bad magic)");
  }
  if (bytes.size() < 4 + 2 + 4) throw Error(ErrorCode::kIntegrity, "checkpoint is truncated");
  const auto body = bytes.first(bytes.size() - 4);
  Reader tail(bytes.last(4));
  if (tail.get<std::uint32_t>() != crc32_of(body)) {
    throw Error(ErrorCode::kIntegrity, "checkpoint CRC32 mismatch (file corrupt or truncated)");
  }

  Reader r(body);
  r.get_string(4);
  const auto version = r.get<std::uint16_t>();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "checkpoint version " + std::to_string(version) +
                                                    " is not supported (expected " +
                                                    std::to_string(kCheckpointVersion) + ")");
  }
  ModelCheckpoint ckpt;
  ckpt.config = get_config(r);
  ckpt.meta.seed = r.get<std::uint64_t>();
  ckpt.meta.corpus_hash = r.get<std::uint64_t>();
  ckpt.meta.epochs = r.get<std::uint32_t>();
  const bool has_adam = r.get<std::uint8_t>() != 0;
  const auto adam_t = r.get<std::uint64_t>();
  const auto count = r.get<std::uint32_t>();
  const std::uint32_t per_net = static_cast<std::uint32_t>(3 * ckpt.config.num_layers + 2);
  if (count != (has_adam ? 3 * per_net : per_net)) throw Error(ErrorCode::kIntegrity, "checkpoint tensor count mismatch");

  const PredictorConfig& c = ckpt.config;
  ckpt.params = NetworkParams<float>::zeros(c.window_len, c.hidden, c.num_layers);
  get_tensors(r, ckpt.params, "");
  if (has_adam) {
    AdamState<float> st = AdamState<float>::for_params(ckpt.params);
    st.t = adam_t;
    get_tensors(r, st.m, "adam.m.");
    get_tensors(r, st.v, "adam.v.");
    ckpt.adam = std::move(st);
  }
  if (r.pos() != body.size()) throw Error(ErrorCode::kIntegrity, "checkpoint has trailing bytes");
  return ckpt;
}

void save_checkpoint(const ModelCheckpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(ckpt);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "' for reading");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_checkpoint(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void check_compatible(const PredictorConfig& ck, const PredictorConfig& s) {
  if (ck.window_len != s.window_len || ck.hidden != s.hidden || ck.num_layers != s.num_layers) {
    config_error("checkpoint shape (window " + std::to_string(ck.window_len) + ", hidden " + std::to_string(ck.hidden) +
                 ", layers " + std::to_string(ck.num_layers) + ") does not match session (window " +
                 std::to_string(s.window_len) + ", hidden " + std::to_string(s.hidden) + ", layers " +
                 std::to_string(s.num_layers) + ")");
  }
}

template <typename To, typename From>
NetworkParams<To> cast_params(const NetworkParams<From>& p) {
  NetworkParams<To> out;
  for (const auto& l : p.layers) {
    out.layers.push_back({l.input_size, l.hidden_size, l.W.template cast<To>(), l.U.template cast<To>(),
                          l.b.template cast<To>()});
  }
  out.w_out = p.w_out.template cast<To>();
  out.b_out = static_cast<To>(p.b_out);
  return out;
}

template NetworkParams<float> cast_params<float, float>(const NetworkParams<float>&);
template NetworkParams<float> cast_params<float, double>(const NetworkParams<double>&);
template NetworkParams<double> cast_params<double, float>(const NetworkParams<float>&);
template NetworkParams<double> cast_params<double, double>(const NetworkParams<double>&);

std::uint64_t corpus_hash(std::span<const CorpusStream> corpus) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& s : corpus) {
    mix(s.name.data(), s.name.size());
    mix(s.samples.data(), s.samples.size() * sizeof(float));
  }
  return h;
}

// --- sessions ---------------------------------------------------------------

nlohmann::json FrameRecord::to_json() const {
  nlohmann::json j = {{"index", index}, {"lost", lost}, {"wall_ms", wall_ms}};
  if (lost) {
    j["prediction_rms"] = prediction_rms;
    j["prediction_peak"] = prediction_peak;
  } else {
    j["losses"] = losses;
    if (aborted) j["abort"] = abort_reason;
  }
  return j;
}

template <typename T>
PlcSession<T>::PlcSession(PredictorConfig cfg)
    : cfg_((cfg.validate(), std::move(cfg))), history_(SampleHistory::for_config(cfg_)) {
  SeededRng rng(cfg_.seed);
  model_ = init_network<T>(cfg_.window_len, cfg_.hidden, cfg_.num_layers, rng, cfg_.init_bound);
  opt_ = AdamState<T>::for_params(model_);
}

template <typename T>
PlcSession<T>::PlcSession(PredictorConfig cfg, NetworkParams<T> model)
    : cfg_((cfg.validate(), std::move(cfg))), model_(std::move(model)), history_(SampleHistory::for_config(cfg_)) {
  const auto shape = NetworkParams<T>::zeros(cfg_.window_len, cfg_.hidden, cfg_.num_layers);
  if (!shape.same_shape(model_)) {
    config_error("model shape (window " + std::to_string(model_.window_len()) + ", hidden " +
                 std::to_string(model_.hidden_size()) + ", layers " + std::to_string(model_.num_layers()) +
                 ") does not match session configuration");
  }
  opt_ = AdamState<T>::for_params(model_);
}

template <typename T>
std::vector<double> PlcSession<T>::process_frame(std::span<const float> frame, bool available) {
  const auto t0 = std::chrono::steady_clock::now();
  FrameRecord rec;
  rec.index = log_.size();
  rec.lost = !available;
  std::vector<double> out;
  if (available) {
    if (static_cast<int>(frame.size()) != cfg_.frame_len) {
      config_error("frame has " + std::to_string(frame.size()) + " samples, session expects " +
                   std::to_string(cfg_.frame_len));
    }
    out.assign(frame.begin(), frame.end());
    const auto batch = build_batch<T>(history_, out, cfg_);
    TrainReport tr = train_on_frame(model_, opt_, batch, cfg_);
    rec.losses = std::move(tr.pass_losses);
    rec.aborted = tr.aborted;
    rec.abort_reason = std::move(tr.abort_reason);
  } else {
    out = predict_frame(model_, history_, cfg_);
    double sq = 0.0;
    for (double s : out) {
      sq += s * s;
      rec.prediction_peak = std::max(rec.prediction_peak, std::abs(s));
    }
    rec.prediction_rms = std::sqrt(sq / static_cast<double>(out.size()));
  }
  history_.push(std::span<const double>(out));
  rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  log_.push_back(std::move(rec));
  return out;
}

template <typename T>
std::vector<float> PlcSession<T>::process_stream(const FrameStream& stream, const std::vector<bool>& availability) {
  if (availability.size() != stream.frames.size()) {
    config_error("loss pattern has " + std::to_string(availability.size()) + " entries for " +
                 std::to_string(stream.frames.size()) + " frames");
  }
  if (stream.sample_rate != cfg_.sample_rate) {
    config_error("stream sample rate " + std::to_string(stream.sample_rate) + " Hz does not match configured " +
                 std::to_string(cfg_.sample_rate) + " Hz");
  }
  std::vector<float> out;
  out.reserve(stream.frames.size() * static_cast<std::size_t>(cfg_.frame_len));
  for (std::size_t k = 0; k < stream.frames.size(); ++k) {
    if (availability[k]) {
      // Received frames are forwarded untouched.
      process_frame(stream.frames[k], true);
      out.insert(out.end(), stream.frames[k].begin(), stream.frames[k].end());
    } else {
      for (double s : process_frame({}, false)) out.push_back(static_cast<float>(s));
    }
  }
  return out;
}

template <typename T>
ModelCheckpoint PlcSession<T>::checkpoint(const CheckpointMeta& meta, bool include_optimizer) const {
  ModelCheckpoint ck;
  ck.config = cfg_;
  ck.params = cast_params<float>(model_);
  ck.meta = meta;
  if (include_optimizer) {
    AdamState<float> st;
    st.m = cast_params<float>(opt_.m);
    st.v = cast_params<float>(opt_.v);
    st.t = opt_.t;
    ck.adam = std::move(st);
  }
  return ck;
}

template <typename T>
std::string PlcSession<T>::frame_log_jsonl() const {
  std::ostringstream os;
  for (const auto& r : log_) os << r.to_json().dump() << '\n';
  return os.str();
}

template class PlcSession<float>;
template class PlcSession<double>;

// --- pretraining driver -----------------------------------------------------

namespace {

template <typename T>
PretrainOutcome run_pretrain(std::vector<CorpusStream> corpus, std::vector<std::pair<std::string, std::string>> unreadable,
                             const PredictorConfig& cfg) {
  SeededRng rng(cfg.seed);
  auto net = init_network<T>(cfg.window_len, cfg.hidden, cfg.num_layers, rng, cfg.init_bound);
  auto opt = AdamState<T>::for_params(net);
  PretrainOutcome outcome;
  outcome.report = pretrain(net, opt, std::span<const CorpusStream>(corpus), cfg);
  outcome.unreadable = std::move(unreadable);
  outcome.checkpoint.config = cfg;
  outcome.checkpoint.params = cast_params<float>(net);
  outcome.checkpoint.meta = {cfg.seed, corpus_hash(corpus), 1};
  return outcome;
}

}  // namespace

PretrainOutcome pretrain_files(std::span<const std::filesystem::path> paths, const EngineConfig& cfg) {
  cfg.predictor.validate();
  std::vector<CorpusStream> corpus;
  std::vector<std::pair<std::string, std::string>> unreadable;
  for (const auto& path : paths) {
    try {
      AudioBuffer buf = read_wav(path);
      if (buf.sample_rate != cfg.predictor.sample_rate) {
        unreadable.emplace_back(path.string(), "sample rate " + std::to_string(buf.sample_rate) + " Hz, expected " +
                                                   std::to_string(cfg.predictor.sample_rate) + " Hz");
        continue;
      }
      corpus.push_back({path.filename().string(), std::move(buf.samples)});
    } catch (const Error& e) {
      unreadable.emplace_back(path.string(), e.what());
    }
  }
  if (corpus.empty()) config_error("pretraining corpus contains no readable WAV files");
  return cfg.precision == Precision::kF32 ? run_pretrain<float>(std::move(corpus), std::move(unreadable), cfg.predictor)
                                          : run_pretrain<double>(std::move(corpus), std::move(unreadable), cfg.predictor);
}

}  // namespace lstmplc
