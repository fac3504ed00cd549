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
#include <numbers>
#include <set>
#include <vector>

#include "lstmplc/predictor.hpp"
#include "oracles.hpp"

using namespace lstmplc;

namespace {

PredictorConfig small_config(int N, int L, int T, int H, int layers = 1, int passes = 1) {
  PredictorConfig cfg;
  cfg.frame_len = N;
  cfg.window_len = L;
  cfg.time_steps = T;
  cfg.hidden = H;
  cfg.num_layers = layers;
  cfg.passes = passes;
  return cfg;
}

std::vector<double> sinusoid(std::size_t n, double freq, double amp = 0.5, double rate = 8000, double phase = 0) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = amp * std::sin(2 * std::numbers::pi * freq * k / rate + phase);
  return out;
}

template <typename T>
std::vector<T> flatten(const NetworkParams<T>& p) {
  std::vector<T> out;
  p.for_each_tensor([&](std::string_view, std::span<const T> d, Eigen::Index, Eigen::Index) {
    out.insert(out.end(), d.begin(), d.end());
  });
  return out;
}

std::span<const double> frame_of(const std::vector<double>& x, std::size_t k, int N) {
  return std::span<const double>(x).subspan(k * static_cast<std::size_t>(N), static_cast<std::size_t>(N));
}

}  // namespace

TEST_SUITE("predictor") {

TEST_CASE("history ring buffer") {
  SampleHistory h(4);
  CHECK(h.at(0) == 0.0);
  const std::vector<double> a{1, 2, 3, 4, 5, 6};
  h.push(a);
  CHECK(h.end_index() == 6);
  CHECK(h.size() == 4);
  CHECK(h.at(-1) == 0.0);
  CHECK(h.at(1) == 0.0);  // evicted
  CHECK(h.at(2) == 3.0);
  CHECK(h.at(5) == 6.0);
  CHECK(h.at(6) == 0.0);  // not yet received

  const auto cfg = small_config(80, 80, 160, 8);
  CHECK(SampleHistory::for_config(cfg).capacity() == 240);
  CHECK(SampleHistory::for_config(small_config(7, 3, 2, 2)).capacity() == 7);
}

TEST_CASE("batch geometry by hand") {
  // history (..., a, b, c, d), frame (e, f)
  const auto cfg = small_config(2, 3, 2, 2);
  SampleHistory h(16);
  const std::vector<double> pre{0.9, 0.8, 0.1, 0.2, 0.3, 0.4};
  h.push(pre);
  const std::vector<double> frame{0.5, 0.6};
  const auto b = build_batch<double>(h, frame, cfg);
  const double a = 0.1, bb = 0.2, c = 0.3, d = 0.4, e = 0.5, f = 0.6;
  auto eq = [](const RealVector<double>& v, std::initializer_list<double> want) {
    REQUIRE(v.size() == static_cast<Eigen::Index>(want.size()));
    int k = 0;
    for (double w : want) CHECK(v(k++) == w);
  };
  eq(b.window(0, 0), {a, bb, c});
  eq(b.window(0, 1), {bb, c, d});
  CHECK(b.target(0) == e);
  eq(b.window(1, 0), {bb, c, d});
  eq(b.window(1, 1), {c, d, e});
  CHECK(b.target(1) == f);
}

TEST_CASE("batch geometry against a brute-force enumerator") {
  for (int N = 1; N <= 8; ++N)
    for (int L = 1; L <= 8; ++L)
      for (int T = 1; T <= 8; ++T)
        for (int have : {0, 3, 40}) {
          const auto cfg = small_config(N, L, T, 2);
          SampleHistory h = SampleHistory::for_config(cfg);
          std::vector<double> pre(static_cast<std::size_t>(have));
          for (int i = 0; i < have; ++i) pre[i] = (i + 1) * 1e-3;
          h.push(pre);
          std::vector<double> frame(static_cast<std::size_t>(N));
          for (int j = 0; j < N; ++j) frame[j] = -(have + j + 1) * 1e-3;
          const auto value_at = [&](std::int64_t idx) {
            if (idx < 0) return 0.0;
            return idx < have ? pre[idx] : frame[idx - have];
          };
          const auto b = build_batch<double>(h, frame, cfg);
          const auto in = b.inputs();
          const auto tg = b.targets();
          bool ok = true;
          for (int j = 0; j < N; ++j) {
            ok = ok && b.target(j) == value_at(have + j);
            ok = ok && tg.value(T - 1, j) == value_at(have + j);
            for (int t = 0; t < T; ++t) {
              const auto w = b.window(j, t);
              const auto col = in.bank.col(in.bank_column(t, j));
              for (int e = 0; e < L; ++e) {
                const double want = value_at(oracle::window_index(have, L, T, j, t, e));
                ok = ok && w(e) == want && col(e) == want;
              }
            }
          }
          CAPTURE(N);
          CAPTURE(L);
          CAPTURE(T);
          CAPTURE(have);
          CHECK(ok);
        }
}

TEST_CASE("80/80/160 batch spans 239 history samples per sequence") {
  const auto cfg = small_config(80, 80, 160, 8);
  CHECK(cfg.context_len() == 239);
  SampleHistory h = SampleHistory::for_config(cfg);
  std::vector<double> pre(400);
  for (int i = 0; i < 400; ++i) pre[i] = i * 1e-3;
  h.push(pre);
  const std::vector<double> frame(80, 0.0);
  const auto b = build_batch<float>(h, frame, cfg);
  CHECK(b.context_start() == 400 - 239);
  for (int j = 0; j < 80; ++j) {
    std::set<long> seen;
    for (int t = 0; t < 160; ++t)
      for (int e = 0; e < 80; ++e) seen.insert(oracle::window_index(400, 80, 160, j, t, e));
    CHECK(seen.size() == 239);
    CHECK(*seen.rbegin() == 400 + j - 1);
  }
  CHECK_THROWS_AS(build_batch<float>(h, std::vector<double>(79), cfg), Error);
}

TEST_CASE("batched gradients match finite differences") {
  constexpr double kEps = 1e-5;
  for (auto mode : {Supervision::kFinalStep, Supervision::kAllSteps}) {
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
      SeededRng rng(seed);
      auto cfg = small_config(3, 2, 3, 3, 1 + static_cast<int>(seed % 2));
      cfg.supervision = mode;
      auto net = init_network<double>(cfg.window_len, cfg.hidden, cfg.num_layers, rng, 1.0);
      SampleHistory h = SampleHistory::for_config(cfg);
      std::vector<double> pre(5), frame(3);
      for (auto& v : pre) v = rng.next_symmetric(0.9);
      for (auto& v : frame) v = rng.next_symmetric(0.9);
      h.push(pre);
      const auto b = build_batch<double>(h, frame, cfg);
      const auto tg = b.targets(mode);
      const auto g = flatten(backward_batch(net, forward_batch(net, b.inputs()), tg));

      auto loss = [&](const NetworkParams<double>& p) {
        const auto on = oracle::from_params(p);
        double acc = 0;
        for (int j = 0; j < cfg.frame_len; ++j) {
          std::vector<oracle::Vec> w;
          for (const auto& v : b.sequence_windows(j)) w.push_back(oracle::to_vec(v));
          const auto pred = oracle::forward(on, w);
          for (int t = 0; t < cfg.time_steps; ++t) acc += tg.weight(t, j) * std::pow(pred[t] - tg.value(t, j), 2);
        }
        return acc;
      };
      std::vector<double> numeric;
      auto probe = net;
      probe.for_each_tensor([&](std::string_view, std::span<double> d, Eigen::Index, Eigen::Index) {
        for (double& v : d) {
          const double keep = v;
          v = keep + kEps;
          const double up = loss(probe);
          v = keep - kEps;
          const double down = loss(probe);
          v = keep;
          numeric.push_back((up - down) / (2 * kEps));
        }
      });
      double worst = 0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        worst = std::max(worst, std::abs(g[k] - numeric[k]) / std::max({std::abs(g[k]), std::abs(numeric[k]), 1e-6}));
      }
      CHECK(worst < 1e-4);
    }
  }
}

TEST_CASE("zero passes is a bit-exact no-op") {
  auto cfg = small_config(8, 4, 4, 5, 1, 0);
  SeededRng rng(1);
  auto net = init_network<float>(4, 5, 1, rng);
  auto opt = AdamState<float>::for_params(net);
  const auto before = flatten(net);
  SampleHistory h = SampleHistory::for_config(cfg);
  const auto x = sinusoid(8, 300);
  const auto r = train_on_frame(net, opt, build_batch<float>(h, x, cfg), cfg);
  CHECK(r.pass_losses.empty());
  CHECK(flatten(net) == before);
  CHECK(opt.t == 0);
  CHECK(flatten(opt.m) == flatten(AdamState<float>::for_params(net).m));
}

TEST_CASE("loss on a silent frame does not increase") {
  auto cfg = small_config(16, 8, 8, 8, 1, 20);
  SeededRng rng(3);
  auto net = init_network<float>(8, 8, 1, rng);
  auto opt = AdamState<float>::for_params(net);
  SampleHistory h = SampleHistory::for_config(cfg);
  const std::vector<double> zeros(16, 0.0);
  const auto r = train_on_frame(net, opt, build_batch<float>(h, zeros, cfg), cfg);
  REQUIRE(r.pass_losses.size() == 20);
  int monotone = 0;
  for (std::size_t p = 1; p < r.pass_losses.size(); ++p) monotone += r.pass_losses[p] <= r.pass_losses[p - 1];
  monotone += 1;  // the first pass has nothing to compare against
  CHECK(monotone >= 18);
}

TEST_CASE("online training on a sinusoid reduces the loss") {
  auto cfg = small_config(80, 40, 80, 40, 1, 20);
  SeededRng rng(cfg.seed);
  auto net = init_network<float>(40, 40, 1, rng);
  auto opt = AdamState<float>::for_params(net);
  SampleHistory h = SampleHistory::for_config(cfg);
  const auto x = sinusoid(80 * 51, 200);
  double first = 0, last = 0;
  for (std::size_t k = 0; k < 51; ++k) {
    const auto fr = frame_of(x, k, 80);
    const auto r = train_on_frame(net, opt, build_batch<float>(h, fr, cfg), cfg);
    REQUIRE_FALSE(r.aborted);
    if (k == 0) first = r.pass_losses.front();
    if (k == 50) last = r.pass_losses.back();
    h.push(fr);
  }
  CHECK(last < first);
}

TEST_CASE("a small network overfits one frame") {
  auto cfg = small_config(80, 16, 16, 16, 1, 500);
  SeededRng rng(cfg.seed);
  auto net = init_network<float>(16, 16, 1, rng);
  auto opt = AdamState<float>::for_params(net);
  SampleHistory h = SampleHistory::for_config(cfg);
  const auto x = sinusoid(80 * 2, 250);
  h.push(frame_of(x, 0, 80));
  const auto b = build_batch<float>(h, frame_of(x, 1, 80), cfg);
  const auto r = train_on_frame(net, opt, b, cfg);
  const double final_loss = masked_loss(forward_batch(net, b.inputs()), b.targets());
  MESSAGE("first loss " << r.pass_losses.front() << ", final loss " << final_loss);
  CHECK(final_loss < 1e-4);
}

TEST_CASE("constant head predicts its clamped bias") {
  auto cfg = small_config(10, 4, 3, 2);
  auto net = NetworkParams<double>::zeros(4, 2, 1);
  net.b_out = 0.3;
  SampleHistory h = SampleHistory::for_config(cfg);
  h.push(sinusoid(30, 500));
  for (double y : predict_frame(net, h, cfg)) CHECK(y == doctest::Approx(0.3));
  net.b_out = 4.0;
  for (double y : predict_frame(net, h, cfg)) CHECK(y == 1.0);
  net.b_out = std::numeric_limits<double>::quiet_NaN();
  for (double y : predict_frame(net, h, cfg)) CHECK(y == 0.0);
}

TEST_CASE("predictions are clamped and deterministic") {
  auto cfg = small_config(40, 6, 5, 7, 2);
  SeededRng rng(12);
  auto net = init_network<float>(6, 7, 2, rng, 3.0);
  net.w_out *= 10.0f;
  SampleHistory h = SampleHistory::for_config(cfg);
  h.push(sinusoid(100, 700, 0.9));
  const auto a = predict_frame(net, h, cfg);
  const auto b = predict_frame(net, h, cfg);
  CHECK(a == b);
  bool saturated = false;
  for (double y : a) {
    CHECK(y >= -1.0);
    CHECK(y <= 1.0);
    saturated = saturated || std::abs(y) == 1.0;
  }
  CHECK(saturated);
}

TEST_CASE("rollout modes match explicit recomputation") {
  for (auto mode : {RolloutMode::kCarried, RolloutMode::kFresh}) {
    auto cfg = small_config(6, 3, 4, 4, 2);
    cfg.rollout = mode;
    SeededRng rng(21);
    auto net = init_network<double>(3, 4, 2, rng, 1.0);
    SampleHistory h = SampleHistory::for_config(cfg);
    auto x = sinusoid(23, 450, 0.8);
    h.push(x);
    const auto got = predict_frame(net, h, cfg);
    const auto on = oracle::from_params(net);
    const std::int64_t n0 = 23;
    auto win = [&](std::int64_t last) {
      oracle::Vec w;
      for (std::int64_t i = last - 2; i <= last; ++i) w.push_back(i < 0 ? 0.0 : x[static_cast<std::size_t>(i)]);
      return w;
    };
    for (int k = 0; k < 6; ++k) {
      std::vector<oracle::Vec> ws;
      const std::int64_t first = mode == RolloutMode::kCarried ? n0 - 4 : n0 + k - 4;
      for (std::int64_t last = first; last <= n0 + k - 1; ++last) ws.push_back(win(last));
      const double want = std::clamp(oracle::forward(on, ws).back(), -1.0, 1.0);
      CHECK(std::abs(got[k] - want) <= 1e-12);
      x.push_back(want);
    }
  }
}

TEST_CASE("a fitted network continues a period-8 wave") {
  const std::vector<double> period{0.6, 0.6, 0.5, 0.2, -0.6, -0.6, -0.5, -0.2};
  // Carried state runs up to N - 1 steps past T, so T must not be short next to N.
  auto cfg = small_config(16, 8, 16, 16, 1, 50);
  cfg.adam.alpha = 1e-2;
  SeededRng rng(cfg.seed);
  auto net = init_network<float>(8, 16, 1, rng);
  auto opt = AdamState<float>::for_params(net);
  SampleHistory h = SampleHistory::for_config(cfg);
  std::vector<double> frame(16);
  for (int k = 0; k < 16; ++k) frame[k] = period[k % 8];
  double loss = 1;
  for (int f = 0; f < 60 && loss > 1e-6; ++f) {
    const auto r = train_on_frame(net, opt, build_batch<float>(h, frame, cfg), cfg);
    loss = r.pass_losses.back();
    h.push(frame);
  }
  const auto pred = predict_frame(net, h, cfg);
  double worst = 0;
  for (int k = 0; k < 16; ++k) worst = std::max(worst, std::abs(pred[k] - period[k % 8]));
  MESSAGE("final training loss " << loss << ", worst sample error " << worst);
  CHECK(worst < 0.05);
}

TEST_CASE("pretraining step accounting") {
  auto cfg = small_config(8, 4, 4, 3);
  SeededRng rng(2);
  auto net = init_network<float>(4, 3, 1, rng);
  const auto before = flatten(net);
  auto opt = AdamState<float>::for_params(net);

  const auto empty = pretrain(net, opt, std::span<const CorpusStream>{}, cfg);
  CHECK(empty.steps == 0);
  CHECK(flatten(net) == before);

  std::vector<CorpusStream> one{{"silence", std::vector<float>(8, 0.0f)}};
  const auto r = pretrain(net, opt, std::span<const CorpusStream>(one), cfg);
  CHECK(r.steps == 1);
  CHECK(opt.t == 1);
  REQUIRE(r.streams.size() == 1);
  CHECK(r.streams[0].frames == 1);

  std::vector<CorpusStream> bad{{"loud", std::vector<float>(8, 2.0f)}};
  const auto rb = pretrain(net, opt, std::span<const CorpusStream>(bad), cfg);
  CHECK(rb.streams[0].skipped);
  CHECK(opt.t == 1);
}

TEST_CASE("pretrain order is a seeded permutation") {
  const auto a = pretrain_order(50, 7);
  CHECK(a == pretrain_order(50, 7));
  CHECK(a != pretrain_order(50, 8));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 50);
}

TEST_CASE("pretraining on sinusoids helps on a held-out sinusoid") {
  auto cfg = small_config(80, 16, 16, 16);
  SeededRng rng(cfg.seed);
  auto net = init_network<float>(16, 16, 1, rng);
  const auto fresh = net;
  auto opt = AdamState<float>::for_params(net);
  std::vector<CorpusStream> corpus;
  for (int k = 0; k < 20; ++k) {
    const auto s = sinusoid(1600, 150 + 20 * k, 0.5, 8000, 0.3 * k);
    corpus.push_back({"sin" + std::to_string(k), std::vector<float>(s.begin(), s.end())});
  }
  pretrain(net, opt, std::span<const CorpusStream>(corpus), cfg);

  const auto held = sinusoid(800, 333, 0.5, 8000, 1.0);
  auto mse = [&](const NetworkParams<float>& p) {
    SampleHistory h = SampleHistory::for_config(cfg);
    double acc = 0;
    for (std::size_t f = 0; f < 10; ++f) {
      const auto b = build_batch<float>(h, frame_of(held, f, 80), cfg);
      if (f >= 2) acc += masked_loss(forward_batch(p, b.inputs()), b.targets());
      h.push(frame_of(held, f, 80));
    }
    return acc / 8;
  };
  const double before = mse(fresh), after = mse(net);
  MESSAGE("held-out MSE random init " << before << ", pretrained " << after);
  CHECK(after < before);
}

TEST_CASE("config validation and mode names") {
  PredictorConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.window_len = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.passes = -1;
  CHECK_THROWS_AS(cfg.validate(), Error);
  CHECK(parse_rollout_mode("fresh") == RolloutMode::kFresh);
  CHECK(std::string(to_string(Supervision::kAllSteps)) == "all");
  CHECK_THROWS_AS(parse_supervision("most"), Error);
}

}  // TEST_SUITE
