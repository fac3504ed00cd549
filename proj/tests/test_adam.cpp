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
#include <limits>
#include <vector>

#include "lstmplc/adam.hpp"
#include "oracles.hpp"

using namespace lstmplc;

namespace {

template <typename T>
std::vector<T> flatten(const NetworkParams<T>& p) {
  std::vector<T> out;
  p.for_each_tensor([&](std::string_view, std::span<const T> d, Eigen::Index, Eigen::Index) {
    out.insert(out.end(), d.begin(), d.end());
  });
  return out;
}

template <typename T>
void fill(NetworkParams<T>& p, SeededRng& rng, double amp) {
  p.for_each_tensor([&](std::string_view, std::span<T> d, Eigen::Index, Eigen::Index) {
    for (T& x : d) x = static_cast<T>(rng.next_symmetric(amp));
  });
}

AdamConfig plain() { return {1e-3, 0.9, 0.999, 1e-8, std::nullopt}; }

}  // namespace

TEST_SUITE("adam") {

TEST_CASE("first step of a scalar") {
  auto p = NetworkParams<double>::zeros(1, 1, 1);
  auto g = NetworkParams<double>::zeros(1, 1, 1);
  g.b_out = 1.0;
  auto st = AdamState<double>::for_params(p);
  const auto r = adam_step(p, g, st, plain());
  CHECK(r.applied);
  CHECK(st.t == 1);
  CHECK(p.b_out == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(p.layers[0].W.isZero());
}

TEST_CASE("zero gradient leaves params and counts the step") {
  SeededRng rng(1);
  auto p = init_network<float>(3, 4, 2, rng);
  const auto before = flatten(p);
  auto st = AdamState<float>::for_params(p);
  const auto r = adam_step(p, NetworkParams<float>::zeros(3, 4, 2), st, plain());
  CHECK(r.applied);
  CHECK(st.t == 1);
  CHECK(flatten(p) == before);
}

TEST_CASE("ten-step trajectories match the scalar reference") {
  SeededRng rng(42);
  auto p = init_network<double>(2, 3, 2, rng);
  auto st = AdamState<double>::for_params(p);
  const auto start = flatten(p);
  std::vector<oracle::ScalarAdam> ref(start.size());
  std::vector<double> theta = start;
  for (int step = 0; step < 10; ++step) {
    auto g = NetworkParams<double>::zeros(2, 3, 2);
    fill(g, rng, 2.0);
    const auto gf = flatten(g);
    REQUIRE(adam_step(p, g, st, plain()).applied);
    for (std::size_t k = 0; k < theta.size(); ++k) theta[k] = ref[k].update(theta[k], gf[k]);
  }
  const auto got = flatten(p);
  double worst = 0;
  for (std::size_t k = 0; k < got.size(); ++k) worst = std::max(worst, std::abs(got[k] - theta[k]));
  CHECK(worst <= 1e-12);
  const auto v = flatten(st.v);
  for (double x : v) CHECK(x >= 0.0);
}

TEST_CASE("clipping bounds the applied gradient norm") {
  SeededRng rng(6);
  auto p = NetworkParams<double>::zeros(3, 3, 1);
  auto g = p;
  fill(g, rng, 5.0);
  const double norm = global_norm(g);
  REQUIRE(norm > 1.0);
  AdamConfig cfg = plain();
  cfg.clip_norm = 1.0;
  auto st = AdamState<double>::for_params(p);
  const auto r = adam_step(p, g, st, cfg);
  CHECK(r.clipped);
  CHECK(r.grad_norm == doctest::Approx(norm));
  // After one step m = (1 - beta1) * clipped gradient.
  CHECK(global_norm(st.m) / (1 - cfg.beta1) <= 1.0 + 1e-6);

  auto small = NetworkParams<double>::zeros(3, 3, 1);
  small.b_out = 0.5;
  const auto r2 = adam_step(p, small, st, cfg);
  CHECK_FALSE(r2.clipped);
}

TEST_CASE("non-finite gradient skips the step") {
  SeededRng rng(3);
  auto p = init_network<float>(2, 2, 1, rng);
  auto st = AdamState<float>::for_params(p);
  auto g = NetworkParams<float>::zeros(2, 2, 1);
  g.b_out = 1;
  adam_step(p, g, st, plain());
  const auto before = flatten(p);
  const auto m_before = flatten(st.m);
  g.layers[0].U(1, 1) = std::numeric_limits<float>::quiet_NaN();
  const auto r = adam_step(p, g, st, plain());
  CHECK_FALSE(r.applied);
  CHECK(st.t == 1);
  CHECK(flatten(p) == before);
  CHECK(flatten(st.m) == m_before);
  g.layers[0].U(1, 1) = std::numeric_limits<float>::infinity();
  CHECK_FALSE(adam_step(p, g, st, plain()).applied);
}

TEST_CASE("reset_optimizer") {
  SeededRng rng(8);
  auto p = init_network<double>(2, 3, 1, rng);
  auto q = p;
  auto st = AdamState<double>::for_params(p);
  auto g = NetworkParams<double>::zeros(2, 3, 1);
  fill(g, rng, 1.0);
  for (int k = 0; k < 3; ++k) adam_step(p, g, st, plain());
  reset_optimizer(st);
  CHECK(st.t == 0);
  for (double x : flatten(st.m)) CHECK(x == 0.0);
  for (double x : flatten(st.v)) CHECK(x == 0.0);
  auto twice = st;
  reset_optimizer(twice);
  CHECK(flatten(twice.m) == flatten(st.m));
  CHECK(twice.t == st.t);

  // A step after reset behaves like a step on a fresh state.
  auto fresh = AdamState<double>::for_params(q);
  q = p;
  adam_step(p, g, st, plain());
  adam_step(q, g, fresh, plain());
  CHECK(flatten(p) == flatten(q));
  CHECK(flatten(st.v) == flatten(fresh.v));
}

TEST_CASE("determinism over a hundred steps") {
  auto run = [] {
    SeededRng rng(55);
    auto p = init_network<float>(4, 5, 2, rng);
    auto st = AdamState<float>::for_params(p);
    for (int k = 0; k < 100; ++k) {
      auto g = NetworkParams<float>::zeros(4, 5, 2);
      fill(g, rng, 1.0);
      adam_step(p, g, st, AdamConfig{});
    }
    return flatten(p);
  };
  CHECK(run() == run());
}

TEST_CASE("config validation") {
  AdamConfig c;
  CHECK_NOTHROW(c.validate());
  c.beta1 = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.alpha = 0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.clip_norm = -1;
  CHECK_THROWS_AS(c.validate(), Error);
  auto p = NetworkParams<double>::zeros(2, 2, 1);
  auto st = AdamState<double>::for_params(NetworkParams<double>::zeros(2, 3, 1));
  CHECK_THROWS_AS(adam_step(p, p, st, AdamConfig{}), Error);
}

}  // TEST_SUITE
