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

// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's math; these are plain loops
// over std::vector written straight from the LSTM and Adam equations.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "lstmplc/lstm.hpp"

namespace oracle {

using Vec = std::vector<double>;
using Mat = std::vector<Vec>;

inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline Mat to_mat(const lstmplc::RealMatrix<double>& m) {
  Mat out(static_cast<std::size_t>(m.rows()), Vec(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline Vec to_vec(const lstmplc::RealVector<double>& v) { return Vec(v.data(), v.data() + v.size()); }

struct Layer {
  Mat W, U;
  Vec b;
  std::size_t hidden() const { return b.size() / 4; }
};

struct Net {
  std::vector<Layer> layers;
  Vec w_out;
  double b_out = 0;
};

inline Net from_params(const lstmplc::NetworkParams<double>& p) {
  Net n;
  for (const auto& l : p.layers) n.layers.push_back({to_mat(l.W), to_mat(l.U), to_vec(l.b)});
  n.w_out = to_vec(p.w_out);
  n.b_out = p.b_out;
  return n;
}

// One step of a vanilla LSTM, gate blocks packed as input|forget|candidate|output.
inline void step(const Layer& p, Vec& h, Vec& c, const Vec& x) {
  const std::size_t H = p.hidden();
  Vec z(4 * H);
  for (std::size_t r = 0; r < 4 * H; ++r) {
    double acc = p.b[r];
    for (std::size_t k = 0; k < x.size(); ++k) acc += p.W[r][k] * x[k];
    for (std::size_t k = 0; k < H; ++k) acc += p.U[r][k] * h[k];
    z[r] = acc;
  }
  for (std::size_t k = 0; k < H; ++k) {
    const double i = logistic(z[k]);
    const double f = logistic(z[H + k]);
    const double g = std::tanh(z[2 * H + k]);
    const double o = logistic(z[3 * H + k]);
    c[k] = f * c[k] + i * g;
    h[k] = o * std::tanh(c[k]);
  }
}

// Stateless sequence run: zero state, one prediction per window.
inline Vec forward(const Net& n, const std::vector<Vec>& windows) {
  std::vector<Vec> h, c;
  for (const auto& l : n.layers) {
    h.emplace_back(l.hidden(), 0.0);
    c.emplace_back(l.hidden(), 0.0);
  }
  Vec out;
  for (const auto& w : windows) {
    Vec x = w;
    for (std::size_t k = 0; k < n.layers.size(); ++k) {
      step(n.layers[k], h[k], c[k], x);
      x = h[k];
    }
    double y = n.b_out;
    for (std::size_t k = 0; k < x.size(); ++k) y += n.w_out[k] * x[k];
    out.push_back(y);
  }
  return out;
}

// Mean squared error over the supervised steps of one sequence.
inline double masked_mse(const Vec& pred, const std::vector<std::optional<double>>& mask) {
  double acc = 0;
  int count = 0;
  for (std::size_t t = 0; t < pred.size(); ++t) {
    if (!mask[t]) continue;
    acc += (pred[t] - *mask[t]) * (pred[t] - *mask[t]);
    ++count;
  }
  return count ? acc / count : 0.0;
}

// Textbook Adam on a single scalar.
struct ScalarAdam {
  double alpha = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  double m = 0, v = 0;
  int t = 0;

  double update(double theta, double g) {
    ++t;
    m = beta1 * m + (1 - beta1) * g;
    v = beta2 * v + (1 - beta2) * g * g;
    const double mhat = m / (1 - std::pow(beta1, t));
    const double vhat = v / (1 - std::pow(beta2, t));
    return theta - alpha * mhat / (std::sqrt(vhat) + eps);
  }
};

// Absolute sample index feeding element e of the window at step t of
// sequence j, for a frame whose first sample has index n0. The final-step
// window of sequence j ends one sample before n0 + j; windows slide by one.
inline std::int64_t window_index(std::int64_t n0, int L, int T, int j, int t, int e) {
  const std::int64_t last = n0 + j - 1 - (T - 1 - t);
  return last - (L - 1 - e);
}

}  // namespace oracle
