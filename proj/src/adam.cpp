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

#include "lstmplc/adam.hpp"

#include <cmath>
#include <span>
#include <string_view>
#include <vector>

namespace lstmplc {

void AdamConfig::validate() const {
  if (!(alpha > 0)) config_error("adam: alpha must be > 0");
  if (!(beta1 >= 0 && beta1 < 1)) config_error("adam: beta1 must be in [0, 1)");
  if (!(beta2 >= 0 && beta2 < 1)) config_error("adam: beta2 must be in [0, 1)");
  if (!(epsilon > 0)) config_error("adam: epsilon must be > 0");
  if (clip_norm && !(*clip_norm > 0)) config_error("adam: clip_norm must be > 0 when set");
}

template <typename T>
AdamState<T> AdamState<T>::for_params(const NetworkParams<T>& params) {
  AdamState s;
  s.m = Gradients<T>::zeros(params.window_len(), params.hidden_size(), params.num_layers());
  s.v = s.m;
  return s;
}

namespace {

template <typename T>
std::vector<std::span<T>> flat_tensors(NetworkParams<T>& p) {
  std::vector<std::span<T>> out;
  p.for_each_tensor([&](std::string_view, std::span<T> d, Eigen::Index, Eigen::Index) { out.push_back(d); });
  return out;
}

}  // namespace

template <typename T>
double global_norm(const Gradients<T>& g) {
  double sq = 0;
  g.for_each_tensor([&](std::string_view, std::span<const T> d, Eigen::Index, Eigen::Index) {
    for (T x : d) sq += static_cast<double>(x) * static_cast<double>(x);
  });
  return std::sqrt(sq);
}

template <typename T>
AdamStepResult adam_step(NetworkParams<T>& params, Gradients<T> grads, AdamState<T>& state,
                         const AdamConfig& cfg) {
  cfg.validate();
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
    config_error("adam_step: gradient or optimizer state shape does not match parameters");
  }
  AdamStepResult result;
  auto g = flat_tensors(grads);
  for (auto d : g) {
    for (T x : d) {
      if (!std::isfinite(x)) return result;
    }
  }
  result.grad_norm = global_norm(grads);
  if (cfg.clip_norm && result.grad_norm > *cfg.clip_norm) {
    const T scale = static_cast<T>(*cfg.clip_norm / result.grad_norm);
    for (auto d : g) {
      for (T& x : d) x *= scale;
    }
    result.clipped = true;
  }

  state.t += 1;
  const T b1 = static_cast<T>(cfg.beta1);
  const T b2 = static_cast<T>(cfg.beta2);
  const T alpha = static_cast<T>(cfg.alpha);
  const T eps = static_cast<T>(cfg.epsilon);
  const T bias1 = static_cast<T>(1.0 - std::pow(cfg.beta1, static_cast<double>(state.t)));
  const T bias2 = static_cast<T>(1.0 - std::pow(cfg.beta2, static_cast<double>(state.t)));

  auto theta = flat_tensors(params);
  auto m = flat_tensors(state.m);
  auto v = flat_tensors(state.v);
  for (std::size_t k = 0; k < theta.size(); ++k) {
    for (std::size_t j = 0; j < theta[k].size(); ++j) {
      const T gj = g[k][j];
      m[k][j] = b1 * m[k][j] + (T(1) - b1) * gj;
      v[k][j] = b2 * v[k][j] + (T(1) - b2) * gj * gj;
      const T m_hat = m[k][j] / bias1;
      const T v_hat = v[k][j] / bias2;
      theta[k][j] -= alpha * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
  result.applied = true;
  return result;
}

template <typename T>
void reset_optimizer(AdamState<T>& state) {
  for (auto* acc : {&state.m, &state.v}) {
    acc->for_each_tensor([](std::string_view, std::span<T> d, Eigen::Index, Eigen::Index) {
      for (T& x : d) x = 0;
    });
  }
  state.t = 0;
}

template struct AdamState<float>;
template struct AdamState<double>;
template double global_norm<float>(const Gradients<float>&);
template double global_norm<double>(const Gradients<double>&);
template AdamStepResult adam_step<float>(NetworkParams<float>&, Gradients<float>, AdamState<float>&,
                                         const AdamConfig&);
template AdamStepResult adam_step<double>(NetworkParams<double>&, Gradients<double>, AdamState<double>&,
                                          const AdamConfig&);
template void reset_optimizer<float>(AdamState<float>&);
template void reset_optimizer<double>(AdamState<double>&);

}  // namespace lstmplc
