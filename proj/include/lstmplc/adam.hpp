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

#pragma once

#include <cstdint>
#include <optional>

#include "lstmplc/lstm.hpp"

namespace lstmplc {

struct AdamConfig {
  double alpha = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::optional<double> clip_norm;  // global L2 norm threshold

  void validate() const;
};

template <typename T>
struct AdamState {
  Gradients<T> m;
  Gradients<T> v;
  std::uint64_t t = 0;

  static AdamState for_params(const NetworkParams<T>& params);
};

struct AdamStepResult {
  bool applied = false;    // false when the gradient had a non-finite entry
  double grad_norm = 0.0;  // before clipping
  bool clipped = false;
};

template <typename T>
double global_norm(const Gradients<T>& g);

/// One Adam update in place. A gradient with any non-finite entry leaves
/// params and state untouched and returns applied == false.
template <typename T>
AdamStepResult adam_step(NetworkParams<T>& params, Gradients<T> grads, AdamState<T>& state,
                         const AdamConfig& cfg);

template <typename T>
void reset_optimizer(AdamState<T>& state);

}  // namespace lstmplc
