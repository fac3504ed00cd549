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

// Vanilla (no-peephole) stacked LSTM with a linear regression head, plus exact
// backpropagation through time.
//
// Gate layout inside every packed 4H dimension is input | forget | candidate |
// output. States start at zero for every sequence.

#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "lstmplc/numerics.hpp"

namespace lstmplc {

enum Gate : int { kInputGate = 0, kForgetGate = 1, kCandidate = 2, kOutputGate = 3 };

template <typename T>
struct LstmLayerParams {
  int input_size = 0;
  int hidden_size = 0;
  RealMatrix<T> W;  // 4H x input_size
  RealMatrix<T> U;  // 4H x H
  RealVector<T> b;  // 4H

  static LstmLayerParams zeros(int input_size, int hidden_size);
};

template <typename T>
struct LstmState {
  RealVector<T> h;
  RealVector<T> c;

  static LstmState zeros(int hidden_size);
};

/// Activations of the four gates for one step (i, f, g, o) and their
/// pre-activations.
template <typename T>
struct GateRecord {
  RealVector<T> pre;  // 4H
  RealVector<T> i, f, g, o;
};

template <typename T>
struct NetworkParams {
  std::vector<LstmLayerParams<T>> layers;
  RealVector<T> w_out;  // H
  T b_out = 0;

  static NetworkParams zeros(int window_len, int hidden_size, int num_layers);

  int window_len() const { return layers.empty() ? 0 : layers.front().input_size; }
  int hidden_size() const { return layers.empty() ? 0 : layers.front().hidden_size; }
  int num_layers() const { return static_cast<int>(layers.size()); }
  std::size_t parameter_count() const;
  bool same_shape(const NetworkParams& other) const;

  /// Calls f(name, span, rows, cols) for every tensor in checkpoint order:
  /// layer{k}.W, layer{k}.U, layer{k}.b for each layer, then head.w, head.b.
  template <typename F>
  void for_each_tensor(F&& f);
  template <typename F>
  void for_each_tensor(F&& f) const;
};

/// Gradients share the parameter layout.
template <typename T>
using Gradients = NetworkParams<T>;

/// Uniform init with bound 1/sqrt(fan_in) per matrix (or `init_bound` when
/// positive), zero biases except the forget gate at +1, zero head bias.
template <typename T>
NetworkParams<T> init_network(int window_len, int hidden_size, int num_layers, SeededRng& rng,
                              double init_bound = 0.0);

template <typename T>
std::pair<LstmState<T>, GateRecord<T>> layer_step(const LstmLayerParams<T>& p, const LstmState<T>& s,
                                                  const RealVector<T>& x);

template <typename T>
std::vector<LstmState<T>> zero_state(const NetworkParams<T>& net);

/// Batch of equal-length sequences whose input windows are drawn from a bank
/// of distinct windows. Overlapping training sequences share bank columns.
template <typename T>
struct SequenceInputs {
  BatchMatrix<T> bank;      // L x K
  std::vector<int> column;  // steps * batch; bank column of step t, sequence b at t * batch + b
  int steps = 0;
  int batch = 0;

  int window_len() const { return static_cast<int>(bank.rows()); }
  int bank_column(int t, int b) const { return column[static_cast<std::size_t>(t) * batch + b]; }

  /// One sequence, one bank column per step.
  static SequenceInputs single(std::span<const RealVector<T>> windows);
};

/// Per-step targets for a batch. weight == 0 marks a masked step. The loss is
/// sum(weight * (prediction - value)^2).
template <typename T>
struct SequenceTargets {
  BatchMatrix<T> value;   // steps x batch
  BatchMatrix<T> weight;  // steps x batch

  /// Mean over sequences of each sequence's MSE over its unmasked steps.
  /// Sequences with no targets contribute zero.
  static SequenceTargets from_mask(int steps, int batch,
                                   std::span<const std::optional<T>> mask_step_major);
};

/// Everything backpropagation needs. Per layer, columns t*batch .. t*batch+batch-1
/// of each matrix hold step t.
template <typename T>
struct ForwardTrace {
  struct Layer {
    BatchMatrix<T> gates;   // 4H x (steps*batch), activations i|f|g|o
    BatchMatrix<T> cell;    // H x (steps*batch)
    BatchMatrix<T> tanh_c;  // H x (steps*batch)
    BatchMatrix<T> hidden;  // H x (steps*batch)
  };

  SequenceInputs<T> inputs;
  std::vector<Layer> layers;
  BatchMatrix<T> predictions;  // steps x batch

  int steps() const { return inputs.steps; }
  int batch() const { return inputs.batch; }
};

template <typename T>
ForwardTrace<T> forward_batch(const NetworkParams<T>& net, SequenceInputs<T> inputs);

template <typename T>
T masked_loss(const ForwardTrace<T>& trace, const SequenceTargets<T>& targets);

template <typename T>
Gradients<T> backward_batch(const NetworkParams<T>& net, const ForwardTrace<T>& trace,
                            const SequenceTargets<T>& targets);

template <typename T>
struct ForwardResult {
  std::vector<T> predictions;
  ForwardTrace<T> trace;
};

/// Single-sequence forward pass from the zero state.
template <typename T>
ForwardResult<T> network_forward(const NetworkParams<T>& net, std::span<const RealVector<T>> windows);

/// Gradients of the MSE over the unmasked steps of a single-sequence trace.
/// All-masked input yields zero gradients.
template <typename T>
Gradients<T> bptt_backward(const NetworkParams<T>& net, const ForwardTrace<T>& trace,
                           std::span<const std::optional<T>> target_mask);

/// Carried-state evaluation, one window at a time.
template <typename T>
class StepRunner {
 public:
  explicit StepRunner(const NetworkParams<T>& net);

  void reset();
  /// Advances every layer by one step and returns the head output.
  T step(const RealVector<T>& window);

 private:
  const NetworkParams<T>* net_;
  std::vector<LstmState<T>> states_;
  RealVector<T> gates_;
};

// ---------------------------------------------------------------------------

template <typename T>
template <typename F>
void NetworkParams<T>::for_each_tensor(F&& f) {
  for (std::size_t k = 0; k < layers.size(); ++k) {
    auto& l = layers[k];
    const std::string prefix = "layer" + std::to_string(k);
    f(std::string_view(prefix + ".W"), as_span(l.W), l.W.rows(), l.W.cols());
    f(std::string_view(prefix + ".U"), as_span(l.U), l.U.rows(), l.U.cols());
    f(std::string_view(prefix + ".b"), as_span(l.b), l.b.rows(), Eigen::Index{1});
  }
  f(std::string_view("head.w"), as_span(w_out), Eigen::Index{1}, w_out.rows());
  f(std::string_view("head.b"), std::span<T>(&b_out, 1), Eigen::Index{1}, Eigen::Index{1});
}

template <typename T>
template <typename F>
void NetworkParams<T>::for_each_tensor(F&& f) const {
  const_cast<NetworkParams*>(this)->for_each_tensor(
      [&](std::string_view name, std::span<T> data, Eigen::Index rows, Eigen::Index cols) {
        f(name, std::span<const T>(data.data(), data.size()), rows, cols);
      });
}

}  // namespace lstmplc
