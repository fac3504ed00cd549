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

#include "lstmplc/lstm.hpp"

#include <cmath>
#include <string>

namespace lstmplc {

namespace {

template <typename T>
void check_window(const NetworkParams<T>& net, Eigen::Index len) {
  if (len != net.window_len()) {
    config_error("input window has " + std::to_string(len) + " samples, network expects " +
                 std::to_string(net.window_len()));
  }
}

// Applies the gate nonlinearities in place to a 4H x B block of pre-activations.
template <typename Block>
void activate_gates(Block&& z, Eigen::Index hidden) {
  z.topRows(2 * hidden).array() = z.topRows(2 * hidden).array().logistic();
  z.middleRows(2 * hidden, hidden).array() = z.middleRows(2 * hidden, hidden).array().tanh();
  z.bottomRows(hidden).array() = z.bottomRows(hidden).array().logistic();
}

}  // namespace

template <typename T>
LstmLayerParams<T> LstmLayerParams<T>::zeros(int input_size, int hidden_size) {
  if (input_size < 1 || hidden_size < 1) config_error("LSTM layer sizes must be >= 1");
  LstmLayerParams p;
  p.input_size = input_size;
  p.hidden_size = hidden_size;
  p.W = RealMatrix<T>::Zero(4 * hidden_size, input_size);
  p.U = RealMatrix<T>::Zero(4 * hidden_size, hidden_size);
  p.b = RealVector<T>::Zero(4 * hidden_size);
  return p;
}

template <typename T>
LstmState<T> LstmState<T>::zeros(int hidden_size) {
  return {RealVector<T>::Zero(hidden_size), RealVector<T>::Zero(hidden_size)};
}

template <typename T>
NetworkParams<T> NetworkParams<T>::zeros(int window_len, int hidden_size, int num_layers) {
  if (num_layers < 1) config_error("network needs at least one layer");
  NetworkParams net;
  for (int k = 0; k < num_layers; ++k) {
    net.layers.push_back(LstmLayerParams<T>::zeros(k == 0 ? window_len : hidden_size, hidden_size));
  }
  net.w_out = RealVector<T>::Zero(hidden_size);
  net.b_out = 0;
  return net;
}

template <typename T>
std::size_t NetworkParams<T>::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&](std::string_view, std::span<const T> d, Eigen::Index, Eigen::Index) { n += d.size(); });
  return n;
}

template <typename T>
bool NetworkParams<T>::same_shape(const NetworkParams& other) const {
  if (layers.size() != other.layers.size() || w_out.size() != other.w_out.size()) return false;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    if (layers[k].input_size != other.layers[k].input_size ||
        layers[k].hidden_size != other.layers[k].hidden_size) {
      return false;
    }
  }
  return true;
}

template <typename T>
NetworkParams<T> init_network(int window_len, int hidden_size, int num_layers, SeededRng& rng,
                              double init_bound) {
  auto net = NetworkParams<T>::zeros(window_len, hidden_size, num_layers);
  auto bound_for = [&](int fan_in) {
    return init_bound > 0 ? init_bound : 1.0 / std::sqrt(static_cast<double>(fan_in));
  };
  for (auto& layer : net.layers) {
    layer.W = uniform_init<T>(rng, layer.W.rows(), layer.W.cols(), bound_for(layer.input_size));
    layer.U = uniform_init<T>(rng, layer.U.rows(), layer.U.cols(), bound_for(layer.hidden_size));
    layer.b.segment(kForgetGate * hidden_size, hidden_size).setOnes();
  }
  net.w_out = uniform_init<T>(rng, hidden_size, 1, bound_for(hidden_size)).col(0);
  return net;
}

template <typename T>
std::pair<LstmState<T>, GateRecord<T>> layer_step(const LstmLayerParams<T>& p, const LstmState<T>& s,
                                                  const RealVector<T>& x) {
  if (x.size() != p.input_size) {
    config_error("layer_step: input has " + std::to_string(x.size()) + " entries, layer expects " +
                 std::to_string(p.input_size));
  }
  if (s.h.size() != p.hidden_size || s.c.size() != p.hidden_size) {
    config_error("layer_step: state size does not match layer");
  }
  const Eigen::Index H = p.hidden_size;
  GateRecord<T> rec;
  rec.pre = p.W * x + p.U * s.h + p.b;
  rec.i = sigmoid<T>(rec.pre.segment(kInputGate * H, H));
  rec.f = sigmoid<T>(rec.pre.segment(kForgetGate * H, H));
  rec.g = tanh_act<T>(rec.pre.segment(kCandidate * H, H));
  rec.o = sigmoid<T>(rec.pre.segment(kOutputGate * H, H));
  LstmState<T> next;
  next.c = (rec.f.array() * s.c.array() + rec.i.array() * rec.g.array()).matrix();
  next.h = (rec.o.array() * next.c.array().tanh()).matrix();
  return {std::move(next), std::move(rec)};
}

template <typename T>
std::vector<LstmState<T>> zero_state(const NetworkParams<T>& net) {
  std::vector<LstmState<T>> states;
  states.reserve(net.layers.size());
  for (const auto& l : net.layers) states.push_back(LstmState<T>::zeros(l.hidden_size));
  return states;
}

template <typename T>
SequenceInputs<T> SequenceInputs<T>::single(std::span<const RealVector<T>> windows) {
  if (windows.empty()) config_error("sequence must contain at least one window");
  SequenceInputs in;
  const Eigen::Index L = windows.front().size();
  in.bank.resize(L, static_cast<Eigen::Index>(windows.size()));
  for (std::size_t t = 0; t < windows.size(); ++t) {
    if (windows[t].size() != L) config_error("all windows in a sequence must have the same length");
    in.bank.col(static_cast<Eigen::Index>(t)) = windows[t];
    in.column.push_back(static_cast<int>(t));
  }
  in.steps = static_cast<int>(windows.size());
  in.batch = 1;
  return in;
}

template <typename T>
SequenceTargets<T> SequenceTargets<T>::from_mask(int steps, int batch,
                                                 std::span<const std::optional<T>> mask) {
  if (mask.size() != static_cast<std::size_t>(steps) * batch) {
    config_error("target mask length does not match steps x batch");
  }
  SequenceTargets tg;
  tg.value = BatchMatrix<T>::Zero(steps, batch);
  tg.weight = BatchMatrix<T>::Zero(steps, batch);
  for (int b = 0; b < batch; ++b) {
    int count = 0;
    for (int t = 0; t < steps; ++t) count += mask[static_cast<std::size_t>(t) * batch + b].has_value();
    if (count == 0) continue;
    const T w = T(1) / (static_cast<T>(batch) * static_cast<T>(count));
    for (int t = 0; t < steps; ++t) {
      const auto& m = mask[static_cast<std::size_t>(t) * batch + b];
      if (!m) continue;
      tg.value(t, b) = *m;
      tg.weight(t, b) = w;
    }
  }
  return tg;
}

template <typename T>
ForwardTrace<T> forward_batch(const NetworkParams<T>& net, SequenceInputs<T> inputs) {
  if (net.layers.empty()) config_error("network has no layers");
  check_window(net, inputs.bank.rows());
  if (inputs.steps < 1 || inputs.batch < 1) config_error("sequence batch is empty");
  if (inputs.column.size() != static_cast<std::size_t>(inputs.steps) * inputs.batch) {
    config_error("sequence column map does not match steps x batch");
  }
  for (int c : inputs.column) {
    if (c < 0 || c >= inputs.bank.cols()) config_error("sequence column map points outside the window bank");
  }

  const int T_ = inputs.steps;
  const int B = inputs.batch;
  const Eigen::Index TB = static_cast<Eigen::Index>(T_) * B;

  ForwardTrace<T> trace;
  trace.layers.resize(net.layers.size());

  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const auto& p = net.layers[k];
    const Eigen::Index H = p.hidden_size;
    auto& L = trace.layers[k];
    L.gates.resize(4 * H, TB);
    L.cell.resize(H, TB);
    L.tanh_c.resize(H, TB);
    L.hidden.resize(H, TB);

    // Input projections for every step at once.
    if (k == 0) {
      const BatchMatrix<T> projected = p.W * inputs.bank;
      for (Eigen::Index col = 0; col < TB; ++col) {
        L.gates.col(col) = projected.col(inputs.column[static_cast<std::size_t>(col)]) + p.b;
      }
    } else {
      L.gates.noalias() = p.W * trace.layers[k - 1].hidden;
      L.gates.colwise() += p.b;
    }

    for (int t = 0; t < T_; ++t) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(t) * B;
      auto z = L.gates.middleCols(c0, B);
      if (t > 0) z.noalias() += p.U * L.hidden.middleCols(c0 - B, B);
      activate_gates(z, H);
      auto c = L.cell.middleCols(c0, B);
      c.array() = z.topRows(H).array() * z.middleRows(2 * H, H).array();
      if (t > 0) c.array() += z.middleRows(H, H).array() * L.cell.middleCols(c0 - B, B).array();
      L.tanh_c.middleCols(c0, B).array() = c.array().tanh();
      L.hidden.middleCols(c0, B).array() = z.bottomRows(H).array() * L.tanh_c.middleCols(c0, B).array();
    }
  }

  const BatchMatrix<T> flat = net.w_out.transpose() * trace.layers.back().hidden;  // 1 x TB
  trace.predictions.resize(T_, B);
  for (int t = 0; t < T_; ++t) {
    for (int b = 0; b < B; ++b) trace.predictions(t, b) = flat(0, static_cast<Eigen::Index>(t) * B + b) + net.b_out;
  }
  trace.inputs = std::move(inputs);
  return trace;
}

template <typename T>
T masked_loss(const ForwardTrace<T>& trace, const SequenceTargets<T>& targets) {
  return (targets.weight.array() * (trace.predictions - targets.value).array().square()).sum();
}

template <typename T>
Gradients<T> backward_batch(const NetworkParams<T>& net, const ForwardTrace<T>& trace,
                            const SequenceTargets<T>& targets) {
  const int T_ = trace.steps();
  const int B = trace.batch();
  const Eigen::Index TB = static_cast<Eigen::Index>(T_) * B;
  if (targets.value.rows() != T_ || targets.value.cols() != B || targets.weight.rows() != T_ ||
      targets.weight.cols() != B) {
    config_error("targets do not match the trace geometry");
  }
  if (trace.layers.size() != net.layers.size()) config_error("trace does not belong to this network");

  auto grads = Gradients<T>::zeros(net.window_len(), net.hidden_size(), net.num_layers());

  // dLoss/dprediction, laid out step-major like the trace columns.
  RealVector<T> dy(TB);
  for (int t = 0; t < T_; ++t) {
    for (int b = 0; b < B; ++b) {
      dy(static_cast<Eigen::Index>(t) * B + b) =
          T(2) * targets.weight(t, b) * (trace.predictions(t, b) - targets.value(t, b));
    }
  }
  if (dy.isZero(0)) return grads;

  grads.b_out = dy.sum();
  grads.w_out.noalias() = trace.layers.back().hidden * dy;

  // Gradient flowing into the hidden output of the current layer.
  BatchMatrix<T> d_hidden = net.w_out * dy.transpose();  // H x TB

  for (int k = net.num_layers() - 1; k >= 0; --k) {
    const auto& p = net.layers[static_cast<std::size_t>(k)];
    const auto& L = trace.layers[static_cast<std::size_t>(k)];
    auto& g = grads.layers[static_cast<std::size_t>(k)];
    const Eigen::Index H = p.hidden_size;

    BatchMatrix<T> dz(4 * H, TB);
    BatchMatrix<T> dh_rec = BatchMatrix<T>::Zero(H, B);
    BatchMatrix<T> dc_next = BatchMatrix<T>::Zero(H, B);
    BatchMatrix<T> dh(H, B), dc(H, B);

    for (int t = T_ - 1; t >= 0; --t) {
      const Eigen::Index c0 = static_cast<Eigen::Index>(t) * B;
      const auto gates = L.gates.middleCols(c0, B);
      const auto i = gates.topRows(H).array();
      const auto f = gates.middleRows(H, H).array();
      const auto gc = gates.middleRows(2 * H, H).array();
      const auto o = gates.bottomRows(H).array();
      const auto tc = L.tanh_c.middleCols(c0, B).array();

      dh = d_hidden.middleCols(c0, B) + dh_rec;
      dc.array() = dh.array() * o * (T(1) - tc.square()) + dc_next.array();

      auto dzt = dz.middleCols(c0, B);
      dzt.topRows(H).array() = dc.array() * gc * i * (T(1) - i);
      if (t > 0) {
        dzt.middleRows(H, H).array() = dc.array() * L.cell.middleCols(c0 - B, B).array() * f * (T(1) - f);
      } else {
        dzt.middleRows(H, H).setZero();
      }
      dzt.middleRows(2 * H, H).array() = dc.array() * i * (T(1) - gc.square());
      dzt.bottomRows(H).array() = dh.array() * tc * o * (T(1) - o);

      dc_next.array() = dc.array() * f;
      if (t > 0) dh_rec.noalias() = p.U.transpose() * dzt;
    }

    g.b = dz.rowwise().sum();
    if (T_ > 1) {
      g.U.noalias() = dz.rightCols(TB - B) * L.hidden.leftCols(TB - B).transpose();
    }
    if (k > 0) {
      const auto& below = trace.layers[static_cast<std::size_t>(k - 1)];
      g.W.noalias() = dz * below.hidden.transpose();
      d_hidden.noalias() = p.W.transpose() * dz;
    } else {
      // Fold step gradients onto the shared window bank before the outer product.
      const auto& in = trace.inputs;
      BatchMatrix<T> per_window = BatchMatrix<T>::Zero(4 * H, in.bank.cols());
      for (Eigen::Index col = 0; col < TB; ++col) {
        per_window.col(in.column[static_cast<std::size_t>(col)]) += dz.col(col);
      }
      g.W.noalias() = per_window * in.bank.transpose();
    }
  }
  return grads;
}

template <typename T>
ForwardResult<T> network_forward(const NetworkParams<T>& net, std::span<const RealVector<T>> windows) {
  ForwardResult<T> r{{}, forward_batch(net, SequenceInputs<T>::single(windows))};
  r.predictions.assign(r.trace.predictions.data(), r.trace.predictions.data() + r.trace.predictions.size());
  return r;
}

template <typename T>
Gradients<T> bptt_backward(const NetworkParams<T>& net, const ForwardTrace<T>& trace,
                           std::span<const std::optional<T>> target_mask) {
  if (trace.batch() != 1) config_error("bptt_backward expects a single-sequence trace");
  if (target_mask.size() != static_cast<std::size_t>(trace.steps())) {
    config_error("target mask has " + std::to_string(target_mask.size()) + " entries, trace has " +
                 std::to_string(trace.steps()) + " steps");
  }
  return backward_batch(net, trace, SequenceTargets<T>::from_mask(trace.steps(), 1, target_mask));
}

template <typename T>
StepRunner<T>::StepRunner(const NetworkParams<T>& net) : net_(&net), states_(zero_state(net)) {}

template <typename T>
void StepRunner<T>::reset() {
  states_ = zero_state(*net_);
}

template <typename T>
T StepRunner<T>::step(const RealVector<T>& window) {
  check_window(*net_, window.size());
  const RealVector<T>* x = &window;
  for (std::size_t k = 0; k < net_->layers.size(); ++k) {
    const auto& p = net_->layers[k];
    auto& s = states_[k];
    const Eigen::Index H = p.hidden_size;
    gates_.noalias() = p.W * *x;
    gates_.noalias() += p.U * s.h;
    gates_ += p.b;
    activate_gates(gates_, H);
    s.c.array() = gates_.segment(H, H).array() * s.c.array() +
                  gates_.head(H).array() * gates_.segment(2 * H, H).array();
    s.h.array() = gates_.tail(H).array() * s.c.array().tanh();
    x = &s.h;
  }
  return net_->w_out.dot(states_.back().h) + net_->b_out;
}

#define LSTMPLC_INSTANTIATE(T)                                                                        \
  template struct LstmLayerParams<T>;                                                                 \
  template struct LstmState<T>;                                                                       \
  template struct NetworkParams<T>;                                                                   \
  template struct SequenceInputs<T>;                                                                  \
  template struct SequenceTargets<T>;                                                                 \
  template class StepRunner<T>;                                                                       \
  template NetworkParams<T> init_network<T>(int, int, int, SeededRng&, double);                      \
  template std::pair<LstmState<T>, GateRecord<T>> layer_step<T>(const LstmLayerParams<T>&,            \
                                                                const LstmState<T>&,                  \
                                                                const RealVector<T>&);                \
  template std::vector<LstmState<T>> zero_state<T>(const NetworkParams<T>&);                          \
  template ForwardTrace<T> forward_batch<T>(const NetworkParams<T>&, SequenceInputs<T>);              \
  template T masked_loss<T>(const ForwardTrace<T>&, const SequenceTargets<T>&);                       \
  template Gradients<T> backward_batch<T>(const NetworkParams<T>&, const ForwardTrace<T>&,            \
                                          const SequenceTargets<T>&);                                 \
  template ForwardResult<T> network_forward<T>(const NetworkParams<T>&, std::span<const RealVector<T>>); \
  template Gradients<T> bptt_backward<T>(const NetworkParams<T>&, const ForwardTrace<T>&,             \
                                         std::span<const std::optional<T>>);

LSTMPLC_INSTANTIATE(float)
LSTMPLC_INSTANTIATE(double)

}  // namespace lstmplc
