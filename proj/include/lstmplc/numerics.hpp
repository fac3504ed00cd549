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

// Dense linear algebra aliases, activations and the deterministic RNG shared
// by every other module.

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>

#include "lstmplc/error.hpp"

namespace lstmplc {

/// Row-major dense matrix; this is also the on-disk tensor order.
template <typename T>
using RealMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename T>
using RealVector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Column-major work matrix for batched activations (one column per sequence).
template <typename T>
using BatchMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

/// splitmix64-seeded xoshiro256**.
///
/// The four state words are filled with consecutive splitmix64 outputs of the
/// seed. Reals are built from the top 53 bits of a draw, so the sequence is
/// identical on every platform with IEEE-754 doubles.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1).
  double next_unit();

  /// Uniform in [-bound, +bound).
  double next_symmetric(double bound);

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t next_below(std::uint64_t n);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

template <typename T>
RealVector<T> mat_vec_mul(const RealMatrix<T>& m, const RealVector<T>& v) {
  if (m.cols() != v.size()) {
    config_error("mat_vec_mul: matrix has " + std::to_string(m.cols()) +
                 " columns but vector has " + std::to_string(v.size()) + " entries");
  }
  RealVector<T> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    T acc = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) acc += m(i, j) * v(j);
    out(i) = acc;
  }
  return out;
}

template <typename T>
RealVector<T> sigmoid(const RealVector<T>& v) {
  return v.array().logistic().matrix();
}

template <typename T>
RealVector<T> tanh_act(const RealVector<T>& v) {
  return v.array().tanh().matrix();
}

/// Entries drawn i.i.d. from U[-bound, bound] in row-major order.
template <typename T>
RealMatrix<T> uniform_init(SeededRng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  if (!(bound > 0)) config_error("uniform_init: bound must be positive");
  RealMatrix<T> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<T>(rng.next_symmetric(bound));
  return m;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& m) {
  return m.allFinite();
}

template <typename T>
std::span<T> as_span(RealMatrix<T>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename T>
std::span<T> as_span(RealVector<T>& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace lstmplc
