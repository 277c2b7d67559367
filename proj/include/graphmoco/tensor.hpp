// Copyright 2026 The GraphMoco Authors. All Rights Reserved.
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

#ifndef GRAPHMOCO_TENSOR_HPP
#define GRAPHMOCO_TENSOR_HPP

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

namespace graphmoco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Embedding tables are row-major so one token's vector is contiguous.
using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// A named, flat view of one parameter array. The first `frozen` elements are
// never trained (the operand PAD row).
struct ParamRef {
  std::string name;
  std::span<double> values;
  std::vector<long> shape;
  std::size_t frozen = 0;
  bool row_major = false;
  // Initialisation scale of the array; optimisers may use it to express
  // step sizes relative to the array's natural magnitude.
  double scale = 1.0;
};

enum class Activation { kTanh, kIdentity };

inline double Activate(Activation act, double x) {
  return act == Activation::kTanh ? std::tanh(x) : x;
}

// Derivative expressed through the activation's output y = act(x).
inline double ActivationSlope(Activation act, double y) {
  return act == Activation::kTanh ? 1.0 - y * y : 1.0;
}

template <typename Derived>
void ActivateInPlace(Activation act, Eigen::DenseBase<Derived>& m) {
  if (act == Activation::kTanh) m = m.derived().array().tanh();
}

std::string ToString(Activation act);
Activation ParseActivation(const std::string& text);

}  // namespace graphmoco

#endif  // GRAPHMOCO_TENSOR_HPP
