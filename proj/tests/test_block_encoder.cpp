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

#include <gtest/gtest.h>

#include <random>

#include "graphmoco/block_encoder.hpp"
#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

StrandCnnParams HandParams() {
  StrandCnnParams p;
  p.windows = {2};
  p.filters = 1;
  p.input_dim = 2;
  p.activation = Activation::kIdentity;
  Matrix w(1, 4);
  w << 1, 0, 0, 1;
  p.weights = {w};
  p.biases = {Vector::Zero(1)};
  return p;
}

TEST(EncodeBlock, HandEvaluatedConvolution) {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  const Vector out = EncodeBlock(x, HandParams());
  ASSERT_EQ(out.size(), 3);
  EXPECT_DOUBLE_EQ(out[0], 9.0);
  EXPECT_DOUBLE_EQ(out[1], 3.0);
  EXPECT_DOUBLE_EQ(out[2], 4.0);
}

TEST(EncodeBlock, SingleInstructionMeanIsExact) {
  const StrandCnnParams p = InitStrandParams({2, 3, 4}, 5, 3, 1);
  const Matrix x = Matrix::Random(1, 6);
  const Vector out = EncodeBlock(x, p);
  ASSERT_EQ(out.size(), p.OutputDim());
  EXPECT_EQ(out.tail(6), x.row(0).transpose());
}

TEST(EncodeBlock, ZeroInputsZeroBiasTanhGiveZeroStrands) {
  StrandCnnParams p = InitStrandParams({2, 3, 4}, 4, 2, 3);
  for (auto& b : p.biases) b.setZero();
  const Vector out = EncodeBlock(Matrix::Zero(5, 4), p);
  EXPECT_EQ(out.head(12).norm(), 0.0);
}

TEST(EncodeBlock, WidthIndependentOfLength) {
  const StrandCnnParams p = InitStrandParams({2, 3, 4}, 7, 4, 3);
  for (int n : {1, 2, 3, 4, 9}) {
    EXPECT_EQ(EncodeBlock(Matrix::Random(n, 8), p).size(), 3 * 7 + 8);
  }
}

TEST(EncodeBlock, EmptyBlockRejected) {
  try {
    EncodeBlock(Matrix(0, 4), InitStrandParams({2}, 1, 2, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(EncodeBlock, AppendingZeroRowKeepsEarlierWindows) {
  StrandCnnParams p = InitStrandParams({2, 3, 4}, 6, 2, 8);
  const Matrix x = Matrix::Random(6, 4);
  Matrix longer(7, 4);
  longer << x, Matrix::Zero(1, 4);
  const Vector a = EncodeBlock(x, p);
  const Vector b = EncodeBlock(longer, p);
  // Extra windows only add candidates to the max.
  for (int i = 0; i < 18; ++i) EXPECT_GE(b[i], a[i] - 1e-15);
}

TEST(EncodeBlock, MonotoneUnderLargerActivations) {
  StrandCnnParams p = HandParams();
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  Matrix y(4, 2);
  y << x, Matrix::Constant(1, 2, 10.0);
  EXPECT_GE(EncodeBlock(y, p)[0], EncodeBlock(x, p)[0]);
}

TEST(InitStrandParams, SeededAndBounded) {
  const StrandCnnParams a = InitStrandParams({2, 3, 4}, 8, 5, 2);
  const StrandCnnParams b = InitStrandParams({2, 3, 4}, 8, 5, 2);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(a.weights[i], b.weights[i]);
    const double bound = 1.0 / std::sqrt(a.windows[i] * 10.0);
    EXPECT_LE(a.weights[i].cwiseAbs().maxCoeff(), bound);
  }
  try {
    InitStrandParams({2, 5}, 8, 5, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(EncodeBlocks, BatchMatchesSingles) {
  const StrandCnnParams p = InitStrandParams({2, 3, 4}, 5, 3, 6);
  const Matrix x = Matrix::Random(9, 6);
  const std::vector<int> offsets = {0, 1, 4, 9};
  const Matrix batch = EncodeBlocks(x, offsets, p);
  for (int b = 0; b < 3; ++b) {
    const Vector single = EncodeBlock(x.middleRows(offsets[b], offsets[b + 1] - offsets[b]), p);
    EXPECT_TRUE(batch.row(b).transpose().isApprox(single, 1e-14));
  }
}

// Scalar objective sum(c .* out) and its central differences.
TEST(EncodeBlocks, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal;
  StrandCnnParams p = InitStrandParams({2, 3, 4}, 3, 2, 21);
  Matrix x(7, 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  const std::vector<int> offsets = {0, 2, 7};
  Matrix c(2, p.OutputDim());
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = normal(rng);

  auto objective = [&](const Matrix& xs, const StrandCnnParams& ps) {
    return (EncodeBlocks(xs, offsets, ps).array() * c.array()).sum();
  };
  BlockBatchCache cache;
  EncodeBlocks(x, offsets, p, &cache);
  StrandCnnParams grad = p;
  for (auto& w : grad.weights) w.setZero();
  for (auto& b : grad.biases) b.setZero();
  Matrix grad_x;
  EncodeBlocksBackward(c, cache, p, grad, &grad_x);

  const double eps = 1e-5;
  auto check = [&](double analytic, double& slot, auto eval) {
    const double saved = slot;
    slot = saved + eps;
    const double up = eval();
    slot = saved - eps;
    const double down = eval();
    slot = saved;
    const double numeric = (up - down) / (2 * eps);
    const double scale = std::max({1.0, std::abs(analytic), std::abs(numeric)});
    EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-4) << analytic << " vs " << numeric;
  };
  for (std::size_t i = 0; i < p.weights.size(); ++i) {
    for (Eigen::Index j = 0; j < p.weights[i].size(); ++j) {
      check(grad.weights[i].data()[j], p.weights[i].data()[j], [&] { return objective(x, p); });
    }
    for (Eigen::Index j = 0; j < p.biases[i].size(); ++j) {
      check(grad.biases[i][j], p.biases[i][j], [&] { return objective(x, p); });
    }
  }
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    check(grad_x.data()[j], x.data()[j], [&] { return objective(x, p); });
  }
}

}  // namespace
}  // namespace graphmoco
