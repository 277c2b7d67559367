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

#include <cmath>
#include <random>

#include "graphmoco/error.hpp"
#include "graphmoco/graph_encoder.hpp"

namespace graphmoco {
namespace {

using Edges = std::vector<std::pair<int, int>>;

Matrix RandomMatrix(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

GraphEncoderOptions SmallOptions() {
  GraphEncoderOptions o;
  o.layers = 2;
  o.hidden_dim = 5;
  return o;
}

TEST(PropagateNodes, HandEvaluatedPath) {
  GraphEncoderOptions o;
  o.layers = 1;
  o.hidden_dim = 1;
  o.output_dim = 1;
  o.two_tuple_enabled = false;
  o.node_norm = false;
  o.activation = Activation::kIdentity;
  GraphEncoderParams p = InitGraphParams(1, o, 0);
  p.layers[0].self_weight = Matrix::Identity(1, 1);
  p.layers[0].neighbor_weight = Matrix::Identity(1, 1);
  p.layers[0].bias = Vector::Zero(1);
  Matrix x(3, 1);
  x << 1, 2, 3;
  const Matrix h = PropagateNodes(x, Edges{{0, 1}, {1, 2}}, p);
  EXPECT_DOUBLE_EQ(h(0, 0), 3.0);
  EXPECT_DOUBLE_EQ(h(1, 0), 6.0);
  EXPECT_DOUBLE_EQ(h(2, 0), 5.0);
}

TEST(EncodeGraph, SingleNodeHasNoAggregation) {
  std::mt19937_64 rng(1);
  const GraphEncoderParams p = InitGraphParams(3, SmallOptions(), 4);
  const Matrix x = RandomMatrix(1, 3, rng);
  Vector h = x.row(0).transpose();
  for (const auto& layer : p.layers) {
    Vector z = layer.self_weight * h + layer.bias;
    z /= std::sqrt(z.squaredNorm() / static_cast<double>(z.size()) + 1e-8);
    h = z.array().tanh().matrix();
  }
  const Vector y = p.readout_weight * h + p.readout_bias;
  const Vector expected = y / y.norm();
  const Vector got = EncodeGraph(x, {}, p);
  ASSERT_EQ(got.size(), kEmbeddingDim);
  EXPECT_LE((got - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EncodeGraph, UnitNormAndZeroNodeRejected) {
  std::mt19937_64 rng(2);
  const GraphEncoderParams p = InitGraphParams(4, SmallOptions(), 1);
  EXPECT_NEAR(EncodeGraph(RandomMatrix(5, 4, rng), Edges{{0, 1}, {1, 2}, {3, 3}}, p).norm(),
              1.0, 1e-12);
  try {
    EncodeGraph(Matrix(0, 4), {}, p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kPrecondition);
  }
}

TEST(EncodeGraph, PermutationInvariant) {
  std::mt19937_64 rng(3);
  for (bool directed : {false, true}) {
    GraphEncoderOptions o = SmallOptions();
    o.directed = directed;
    const GraphEncoderParams p = InitGraphParams(4, o, 7);
    const Matrix x = RandomMatrix(6, 4, rng);
    const Edges edges = {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 5}, {1, 4}};
    const std::vector<int> perm = {4, 2, 5, 0, 3, 1};  // old -> new
    Matrix px(6, 4);
    for (int i = 0; i < 6; ++i) px.row(perm[static_cast<std::size_t>(i)]) = x.row(i);
    Edges pe;
    for (auto [u, v] : edges) pe.emplace_back(perm[static_cast<std::size_t>(u)], perm[static_cast<std::size_t>(v)]);
    EXPECT_LE((EncodeGraph(x, edges, p) - EncodeGraph(px, pe, p)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(EncodeGraph, DirectionOnlyMattersInDirectedMode) {
  std::mt19937_64 rng(4);
  const Matrix x = RandomMatrix(3, 2, rng);
  const GraphEncoderParams u = InitGraphParams(2, SmallOptions(), 2);
  EXPECT_EQ(EncodeGraph(x, Edges{{0, 1}, {1, 2}}, u), EncodeGraph(x, Edges{{1, 0}, {2, 1}}, u));
  GraphEncoderOptions o = SmallOptions();
  o.directed = true;
  const GraphEncoderParams d = InitGraphParams(2, o, 2);
  EXPECT_GT((EncodeGraph(x, Edges{{0, 1}, {1, 2}}, d) - EncodeGraph(x, Edges{{1, 0}, {2, 1}}, d))
                .norm(),
            1e-6);
}

TEST(GraphBatch, PairsAndCap) {
  GraphEncoderOptions o;
  o.two_tuple_node_cap = 3;
  GraphBatch b;
  b.Add(3, Edges{{0, 1}, {1, 0}, {1, 2}, {2, 2}}, o);
  ASSERT_EQ(b.pairs.size(), 2u);  // {0,1} and {1,2}; self-loop excluded
  EXPECT_EQ(b.pair_neighbors[0], std::vector<int>{1});
  b.Add(4, Edges{{0, 1}, {2, 3}}, o);  // over the cap: no pairs
  EXPECT_EQ(b.pairs.size(), 2u);
  b.Add(2, Edges{{1, 0}}, o);
  ASSERT_EQ(b.pairs.size(), 3u);
  EXPECT_EQ(b.pairs[2], (std::pair<int, int>{7, 8}));
  EXPECT_EQ(b.pair_offsets, (std::vector<int>{0, 2, 2, 3}));
  EXPECT_EQ(b.neighbors[2], (std::vector<int>{1, 2}));
}

TEST(GraphBatch, TwoTupleStageChangesEmbedding) {
  std::mt19937_64 rng(5);
  const Matrix x = RandomMatrix(4, 3, rng);
  const Edges edges = {{0, 1}, {1, 2}, {2, 3}};
  GraphEncoderOptions on = SmallOptions();
  GraphEncoderOptions off = on;
  off.two_tuple_enabled = false;
  const GraphEncoderParams p_on = InitGraphParams(3, on, 9);
  GraphEncoderParams p_off = p_on;
  p_off.options = off;
  EXPECT_GT((EncodeGraph(x, edges, p_on) - EncodeGraph(x, edges, p_off)).norm(), 1e-6);
  GraphEncoderParams capped = p_on;
  capped.options.two_tuple_node_cap = 3;
  EXPECT_EQ(EncodeGraph(x, edges, capped), EncodeGraph(x, edges, p_off));
}

TEST(EncodeGraphs, BatchEqualsSingles) {
  std::mt19937_64 rng(6);
  const GraphEncoderParams p = InitGraphParams(3, SmallOptions(), 3);
  std::vector<Matrix> feats;
  std::vector<Edges> edges = {{{0, 1}}, {}, {{0, 1}, {1, 2}, {2, 0}, {1, 1}}};
  GraphBatch batch;
  int rows = 0;
  for (const Edges& e : edges) {
    int n = 0;
    for (auto [a, b] : e) n = std::max({n, a + 1, b + 1});
    n = std::max(n, 1);
    feats.push_back(RandomMatrix(n, 3, rng));
    batch.Add(n, e, p.options);
    rows += n;
  }
  Matrix all(rows, 3);
  int at = 0;
  for (const Matrix& f : feats) {
    all.middleRows(at, f.rows()) = f;
    at += static_cast<int>(f.rows());
  }
  const Matrix out = EncodeGraphs(all, batch, p);
  for (std::size_t g = 0; g < edges.size(); ++g) {
    EXPECT_LE((out.row(static_cast<Eigen::Index>(g)).transpose() - EncodeGraph(feats[g], edges[g], p))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(EncodeGraphs, CouplingLeaksAcrossGroupMembers) {
  std::mt19937_64 rng(7);
  const GraphEncoderParams p = InitGraphParams(2, SmallOptions(), 5);
  GraphBatch batch;
  for (int g = 0; g < 4; ++g) batch.Add(2, Edges{{0, 1}}, p.options);
  Matrix x = RandomMatrix(8, 2, rng);
  const BatchCoupling coupling{2, 1.0};
  const Matrix base = EncodeGraphs(x, batch, p, nullptr, coupling);
  x.row(0) *= 3.0;  // perturb graph 0 only
  const Matrix moved = EncodeGraphs(x, batch, p, nullptr, coupling);
  EXPECT_GT((moved.row(1) - base.row(1)).norm(), 1e-6);   // same group
  EXPECT_EQ((moved.row(2) - base.row(2)).norm(), 0.0);    // other group
}

void CheckGraphGradients(const GraphEncoderOptions& options,
                         const BatchCoupling& coupling, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GraphEncoderParams p = InitGraphParams(3, options, seed);
  GraphBatch batch;
  batch.Add(3, Edges{{0, 1}, {1, 2}, {2, 2}}, options);
  batch.Add(1, {}, options);
  batch.Add(4, Edges{{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}}, options);
  batch.Add(2, Edges{{1, 0}}, options);
  Matrix x = RandomMatrix(10, 3, rng);
  const Matrix c = RandomMatrix(4, options.output_dim, rng);
  auto objective = [&] {
    return (EncodeGraphs(x, batch, p, nullptr, coupling).array() * c.array()).sum();
  };
  GraphCache cache;
  EncodeGraphs(x, batch, p, &cache, coupling);
  GraphEncoderParams grad = p;
  for (auto& l : grad.layers) {
    l.self_weight.setZero();
    l.neighbor_weight.setZero();
    l.out_neighbor_weight.setZero();
    l.bias.setZero();
  }
  grad.pair_self_weight.setZero();
  grad.pair_neighbor_weight.setZero();
  grad.pair_bias.setZero();
  grad.readout_weight.setZero();
  grad.readout_bias.setZero();
  Matrix grad_x;
  EncodeGraphsBackward(c, cache, batch, p, grad, &grad_x, coupling);

  const double eps = 1e-5;
  auto check_all = [&](auto& values, const auto& analytic, const char* name) {
    for (Eigen::Index j = 0; j < values.size(); ++j) {
      const double saved = values.data()[j];
      values.data()[j] = saved + eps;
      const double up = objective();
      values.data()[j] = saved - eps;
      const double down = objective();
      values.data()[j] = saved;
      const double numeric = (up - down) / (2 * eps);
      const double a = analytic.data()[j];
      const double scale = std::max({1.0, std::abs(a), std::abs(numeric)});
      ASSERT_LE(std::abs(a - numeric) / scale, 1e-6) << name << "[" << j << "]";
    }
  };
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    check_all(p.layers[l].self_weight, grad.layers[l].self_weight, "self");
    check_all(p.layers[l].neighbor_weight, grad.layers[l].neighbor_weight, "neighbor");
    check_all(p.layers[l].out_neighbor_weight, grad.layers[l].out_neighbor_weight, "out");
    check_all(p.layers[l].bias, grad.layers[l].bias, "bias");
  }
  check_all(p.pair_self_weight, grad.pair_self_weight, "pair_self");
  check_all(p.pair_neighbor_weight, grad.pair_neighbor_weight, "pair_neighbor");
  check_all(p.pair_bias, grad.pair_bias, "pair_bias");
  check_all(p.readout_weight, grad.readout_weight, "readout");
  check_all(p.readout_bias, grad.readout_bias, "readout_bias");
  check_all(x, grad_x, "input");
}

TEST(EncodeGraphsBackward, MatchesFiniteDifferences) {
  GraphEncoderOptions o;
  o.layers = 2;
  o.hidden_dim = 4;
  o.output_dim = 6;
  CheckGraphGradients(o, {}, 1);
  o.directed = true;
  CheckGraphGradients(o, {}, 2);
  o.two_tuple_enabled = false;
  CheckGraphGradients(o, {}, 3);
  o.node_norm = false;
  CheckGraphGradients(o, {}, 4);
}

TEST(EncodeGraphsBackward, MatchesFiniteDifferencesWithCoupling) {
  GraphEncoderOptions o;
  o.layers = 1;
  o.hidden_dim = 4;
  o.output_dim = 5;
  CheckGraphGradients(o, BatchCoupling{3, 0.7}, 4);
}

}  // namespace
}  // namespace graphmoco
