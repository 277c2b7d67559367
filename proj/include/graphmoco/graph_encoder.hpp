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

#ifndef GRAPHMOCO_GRAPH_ENCODER_HPP
#define GRAPHMOCO_GRAPH_ENCODER_HPP

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "graphmoco/tensor.hpp"

namespace graphmoco {

inline constexpr int kEmbeddingDim = 256;

// h' = act(W_self h + W_nbr * sum(neighbours) + b), with optional per-node
// RMS scaling of the pre-activation. In directed mode
// W_nbr aggregates predecessors and W_out successors.
struct GraphLayer {
  Matrix self_weight;
  Matrix neighbor_weight;
  Matrix out_neighbor_weight;  // empty unless directed
  Vector bias;
};

struct GraphEncoderOptions {
  int layers = 3;
  int hidden_dim = 256;
  int output_dim = kEmbeddingDim;
  bool two_tuple_enabled = true;
  int two_tuple_node_cap = 30;
  bool directed = false;
  // Rescales each node's pre-activation to unit RMS before the activation.
  bool node_norm = true;
  Activation activation = Activation::kTanh;
};

struct GraphEncoderParams {
  GraphEncoderOptions options;
  int input_dim = 0;
  std::vector<GraphLayer> layers;
  // One aggregation layer over 2-node sets joined by an edge.
  Matrix pair_self_weight;
  Matrix pair_neighbor_weight;
  Vector pair_bias;
  Matrix readout_weight;  // output_dim x hidden_dim
  Vector readout_bias;
};

GraphEncoderParams InitGraphParams(int input_dim,
                                   const GraphEncoderOptions& options,
                                   std::uint64_t seed);

// Adjacency for a disjoint union of graphs. Node and pair ids are global;
// graph g owns nodes [node_offsets[g], node_offsets[g+1]) and pairs
// [pair_offsets[g], pair_offsets[g+1]).
struct GraphBatch {
  std::vector<int> node_offsets{0};
  std::vector<std::vector<int>> neighbors;      // undirected union
  std::vector<std::vector<int>> in_neighbors;   // predecessors
  std::vector<std::vector<int>> out_neighbors;  // successors
  std::vector<std::pair<int, int>> pairs;
  std::vector<int> pair_offsets{0};
  std::vector<std::vector<int>> pair_neighbors;

  int num_graphs() const { return static_cast<int>(node_offsets.size()) - 1; }
  int num_nodes() const { return node_offsets.back(); }

  // Appends one graph; its node ids are shifted by the current node count.
  void Add(int node_count, std::span<const std::pair<int, int>> edges,
           const GraphEncoderOptions& options);
};

// Test-only batch coupling: adds `strength` times the mean readout of each
// run of `group_size` consecutive graphs to every member. Models an encoder
// with cross-sample statistics; zero disables it.
struct BatchCoupling {
  int group_size = 0;
  double strength = 1.0;
};

struct GraphCache {
  std::vector<Matrix> node_states;  // input features, then one per layer
  std::vector<Matrix> node_scaled;  // per layer, after RMS scaling
  std::vector<Vector> node_rms;
  Matrix pair_scaled;
  Vector pair_rms;
  Matrix pair_inputs;
  Matrix pair_aggregate;
  Matrix pair_states;
  Matrix readout_inputs;  // after coupling
  Matrix projections;     // before L2 normalisation
  Matrix embeddings;
};

// Per-graph unit-norm embeddings (num_graphs x output_dim).
Matrix EncodeGraphs(const Matrix& node_feats, const GraphBatch& batch,
                    const GraphEncoderParams& params,
                    GraphCache* cache = nullptr,
                    const BatchCoupling& coupling = {});

void EncodeGraphsBackward(const Matrix& grad_embeddings,
                          const GraphCache& cache, const GraphBatch& batch,
                          const GraphEncoderParams& params,
                          GraphEncoderParams& grad, Matrix* grad_node_feats,
                          const BatchCoupling& coupling = {});

// Node states after the message-passing layers, before any readout.
Matrix PropagateNodes(const Matrix& node_feats,
                      std::span<const std::pair<int, int>> edges,
                      const GraphEncoderParams& params);

Vector EncodeGraph(const Matrix& node_feats,
                   std::span<const std::pair<int, int>> edges,
                   const GraphEncoderParams& params);

}  // namespace graphmoco

#endif  // GRAPHMOCO_GRAPH_ENCODER_HPP
