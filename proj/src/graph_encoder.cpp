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

#include "graphmoco/graph_encoder.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

void FillUniform(Matrix& m, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

void FillUniform(Vector& v, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = dist(rng);
}

// out[v] = sum of m[u] over u in lists[v].
Matrix Gather(const std::vector<std::vector<int>>& lists, const Matrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (std::size_t v = 0; v < lists.size(); ++v) {
    for (int u : lists[v]) out.row(static_cast<Eigen::Index>(v)) += m.row(u);
  }
  return out;
}

// Adjoint of Gather: out[u] += m[v] for u in lists[v].
void ScatterAdd(const std::vector<std::vector<int>>& lists, const Matrix& m,
                Matrix& out) {
  for (std::size_t v = 0; v < lists.size(); ++v) {
    for (int u : lists[v]) out.row(u) += m.row(static_cast<Eigen::Index>(v));
  }
}

constexpr double kRmsEpsilon = 1e-8;

// Row-wise z / sqrt(mean(z^2) + eps); returns the divisors.
Vector ScaleRows(Matrix& z) {
  Vector rms(z.rows());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    rms[r] = std::sqrt(z.row(r).squaredNorm() / static_cast<double>(z.cols()) +
                       kRmsEpsilon);
    z.row(r) /= rms[r];
  }
  return rms;
}

// Adjoint of ScaleRows given the scaled rows.
void ScaleRowsBackward(const Matrix& scaled, const Vector& rms, Matrix& grad) {
  const double n = static_cast<double>(scaled.cols());
  for (Eigen::Index r = 0; r < grad.rows(); ++r) {
    const double dot = grad.row(r).dot(scaled.row(r)) / n;
    grad.row(r) = (grad.row(r) - scaled.row(r) * dot) / rms[r];
  }
}

int GroupOf(int g, const BatchCoupling& coupling) {
  return g / coupling.group_size;
}

}  // namespace

GraphEncoderParams InitGraphParams(int input_dim,
                                   const GraphEncoderOptions& options,
                                   std::uint64_t seed) {
  Require(input_dim >= 1, "graph input width must be positive");
  Require(options.layers >= 1, "at least one message-passing layer");
  Require(options.hidden_dim >= 1 && options.output_dim >= 1,
          "graph widths must be positive");
  GraphEncoderParams p;
  p.options = options;
  p.input_dim = input_dim;
  std::mt19937_64 rng(seed);
  int fan_in = input_dim;
  for (int l = 0; l < options.layers; ++l) {
    GraphLayer layer;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    layer.self_weight.resize(options.hidden_dim, fan_in);
    layer.neighbor_weight.resize(options.hidden_dim, fan_in);
    layer.bias.resize(options.hidden_dim);
    FillUniform(layer.self_weight, bound, rng);
    FillUniform(layer.neighbor_weight, bound, rng);
    if (options.directed) {
      layer.out_neighbor_weight.resize(options.hidden_dim, fan_in);
      FillUniform(layer.out_neighbor_weight, bound, rng);
    }
    FillUniform(layer.bias, bound, rng);
    p.layers.push_back(std::move(layer));
    fan_in = options.hidden_dim;
  }
  const double bound = 1.0 / std::sqrt(static_cast<double>(options.hidden_dim));
  p.pair_self_weight.resize(options.hidden_dim, options.hidden_dim);
  p.pair_neighbor_weight.resize(options.hidden_dim, options.hidden_dim);
  p.pair_bias.resize(options.hidden_dim);
  p.readout_weight.resize(options.output_dim, options.hidden_dim);
  p.readout_bias.resize(options.output_dim);
  FillUniform(p.pair_self_weight, bound, rng);
  FillUniform(p.pair_neighbor_weight, bound, rng);
  FillUniform(p.pair_bias, bound, rng);
  FillUniform(p.readout_weight, bound, rng);
  p.readout_bias.setZero();
  return p;
}

void GraphBatch::Add(int node_count, std::span<const std::pair<int, int>> edges,
                     const GraphEncoderOptions& options) {
  Require(node_count >= 1, "graph has no nodes");
  const int base = num_nodes();
  const auto total = static_cast<std::size_t>(base + node_count);
  neighbors.resize(total);
  in_neighbors.resize(total);
  out_neighbors.resize(total);
  std::set<std::pair<int, int>> unique_edges;
  std::set<std::pair<int, int>> local_pairs;
  for (const auto& [src, dst] : edges) {
    Require(src >= 0 && src < node_count && dst >= 0 && dst < node_count,
            "edge endpoint outside the graph");
    if (!unique_edges.insert({src, dst}).second) continue;
    const int u = base + src;
    const int v = base + dst;
    out_neighbors[static_cast<std::size_t>(u)].push_back(v);
    in_neighbors[static_cast<std::size_t>(v)].push_back(u);
    neighbors[static_cast<std::size_t>(u)].push_back(v);
    neighbors[static_cast<std::size_t>(v)].push_back(u);
    if (src != dst) local_pairs.insert(std::minmax(src, dst));
  }
  for (std::size_t v = static_cast<std::size_t>(base); v < total; ++v) {
    auto& list = neighbors[v];
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  node_offsets.push_back(base + node_count);

  if (options.two_tuple_enabled && node_count <= options.two_tuple_node_cap) {
    const int pair_base = static_cast<int>(pairs.size());
    std::map<int, std::vector<int>> incident;
    for (const auto& [a, b] : local_pairs) {
      const int id = static_cast<int>(pairs.size());
      pairs.emplace_back(base + a, base + b);
      incident[a].push_back(id);
      incident[b].push_back(id);
    }
    pair_neighbors.resize(pairs.size());
    for (int p = pair_base; p < static_cast<int>(pairs.size()); ++p) {
      const auto [a, b] = pairs[static_cast<std::size_t>(p)];
      std::vector<int> adj;
      for (int q : incident[a - base]) if (q != p) adj.push_back(q);
      for (int q : incident[b - base]) if (q != p) adj.push_back(q);
      std::sort(adj.begin(), adj.end());
      adj.erase(std::unique(adj.begin(), adj.end()), adj.end());
      pair_neighbors[static_cast<std::size_t>(p)] = std::move(adj);
    }
  }
  pair_offsets.push_back(static_cast<int>(pairs.size()));
}

Matrix EncodeGraphs(const Matrix& node_feats, const GraphBatch& batch,
                    const GraphEncoderParams& params, GraphCache* cache,
                    const BatchCoupling& coupling) {
  Require(batch.num_graphs() >= 1, "graph batch is empty");
  Require(node_feats.rows() == batch.num_nodes(),
          "node feature rows do not match the graph batch");
  Require(node_feats.cols() == params.input_dim,
          "node feature width does not match the graph encoder");
  const GraphEncoderOptions& opt = params.options;
  const int num_graphs = batch.num_graphs();

  std::vector<Matrix> states;
  std::vector<Matrix> scaled;
  std::vector<Vector> rms;
  states.push_back(node_feats);
  for (const GraphLayer& layer : params.layers) {
    const Matrix& h = states.back();
    Matrix z = h * layer.self_weight.transpose();
    if (opt.directed) {
      z += Gather(batch.in_neighbors, h) * layer.neighbor_weight.transpose();
      z += Gather(batch.out_neighbors, h) *
           layer.out_neighbor_weight.transpose();
    } else {
      z += Gather(batch.neighbors, h) * layer.neighbor_weight.transpose();
    }
    z.rowwise() += layer.bias.transpose();
    if (opt.node_norm) {
      rms.push_back(ScaleRows(z));
      scaled.push_back(z);
    }
    ActivateInPlace(opt.activation, z);
    states.push_back(std::move(z));
  }
  const Matrix& nodes = states.back();

  Matrix pair_inputs(static_cast<Eigen::Index>(batch.pairs.size()),
                     opt.hidden_dim);
  for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
    pair_inputs.row(static_cast<Eigen::Index>(p)) =
        nodes.row(batch.pairs[p].first) + nodes.row(batch.pairs[p].second);
  }
  Matrix pair_aggregate = Gather(batch.pair_neighbors, pair_inputs);
  Matrix pair_states = pair_inputs * params.pair_self_weight.transpose() +
                       pair_aggregate * params.pair_neighbor_weight.transpose();
  pair_states.rowwise() += params.pair_bias.transpose();
  Vector pair_rms;
  Matrix pair_scaled;
  if (opt.node_norm) {
    pair_rms = ScaleRows(pair_states);
    pair_scaled = pair_states;
  }
  ActivateInPlace(opt.activation, pair_states);

  Matrix readout(num_graphs, opt.hidden_dim);
  for (int g = 0; g < num_graphs; ++g) {
    const int n0 = batch.node_offsets[static_cast<std::size_t>(g)];
    const int n1 = batch.node_offsets[static_cast<std::size_t>(g) + 1];
    readout.row(g) = nodes.middleRows(n0, n1 - n0).colwise().mean();
    const int p0 = batch.pair_offsets[static_cast<std::size_t>(g)];
    const int p1 = batch.pair_offsets[static_cast<std::size_t>(g) + 1];
    if (p1 > p0) {
      readout.row(g) += pair_states.middleRows(p0, p1 - p0).colwise().mean();
    }
  }
  if (coupling.group_size > 0) {
    Matrix coupled = readout;
    for (int g = 0; g < num_graphs; ++g) {
      const int first = GroupOf(g, coupling) * coupling.group_size;
      const int last = std::min(num_graphs, first + coupling.group_size);
      coupled.row(g) += coupling.strength *
                        readout.middleRows(first, last - first).colwise().mean();
    }
    readout = std::move(coupled);
  }

  Matrix proj = readout * params.readout_weight.transpose();
  proj.rowwise() += params.readout_bias.transpose();
  Matrix emb(num_graphs, opt.output_dim);
  for (int g = 0; g < num_graphs; ++g) {
    const double norm = proj.row(g).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      Fail(ErrorCode::kNumeric, "function embedding has zero or non-finite norm");
    }
    emb.row(g) = proj.row(g) / norm;
  }

  if (cache) {
    cache->node_states = std::move(states);
    cache->node_scaled = std::move(scaled);
    cache->node_rms = std::move(rms);
    cache->pair_scaled = std::move(pair_scaled);
    cache->pair_rms = std::move(pair_rms);
    cache->pair_inputs = std::move(pair_inputs);
    cache->pair_aggregate = std::move(pair_aggregate);
    cache->pair_states = std::move(pair_states);
    cache->readout_inputs = std::move(readout);
    cache->projections = std::move(proj);
    cache->embeddings = emb;
  }
  return emb;
}

void EncodeGraphsBackward(const Matrix& grad_embeddings,
                          const GraphCache& cache, const GraphBatch& batch,
                          const GraphEncoderParams& params,
                          GraphEncoderParams& grad, Matrix* grad_node_feats,
                          const BatchCoupling& coupling) {
  const GraphEncoderOptions& opt = params.options;
  const int num_graphs = batch.num_graphs();

  // Through the L2 normalisation: dy = (de - e <e, de>) / |y|.
  Matrix grad_proj(num_graphs, opt.output_dim);
  for (int g = 0; g < num_graphs; ++g) {
    const double norm = cache.projections.row(g).norm();
    const auto e = cache.embeddings.row(g);
    const auto de = grad_embeddings.row(g);
    grad_proj.row(g) = (de - e * e.dot(de)) / norm;
  }
  grad.readout_weight += grad_proj.transpose() * cache.readout_inputs;
  grad.readout_bias += grad_proj.colwise().sum().transpose();
  Matrix grad_readout = grad_proj * params.readout_weight;

  if (coupling.group_size > 0) {
    Matrix uncoupled = grad_readout;
    for (int g = 0; g < num_graphs; ++g) {
      const int first = GroupOf(g, coupling) * coupling.group_size;
      const int last = std::min(num_graphs, first + coupling.group_size);
      uncoupled.row(g) +=
          coupling.strength *
          grad_readout.middleRows(first, last - first).colwise().sum() /
          static_cast<double>(last - first);
    }
    grad_readout = std::move(uncoupled);
  }

  const int num_nodes = batch.num_nodes();
  Matrix grad_nodes = Matrix::Zero(num_nodes, opt.hidden_dim);
  Matrix grad_pair_states =
      Matrix::Zero(static_cast<Eigen::Index>(batch.pairs.size()), opt.hidden_dim);
  for (int g = 0; g < num_graphs; ++g) {
    const int n0 = batch.node_offsets[static_cast<std::size_t>(g)];
    const int n1 = batch.node_offsets[static_cast<std::size_t>(g) + 1];
    grad_nodes.middleRows(n0, n1 - n0).rowwise() +=
        grad_readout.row(g) / static_cast<double>(n1 - n0);
    const int p0 = batch.pair_offsets[static_cast<std::size_t>(g)];
    const int p1 = batch.pair_offsets[static_cast<std::size_t>(g) + 1];
    if (p1 > p0) {
      grad_pair_states.middleRows(p0, p1 - p0).rowwise() +=
          grad_readout.row(g) / static_cast<double>(p1 - p0);
    }
  }

  if (!batch.pairs.empty()) {
    Matrix dz = grad_pair_states;
    if (opt.activation == Activation::kTanh) {
      dz.array() *= 1.0 - cache.pair_states.array().square();
    }
    if (opt.node_norm) ScaleRowsBackward(cache.pair_scaled, cache.pair_rms, dz);
    grad.pair_self_weight += dz.transpose() * cache.pair_inputs;
    grad.pair_neighbor_weight += dz.transpose() * cache.pair_aggregate;
    grad.pair_bias += dz.colwise().sum().transpose();
    Matrix grad_inputs = dz * params.pair_self_weight;
    ScatterAdd(batch.pair_neighbors, dz * params.pair_neighbor_weight,
               grad_inputs);
    for (std::size_t p = 0; p < batch.pairs.size(); ++p) {
      const auto row = grad_inputs.row(static_cast<Eigen::Index>(p));
      grad_nodes.row(batch.pairs[p].first) += row;
      grad_nodes.row(batch.pairs[p].second) += row;
    }
  }

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const auto li = static_cast<std::size_t>(l);
    const Matrix& h_in = cache.node_states[li];
    const Matrix& h_out = cache.node_states[li + 1];
    const GraphLayer& layer = params.layers[li];
    GraphLayer& glayer = grad.layers[li];
    Matrix dz = grad_nodes;
    if (opt.activation == Activation::kTanh) {
      dz.array() *= 1.0 - h_out.array().square();
    }
    if (opt.node_norm) {
      ScaleRowsBackward(cache.node_scaled[li], cache.node_rms[li], dz);
    }
    glayer.self_weight += dz.transpose() * h_in;
    glayer.bias += dz.colwise().sum().transpose();
    Matrix grad_in = dz * layer.self_weight;
    if (opt.directed) {
      glayer.neighbor_weight +=
          dz.transpose() * Gather(batch.in_neighbors, h_in);
      glayer.out_neighbor_weight +=
          dz.transpose() * Gather(batch.out_neighbors, h_in);
      ScatterAdd(batch.in_neighbors, dz * layer.neighbor_weight, grad_in);
      ScatterAdd(batch.out_neighbors, dz * layer.out_neighbor_weight, grad_in);
    } else {
      glayer.neighbor_weight += dz.transpose() * Gather(batch.neighbors, h_in);
      ScatterAdd(batch.neighbors, dz * layer.neighbor_weight, grad_in);
    }
    grad_nodes = std::move(grad_in);
  }
  if (grad_node_feats) *grad_node_feats = std::move(grad_nodes);
}

Matrix PropagateNodes(const Matrix& node_feats,
                      std::span<const std::pair<int, int>> edges,
                      const GraphEncoderParams& params) {
  GraphBatch batch;
  batch.Add(static_cast<int>(node_feats.rows()), edges, params.options);
  GraphCache cache;
  EncodeGraphs(node_feats, batch, params, &cache);
  return cache.node_states.back();
}

Vector EncodeGraph(const Matrix& node_feats,
                   std::span<const std::pair<int, int>> edges,
                   const GraphEncoderParams& params) {
  GraphBatch batch;
  batch.Add(static_cast<int>(node_feats.rows()), edges, params.options);
  return EncodeGraphs(node_feats, batch, params).row(0).transpose();
}

}  // namespace graphmoco
