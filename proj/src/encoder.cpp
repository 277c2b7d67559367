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

#include "graphmoco/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

template <typename M>
ParamRef Ref(std::string name, M& m, bool row_major) {
  return ParamRef{std::move(name),
                  std::span<double>(m.data(), static_cast<std::size_t>(m.size())),
                  {static_cast<long>(m.rows()), static_cast<long>(m.cols())},
                  0,
                  row_major};
}

ParamRef Ref(std::string name, Vector& v) {
  return ParamRef{std::move(name),
                  std::span<double>(v.data(), static_cast<std::size_t>(v.size())),
                  {static_cast<long>(v.size())},
                  0,
                  false};
}

}  // namespace

nlohmann::json EncoderConfig::ToJson() const {
  return {{"token_dim", token_dim},
          {"windows", windows},
          {"filters", filters},
          {"block_activation", ToString(block_activation)},
          {"graph_layers", graph.layers},
          {"graph_hidden_dim", graph.hidden_dim},
          {"output_dim", graph.output_dim},
          {"two_tuple_enabled", graph.two_tuple_enabled},
          {"two_tuple_node_cap", graph.two_tuple_node_cap},
          {"directed", graph.directed},
          {"node_norm", graph.node_norm},
          {"graph_activation", ToString(graph.activation)}};
}

EncoderConfig EncoderConfig::FromJson(const nlohmann::json& doc) {
  EncoderConfig c;
  try {
    c.token_dim = doc.value("token_dim", c.token_dim);
    c.windows = doc.value("windows", c.windows);
    c.filters = doc.value("filters", c.filters);
    c.block_activation = ParseActivation(
        doc.value("block_activation", ToString(c.block_activation)));
    c.graph.layers = doc.value("graph_layers", c.graph.layers);
    c.graph.hidden_dim = doc.value("graph_hidden_dim", c.graph.hidden_dim);
    c.graph.output_dim = doc.value("output_dim", c.graph.output_dim);
    c.graph.two_tuple_enabled =
        doc.value("two_tuple_enabled", c.graph.two_tuple_enabled);
    c.graph.two_tuple_node_cap =
        doc.value("two_tuple_node_cap", c.graph.two_tuple_node_cap);
    c.graph.directed = doc.value("directed", c.graph.directed);
    c.graph.node_norm = doc.value("node_norm", c.graph.node_norm);
    c.graph.activation = ParseActivation(
        doc.value("graph_activation", ToString(c.graph.activation)));
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad encoder config: ") + e.what());
  }
  return c;
}

EncoderParams InitEncoder(const EncoderConfig& config, std::size_t op_size,
                          std::size_t operand_size, std::uint64_t seed) {
  EncoderParams p;
  p.tokens = InitTables(static_cast<int>(op_size),
                        static_cast<int>(operand_size), config.token_dim, seed);
  p.strand = InitStrandParams(config.windows, config.filters, config.token_dim,
                              seed + 1, config.block_activation);
  p.graph = InitGraphParams(config.BlockDim(), config.graph, seed + 2);
  return p;
}

EncoderParams ZerosLike(const EncoderParams& params) {
  EncoderParams z = params;
  for (ParamRef& ref : ParamRefs(z)) {
    std::fill(ref.values.begin(), ref.values.end(), 0.0);
  }
  z.graph.pair_self_weight.setZero();
  z.graph.pair_neighbor_weight.setZero();
  z.graph.pair_bias.setZero();
  return z;
}

std::vector<ParamRef> ParamRefs(EncoderParams& p) {
  std::vector<ParamRef> refs;
  auto add = [&refs](ParamRef ref, int fan_in) {
    ref.scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    refs.push_back(std::move(ref));
  };
  add(Ref("tokens/op_table", p.tokens.op_table, true), p.tokens.dim());
  add(Ref("tokens/operand_table", p.tokens.operand_table, true), p.tokens.dim());
  refs.back().frozen = static_cast<std::size_t>(p.tokens.dim());
  for (std::size_t i = 0; i < p.strand.windows.size(); ++i) {
    const std::string h = std::to_string(p.strand.windows[i]);
    const int fan_in = p.strand.windows[i] * p.strand.input_dim;
    add(Ref("strand/weight_h" + h, p.strand.weights[i], false), fan_in);
    add(Ref("strand/bias_h" + h, p.strand.biases[i]), fan_in);
  }
  GraphEncoderParams& g = p.graph;
  for (std::size_t l = 0; l < g.layers.size(); ++l) {
    const std::string prefix = "graph/layer" + std::to_string(l) + "/";
    const int fan_in = l == 0 ? g.input_dim : g.options.hidden_dim;
    add(Ref(prefix + "self", g.layers[l].self_weight, false), fan_in);
    add(Ref(prefix + "neighbor", g.layers[l].neighbor_weight, false), fan_in);
    if (g.options.directed) {
      add(Ref(prefix + "out_neighbor", g.layers[l].out_neighbor_weight, false), fan_in);
    }
    add(Ref(prefix + "bias", g.layers[l].bias), fan_in);
  }
  const int hidden = g.options.hidden_dim;
  if (g.options.two_tuple_enabled) {
    add(Ref("graph/pair/self", g.pair_self_weight, false), hidden);
    add(Ref("graph/pair/neighbor", g.pair_neighbor_weight, false), hidden);
    add(Ref("graph/pair/bias", g.pair_bias), hidden);
  }
  add(Ref("graph/readout/weight", g.readout_weight, false), hidden);
  // The readout is a plain linear projection: its bias stays at zero.
  add(Ref("graph/readout/bias", g.readout_bias), hidden);
  refs.back().frozen = refs.back().values.size();
  return refs;
}

Matrix EncodeFunctions(std::span<const EncodedFunction* const> functions,
                       const EncoderParams& params, EncoderCache* cache,
                       const BatchCoupling& coupling) {
  Require(!functions.empty(), "cannot encode an empty batch");
  EncoderCache local;
  EncoderCache& c = cache ? *cache : local;
  c = EncoderCache{};
  c.block_offsets.push_back(0);
  for (const EncodedFunction* fn : functions) {
    Require(!fn->blocks.empty(), "function has no basic blocks");
    for (const auto& block : fn->blocks) {
      Require(!block.empty(), "basic block has no instructions");
      c.instructions.insert(c.instructions.end(), block.begin(), block.end());
      c.block_offsets.push_back(static_cast<int>(c.instructions.size()));
    }
    c.graph_batch.Add(static_cast<int>(fn->blocks.size()), fn->edges,
                      params.graph.options);
  }
  c.instr_embeds = EmbedInstructions(c.instructions, params.tokens);
  Matrix block_vectors = EncodeBlocks(c.instr_embeds, c.block_offsets,
                                      params.strand, cache ? &c.blocks : nullptr);
  return EncodeGraphs(block_vectors, c.graph_batch, params.graph,
                      cache ? &c.graph : nullptr, coupling);
}

void EncodeFunctionsBackward(const Matrix& grad_embeddings,
                             const EncoderCache& cache,
                             const EncoderParams& params, EncoderParams& grad,
                             const BatchCoupling& coupling) {
  Matrix grad_blocks;
  EncodeGraphsBackward(grad_embeddings, cache.graph, cache.graph_batch,
                       params.graph, grad.graph, &grad_blocks, coupling);
  Matrix grad_instr;
  EncodeBlocksBackward(grad_blocks, cache.blocks, params.strand, grad.strand,
                       &grad_instr);
  EmbedInstructionsBackward(cache.instructions, grad_instr, grad.tokens);
}

Vector EncodeFunction(const FunctionVariant& variant, const Vocab& vocab,
                      const EncoderParams& params,
                      const NormalizerOptions& options) {
  const EncodedFunction fn = TokenizeVariant(variant, vocab, options);
  const EncodedFunction* one[1] = {&fn};
  return EncodeFunctions(one, params).row(0).transpose();
}

Matrix EncodeBatch(std::span<const FunctionVariant* const> variants,
                   const Vocab& vocab, const EncoderParams& params,
                   const NormalizerOptions& options) {
  std::vector<EncodedFunction> encoded;
  encoded.reserve(variants.size());
  for (const FunctionVariant* v : variants) {
    encoded.push_back(TokenizeVariant(*v, vocab, options));
  }
  std::vector<const EncodedFunction*> ptrs;
  for (const auto& e : encoded) ptrs.push_back(&e);
  return EncodeFunctions(ptrs, params);
}

Matrix EncodeCorpus(const Corpus& corpus, const Vocab& vocab,
                    const EncoderParams& params, int chunk,
                    const BatchCoupling& coupling,
                    const NormalizerOptions& options) {
  Require(chunk >= 1, "chunk size must be positive");
  const int n = static_cast<int>(corpus.size());
  Matrix out(n, params.graph.options.output_dim);
  for (int start = 0; start < n; start += chunk) {
    const int stop = std::min(n, start + chunk);
    std::vector<EncodedFunction> encoded;
    for (int i = start; i < stop; ++i) {
      encoded.push_back(TokenizeVariant(
          corpus.variants()[static_cast<std::size_t>(i)], vocab, options));
    }
    std::vector<const EncodedFunction*> ptrs;
    for (const auto& e : encoded) ptrs.push_back(&e);
    out.middleRows(start, stop - start) =
        EncodeFunctions(ptrs, params, nullptr, coupling);
  }
  return out;
}

}  // namespace graphmoco
