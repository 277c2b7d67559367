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

#ifndef GRAPHMOCO_ENCODER_HPP
#define GRAPHMOCO_ENCODER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "graphmoco/block_encoder.hpp"
#include "graphmoco/graph_encoder.hpp"
#include "graphmoco/normalizer.hpp"
#include "graphmoco/token_embed.hpp"
#include "json.hpp"

namespace graphmoco {

// Shape of the three-level encoder: tokens -> blocks -> function.
struct EncoderConfig {
  int token_dim = 64;
  std::vector<int> windows{2, 3, 4};
  int filters = 64;
  Activation block_activation = Activation::kTanh;
  GraphEncoderOptions graph;

  int BlockDim() const {
    return static_cast<int>(windows.size()) * filters + 2 * token_dim;
  }
  nlohmann::json ToJson() const;
  static EncoderConfig FromJson(const nlohmann::json& doc);
};

struct EncoderParams {
  TokenEmbeddingTable tokens;
  StrandCnnParams strand;
  GraphEncoderParams graph;
};

EncoderParams InitEncoder(const EncoderConfig& config, std::size_t op_size,
                          std::size_t operand_size, std::uint64_t seed);

// Same shapes, every value zero. Used for gradient accumulators.
EncoderParams ZerosLike(const EncoderParams& params);

// Every trainable array in a fixed order. Views stay valid while `params`
// is alive and not resized.
std::vector<ParamRef> ParamRefs(EncoderParams& params);

struct EncoderCache {
  std::vector<EncodedInstruction> instructions;
  std::vector<int> block_offsets;
  Matrix instr_embeds;
  BlockBatchCache blocks;
  GraphBatch graph_batch;
  GraphCache graph;
};

// Encodes the disjoint union of all functions in one pass and returns one
// unit-norm row per function, in input order.
Matrix EncodeFunctions(std::span<const EncodedFunction* const> functions,
                       const EncoderParams& params,
                       EncoderCache* cache = nullptr,
                       const BatchCoupling& coupling = {});

// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(embeddings).
void EncodeFunctionsBackward(const Matrix& grad_embeddings,
                             const EncoderCache& cache,
                             const EncoderParams& params, EncoderParams& grad,
                             const BatchCoupling& coupling = {});

Vector EncodeFunction(const FunctionVariant& variant, const Vocab& vocab,
                      const EncoderParams& params,
                      const NormalizerOptions& options = {});

Matrix EncodeBatch(std::span<const FunctionVariant* const> variants,
                   const Vocab& vocab, const EncoderParams& params,
                   const NormalizerOptions& options = {});

// Encodes every variant of a corpus, `chunk` functions per union graph.
// Rows follow corpus.variants().
Matrix EncodeCorpus(const Corpus& corpus, const Vocab& vocab,
                    const EncoderParams& params, int chunk = 64,
                    const BatchCoupling& coupling = {},
                    const NormalizerOptions& options = {});

}  // namespace graphmoco

#endif  // GRAPHMOCO_ENCODER_HPP
