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

#ifndef GRAPHMOCO_TOKEN_EMBED_HPP
#define GRAPHMOCO_TOKEN_EMBED_HPP

#include <cstdint>
#include <span>

#include "graphmoco/normalizer.hpp"
#include "graphmoco/tensor.hpp"

namespace graphmoco {

// Learned operation and operand vectors of width d. Row 0 of the operand
// table is the PAD vector and stays zero.
struct TokenEmbeddingTable {
  RowMatrix op_table;
  RowMatrix operand_table;

  int dim() const { return static_cast<int>(op_table.cols()); }
};

// Uniform(-1/sqrt(d), 1/sqrt(d)) entries, PAD operand row zeroed.
TokenEmbeddingTable InitTables(int op_vocab_size, int operand_vocab_size,
                               int d, std::uint64_t seed);

// op_table[op] concatenated with the sum of the four operand rows (2d wide).
Vector EmbedInstruction(const EncodedInstruction& ids,
                        const TokenEmbeddingTable& table);

// Row-per-instruction form of EmbedInstruction.
Matrix EmbedInstructions(std::span<const EncodedInstruction> ids,
                         const TokenEmbeddingTable& table);

// Accumulates table gradients from d(loss)/d(instruction embeddings). PAD
// operands receive no gradient.
void EmbedInstructionsBackward(std::span<const EncodedInstruction> ids,
                               const Matrix& grad_embeds,
                               TokenEmbeddingTable& grad);

}  // namespace graphmoco

#endif  // GRAPHMOCO_TOKEN_EMBED_HPP
