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

#include "graphmoco/token_embed.hpp"

#include <random>

#include "graphmoco/error.hpp"

namespace graphmoco {

std::string ToString(Activation act) {
  return act == Activation::kTanh ? "tanh" : "identity";
}

Activation ParseActivation(const std::string& text) {
  if (text == "tanh") return Activation::kTanh;
  if (text == "identity") return Activation::kIdentity;
  Fail(ErrorCode::kParse, "unknown activation '" + text + "'");
}

TokenEmbeddingTable InitTables(int op_vocab_size, int operand_vocab_size,
                               int d, std::uint64_t seed) {
  Require(op_vocab_size >= 2 && operand_vocab_size >= 2,
          "vocabularies must hold at least PAD and UNK");
  Require(d >= 1, "embedding width must be positive");
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(d));
  std::uniform_real_distribution<double> dist(-bound, bound);
  TokenEmbeddingTable t;
  t.op_table.resize(op_vocab_size, d);
  t.operand_table.resize(operand_vocab_size, d);
  for (Eigen::Index i = 0; i < t.op_table.size(); ++i) {
    t.op_table.data()[i] = dist(rng);
  }
  for (Eigen::Index i = 0; i < t.operand_table.size(); ++i) {
    t.operand_table.data()[i] = dist(rng);
  }
  t.operand_table.row(kPadId).setZero();
  return t;
}

namespace {

void CheckIds(const EncodedInstruction& ids, const TokenEmbeddingTable& t) {
  if (ids.op < 0 || ids.op >= t.op_table.rows()) {
    Fail(ErrorCode::kIndex, "operation id " + std::to_string(ids.op) +
                                " outside the embedding table");
  }
  for (int id : ids.operands) {
    if (id < 0 || id >= t.operand_table.rows()) {
      Fail(ErrorCode::kIndex, "operand id " + std::to_string(id) +
                                  " outside the embedding table");
    }
  }
}

}  // namespace

Vector EmbedInstruction(const EncodedInstruction& ids,
                        const TokenEmbeddingTable& table) {
  CheckIds(ids, table);
  const int d = table.dim();
  Vector out = Vector::Zero(2 * d);
  out.head(d) = table.op_table.row(ids.op).transpose();
  for (int id : ids.operands) {
    if (id != kPadId) out.tail(d) += table.operand_table.row(id).transpose();
  }
  return out;
}

Matrix EmbedInstructions(std::span<const EncodedInstruction> ids,
                         const TokenEmbeddingTable& table) {
  const int d = table.dim();
  Matrix out = Matrix::Zero(static_cast<Eigen::Index>(ids.size()), 2 * d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    CheckIds(ids[i], table);
    const auto row = static_cast<Eigen::Index>(i);
    out.row(row).head(d) = table.op_table.row(ids[i].op);
    for (int id : ids[i].operands) {
      if (id != kPadId) out.row(row).tail(d) += table.operand_table.row(id);
    }
  }
  return out;
}

void EmbedInstructionsBackward(std::span<const EncodedInstruction> ids,
                               const Matrix& grad_embeds,
                               TokenEmbeddingTable& grad) {
  const int d = grad.dim();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    grad.op_table.row(ids[i].op) += grad_embeds.row(row).head(d);
    for (int id : ids[i].operands) {
      if (id != kPadId) grad.operand_table.row(id) += grad_embeds.row(row).tail(d);
    }
  }
}

}  // namespace graphmoco
