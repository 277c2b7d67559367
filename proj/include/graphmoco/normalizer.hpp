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

#ifndef GRAPHMOCO_NORMALIZER_HPP
#define GRAPHMOCO_NORMALIZER_HPP

#include <array>
#include <map>
#include <string>
#include <vector>

#include "graphmoco/corpus.hpp"
#include "json.hpp"

namespace graphmoco {

inline constexpr int kOperandSlots = 4;

// Special tokens produced by normalization.
inline const std::string kPadToken = "<pad>";
inline const std::string kUnkToken = "<unk>";
inline const std::string kImmToken = "IMM";
inline const std::string kInAddressToken = "inaddress";
inline const std::string kOutAddressToken = "ouraddress";
inline const std::string kRegisterListToken = "Pregister";

struct NormalizedInstruction {
  std::string operation;
  std::array<std::string, kOperandSlots> operands;

  // All five tokens, operation first; PAD slots included.
  std::vector<std::string> Tokens() const;
  friend bool operator==(const NormalizedInstruction&,
                         const NormalizedInstruction&) = default;
};

struct NormalizerOptions {
  // Used only when an instruction carries no address tags: operands fully
  // matching this (lower-case) pattern become out-of-function addresses.
  std::string address_pattern = "0x[0-9a-f]{6,}";
};

// Applies literal, address and register-list rewriting, lower-cases plain
// tokens and pads/truncates to one operation plus four operand slots.
// Normalizing an already normalized instruction returns it unchanged.
NormalizedInstruction NormalizeInstruction(
    const RawInstruction& instr, const NormalizerOptions& options = {});

// Feeds a normalized instruction back in as raw tokens (PAD slots included).
RawInstruction ToRaw(const NormalizedInstruction& instr);

struct EncodedInstruction {
  int op = 0;
  std::array<int, kOperandSlots> operands{};
};

inline constexpr int kPadId = 0;
inline constexpr int kUnkId = 1;
inline constexpr int kVocabVersion = 1;

// Separate dense id spaces for operations and operands; PAD = 0, UNK = 1.
class Vocab {
 public:
  Vocab();
  Vocab(const std::vector<std::string>& ops,
        const std::vector<std::string>& operands);

  int OpId(const std::string& token) const;
  int OperandId(const std::string& token) const;
  const std::string& OpToken(int id) const;
  const std::string& OperandToken(int id) const;

  std::size_t op_size() const { return op_tokens_.size(); }
  std::size_t operand_size() const { return operand_tokens_.size(); }
  const std::map<std::string, int>& op_index() const { return op_index_; }
  const std::map<std::string, int>& operand_index() const {
    return operand_index_;
  }

  nlohmann::json ToJson() const;
  static Vocab FromJson(const nlohmann::json& doc);

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.op_tokens_ == b.op_tokens_ &&
           a.operand_tokens_ == b.operand_tokens_;
  }

 private:
  std::vector<std::string> op_tokens_;
  std::vector<std::string> operand_tokens_;
  std::map<std::string, int> op_index_;
  std::map<std::string, int> operand_index_;
};

// One shared vocabulary over every architecture in the corpus, tokens sorted.
Vocab BuildVocab(const Corpus& corpus, const NormalizerOptions& options = {});

EncodedInstruction EncodeInstruction(const NormalizedInstruction& instr,
                                     const Vocab& vocab);
NormalizedInstruction DecodeInstruction(const EncodedInstruction& ids,
                                        const Vocab& vocab);

// Whole-function id form consumed by the encoder.
struct EncodedFunction {
  std::vector<std::vector<EncodedInstruction>> blocks;
  std::vector<std::pair<int, int>> edges;
};

EncodedFunction TokenizeVariant(const FunctionVariant& variant,
                                const Vocab& vocab,
                                const NormalizerOptions& options = {});

}  // namespace graphmoco

#endif  // GRAPHMOCO_NORMALIZER_HPP
