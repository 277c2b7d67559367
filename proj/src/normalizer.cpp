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

#include "graphmoco/normalizer.hpp"

#include <algorithm>
#include <cctype>
#include <mutex>
#include <regex>
#include <set>
#include <unordered_map>

#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

bool IsSpecial(const std::string& tok) {
  return tok == kImmToken || tok == kInAddressToken ||
         tok == kOutAddressToken || tok == kRegisterListToken ||
         tok == kPadToken || tok == kUnkToken;
}

// Lower-cases a token while leaving embedded special symbols (e.g. the IMM
// inside "[rax+IMM]") untouched, which keeps normalization idempotent.
std::string LowerPreserving(const std::string& tok) {
  std::string out;
  out.reserve(tok.size());
  for (std::size_t i = 0; i < tok.size();) {
    if (tok.compare(i, kImmToken.size(), kImmToken) == 0) {
      out += kImmToken;
      i += kImmToken.size();
    } else if (tok.compare(i, kRegisterListToken.size(),
                           kRegisterListToken) == 0) {
      out += kRegisterListToken;
      i += kRegisterListToken.size();
    } else {
      out += static_cast<char>(
          std::tolower(static_cast<unsigned char>(tok[i])));
      ++i;
    }
  }
  return out;
}

bool IsWordChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' ||
         c == '.';
}

// Length of a literal `#?-?(0x[0-9a-f]+|[0-9]+)` starting at pos, or 0.
std::size_t MatchLiteral(const std::string& s, std::size_t pos) {
  std::size_t i = pos;
  if (i < s.size() && s[i] == '#') ++i;
  if (i < s.size() && s[i] == '-') ++i;
  if (i + 2 < s.size() && s[i] == '0' && s[i + 1] == 'x' &&
      std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
    i += 2;
    while (i < s.size() && std::isxdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
  } else if (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      ++i;
    }
  } else {
    return 0;
  }
  if (i < s.size() && IsWordChar(s[i])) return 0;
  return i - pos;
}

bool IsQuoted(const std::string& s) {
  return s.size() >= 2 && (s.front() == '"' || s.front() == '\'') &&
         s.back() == s.front();
}

bool IsWholeLiteral(const std::string& s) {
  return IsQuoted(s) || (!s.empty() && MatchLiteral(s, 0) == s.size());
}

// Rewrites literals embedded in a composite operand ("[rbp-0x8]",
// "-8($fp)") to IMM. Digits glued to a word ("r8", "$t0") are left alone.
std::string RewriteInnerLiterals(const std::string& s) {
  std::string out;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool boundary = i == 0 || !IsWordChar(s[i - 1]);
    if (boundary) {
      if (std::size_t len = MatchLiteral(s, i); len > 0) {
        out += kImmToken;
        i += len;
        continue;
      }
    }
    if (IsWordChar(s[i])) {
      while (i < s.size() && IsWordChar(s[i])) out += s[i++];
    } else {
      out += s[i++];
    }
  }
  return out;
}

const std::regex& CachedRegex(const std::string& pattern) {
  static std::mutex mu;
  static std::unordered_map<std::string, std::regex> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(pattern);
  if (it == cache.end()) {
    it = cache.emplace(pattern, std::regex(pattern)).first;
  }
  return it->second;
}

bool Contains(const std::vector<int>& v, int x) {
  return std::find(v.begin(), v.end(), x) != v.end();
}

}  // namespace

std::vector<std::string> NormalizedInstruction::Tokens() const {
  std::vector<std::string> out{operation};
  out.insert(out.end(), operands.begin(), operands.end());
  return out;
}

NormalizedInstruction NormalizeInstruction(const RawInstruction& instr,
                                           const NormalizerOptions& options) {
  Require(!instr.tokens.empty(), "instruction has no tokens");
  const auto& tokens = instr.tokens;
  std::vector<std::string> operands;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string& tok = tokens[i];
    if (tok == kPadToken) continue;
    if (IsSpecial(tok)) {
      operands.push_back(tok);
      continue;
    }
    // A brace-enclosed register list collapses into one token, however it
    // was split into tokens.
    if (tok.find('{') != std::string::npos) {
      std::size_t j = i;
      while (j < tokens.size() && tokens[j].find('}') == std::string::npos) {
        ++j;
      }
      operands.push_back(kRegisterListToken);
      i = std::min(j, tokens.size() - 1);
      continue;
    }
    const int idx = static_cast<int>(i);
    if (instr.addr_tags) {
      if (Contains(instr.addr_tags->in, idx)) {
        operands.push_back(kInAddressToken);
        continue;
      }
      if (Contains(instr.addr_tags->out, idx)) {
        operands.push_back(kOutAddressToken);
        continue;
      }
    }
    const std::string lower = LowerPreserving(tok);
    if (!instr.addr_tags &&
        std::regex_match(lower, CachedRegex(options.address_pattern))) {
      operands.push_back(kOutAddressToken);
    } else if (IsWholeLiteral(lower)) {
      operands.push_back(kImmToken);
    } else {
      operands.push_back(RewriteInnerLiterals(lower));
    }
  }

  NormalizedInstruction out;
  out.operation = LowerPreserving(tokens[0]);
  for (int k = 0; k < kOperandSlots; ++k) {
    out.operands[static_cast<std::size_t>(k)] =
        k < static_cast<int>(operands.size())
            ? operands[static_cast<std::size_t>(k)]
            : kPadToken;
  }
  return out;
}

RawInstruction ToRaw(const NormalizedInstruction& instr) {
  RawInstruction raw;
  raw.tokens = instr.Tokens();
  return raw;
}

Vocab::Vocab() : Vocab({}, {}) {}

Vocab::Vocab(const std::vector<std::string>& ops,
             const std::vector<std::string>& operands) {
  auto fill = [](const std::vector<std::string>& src,
                 std::vector<std::string>& tokens,
                 std::map<std::string, int>& index) {
    tokens = {kPadToken, kUnkToken};
    for (const std::string& t : src) {
      if (t == kPadToken || t == kUnkToken) continue;
      tokens.push_back(t);
    }
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!index.emplace(tokens[i], static_cast<int>(i)).second) {
        Fail(ErrorCode::kFormat, "duplicate vocabulary token " + tokens[i]);
      }
    }
  };
  fill(ops, op_tokens_, op_index_);
  fill(operands, operand_tokens_, operand_index_);
}

int Vocab::OpId(const std::string& token) const {
  auto it = op_index_.find(token);
  return it == op_index_.end() ? kUnkId : it->second;
}

int Vocab::OperandId(const std::string& token) const {
  auto it = operand_index_.find(token);
  return it == operand_index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::OpToken(int id) const {
  if (id < 0 || id >= static_cast<int>(op_tokens_.size())) {
    Fail(ErrorCode::kIndex, "operation id out of range");
  }
  return op_tokens_[static_cast<std::size_t>(id)];
}

const std::string& Vocab::OperandToken(int id) const {
  if (id < 0 || id >= static_cast<int>(operand_tokens_.size())) {
    Fail(ErrorCode::kIndex, "operand id out of range");
  }
  return operand_tokens_[static_cast<std::size_t>(id)];
}

nlohmann::json Vocab::ToJson() const {
  return {{"ops", op_index_},
          {"operands", operand_index_},
          {"version", kVocabVersion}};
}

Vocab Vocab::FromJson(const nlohmann::json& doc) {
  if (doc.value("version", -1) != kVocabVersion) {
    Fail(ErrorCode::kVersionMismatch,
         "unsupported vocabulary version " +
             std::to_string(doc.value("version", -1)));
  }
  auto ordered = [](const nlohmann::json& index) {
    std::vector<std::string> tokens(index.size());
    for (auto it = index.begin(); it != index.end(); ++it) {
      const int id = it.value().get<int>();
      if (id < 0 || id >= static_cast<int>(tokens.size()) ||
          !tokens[static_cast<std::size_t>(id)].empty()) {
        Fail(ErrorCode::kFormat, "vocabulary ids are not dense");
      }
      tokens[static_cast<std::size_t>(id)] = it.key();
    }
    if (tokens.size() < 2 || tokens[0] != kPadToken || tokens[1] != kUnkToken) {
      Fail(ErrorCode::kFormat, "vocabulary lacks PAD/UNK at ids 0/1");
    }
    return std::vector<std::string>(tokens.begin() + 2, tokens.end());
  };
  return Vocab(ordered(doc.at("ops")), ordered(doc.at("operands")));
}

Vocab BuildVocab(const Corpus& corpus, const NormalizerOptions& options) {
  Require(!corpus.empty(), "cannot build a vocabulary from an empty corpus");
  std::set<std::string> ops;
  std::set<std::string> operands;
  for (const FunctionVariant& v : corpus.variants()) {
    for (const BasicBlock& block : v.acfg.blocks) {
      for (const RawInstruction& ins : block.instructions) {
        NormalizedInstruction n = NormalizeInstruction(ins, options);
        ops.insert(n.operation);
        for (const std::string& t : n.operands) {
          if (t != kPadToken) operands.insert(t);
        }
      }
    }
  }
  return Vocab(std::vector<std::string>(ops.begin(), ops.end()),
               std::vector<std::string>(operands.begin(), operands.end()));
}

EncodedInstruction EncodeInstruction(const NormalizedInstruction& instr,
                                     const Vocab& vocab) {
  EncodedInstruction ids;
  ids.op = vocab.OpId(instr.operation);
  for (int k = 0; k < kOperandSlots; ++k) {
    const std::string& t = instr.operands[static_cast<std::size_t>(k)];
    ids.operands[static_cast<std::size_t>(k)] =
        t == kPadToken ? kPadId : vocab.OperandId(t);
  }
  return ids;
}

NormalizedInstruction DecodeInstruction(const EncodedInstruction& ids,
                                        const Vocab& vocab) {
  NormalizedInstruction n;
  n.operation = vocab.OpToken(ids.op);
  for (int k = 0; k < kOperandSlots; ++k) {
    n.operands[static_cast<std::size_t>(k)] =
        vocab.OperandToken(ids.operands[static_cast<std::size_t>(k)]);
  }
  return n;
}

EncodedFunction TokenizeVariant(const FunctionVariant& variant,
                                const Vocab& vocab,
                                const NormalizerOptions& options) {
  EncodedFunction f;
  f.blocks.reserve(variant.acfg.blocks.size());
  for (const BasicBlock& block : variant.acfg.blocks) {
    std::vector<EncodedInstruction> ids;
    ids.reserve(block.instructions.size());
    for (const RawInstruction& ins : block.instructions) {
      ids.push_back(EncodeInstruction(NormalizeInstruction(ins, options), vocab));
    }
    f.blocks.push_back(std::move(ids));
  }
  f.edges = variant.acfg.edges;
  return f;
}

}  // namespace graphmoco
