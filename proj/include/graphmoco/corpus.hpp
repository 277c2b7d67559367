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

#ifndef GRAPHMOCO_CORPUS_HPP
#define GRAPHMOCO_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace graphmoco {

// Seeded random source used everywhere randomness is part of a contract.
using Rng = std::mt19937_64;

enum class Arch { kX86, kArm, kMips };
enum class OptLevel { kO0, kO1, kO2, kO3, kOs };

std::string ToString(Arch arch);
std::string ToString(OptLevel opt);
Arch ParseArch(const std::string& text);
OptLevel ParseOptLevel(const std::string& text);

// Token indices (into RawInstruction::tokens) known to hold addresses inside
// or outside the enclosing function.
struct AddressTags {
  std::vector<int> in;
  std::vector<int> out;
};

struct RawInstruction {
  // tokens[0] is the operation mnemonic, the rest are operands.
  std::vector<std::string> tokens;
  std::optional<AddressTags> addr_tags;
};

struct BasicBlock {
  std::vector<RawInstruction> instructions;
};

struct Acfg {
  std::vector<BasicBlock> blocks;
  // Directed (source, target) block indices. Duplicates are removed on load.
  std::vector<std::pair<int, int>> edges;
};

// The metadata tuple that identifies a variant within a corpus. Ordering is
// lexicographic on ToString(), which is also the ranking tie-break order.
struct VariantKey {
  std::string function_id;
  Arch arch = Arch::kX86;
  int bitness = 64;
  std::string compiler;
  std::string compiler_version;
  OptLevel opt_level = OptLevel::kO0;

  std::string ToString() const;
  friend bool operator==(const VariantKey&, const VariantKey&) = default;
};

struct FunctionVariant {
  VariantKey meta;
  Acfg acfg;

  const std::string& function_id() const { return meta.function_id; }
  std::string key() const { return meta.ToString(); }
};

// Immutable collection of variants with a function_id -> variant index
// grouping. Construction validates every record and rejects duplicate keys.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<FunctionVariant> variants);

  const std::vector<FunctionVariant>& variants() const { return variants_; }
  const std::map<std::string, std::vector<std::size_t>>& groups() const {
    return groups_;
  }
  std::size_t size() const { return variants_.size(); }
  bool empty() const { return variants_.empty(); }

  // Variant indices of one source function; throws kLookup when unknown.
  const std::vector<std::size_t>& Group(const std::string& function_id) const;
  std::vector<std::string> FunctionIds() const;

  // Sub-corpus holding every variant of the listed functions.
  Corpus Subset(const std::vector<std::string>& function_ids) const;

 private:
  std::vector<FunctionVariant> variants_;
  std::map<std::string, std::vector<std::size_t>> groups_;
};

// JSONL record <-> variant. ParseVariant validates the ACFG invariants.
FunctionVariant ParseVariant(const nlohmann::json& record);
nlohmann::json VariantToJson(const FunctionVariant& variant);

Corpus LoadCorpus(const std::filesystem::path& path);
void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path);
std::string SerializeCorpus(const Corpus& corpus);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus val;
  Corpus test;
};

// Splits by function_id so all variants of a function land in one split.
CorpusSplit SplitCorpus(const Corpus& corpus, const SplitRatios& ratios,
                        std::uint64_t seed);

// Draws two distinct variants of one function uniformly over ordered pairs.
// A singleton group yields (A, A) only when allow_self_pair is set.
std::pair<const FunctionVariant*, const FunctionVariant*> SamplePositivePair(
    const Corpus& corpus, const std::string& function_id, Rng& rng,
    bool allow_self_pair = false);

// Drops functions whose variant set is textually identical to an earlier
// function (ignoring function_id). Off unless a caller opts in.
Corpus DropDuplicateFunctions(const Corpus& corpus);

// Upper bound on the number of blocks a synthetic variant gains by block
// splitting relative to its template.
inline constexpr int kSynthMaxBlockSplits = 2;
// Distinct (arch, bitness, compiler, version, opt) configurations available
// to the generator, hence the maximum variants per function.
inline constexpr int kSynthMaxVariants = 120;

// Deterministic pseudo-assembly corpus: template ACFGs rendered per variant
// through a pseudo-architecture with semantics-preserving perturbations.
Corpus SynthCorpus(int n_functions, int variants_per_function,
                   std::uint64_t seed);

// Stable 64-bit FNV-1a hash rendered as 16 hex digits.
std::string Fingerprint(std::string_view bytes);

}  // namespace graphmoco

#endif  // GRAPHMOCO_CORPUS_HPP
