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

#include "graphmoco/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "graphmoco/error.hpp"

namespace graphmoco {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse: return "parse error";
    case ErrorCode::kDuplicateVariant: return "duplicate variant";
    case ErrorCode::kInfeasibleSplit: return "infeasible split";
    case ErrorCode::kLookup: return "lookup error";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kIndex: return "index out of range";
    case ErrorCode::kInfeasibleTask: return "infeasible task";
    case ErrorCode::kUndefinedMetric: return "undefined metric";
    case ErrorCode::kNumeric: return "numeric error";
    case ErrorCode::kShapeMismatch: return "shape mismatch";
    case ErrorCode::kFormat: return "format error";
    case ErrorCode::kVersionMismatch: return "version mismatch";
    case ErrorCode::kIo: return "i/o error";
  }
  return "error";
}

std::string ToString(Arch arch) {
  switch (arch) {
    case Arch::kX86: return "x86";
    case Arch::kArm: return "arm";
    case Arch::kMips: return "mips";
  }
  return "?";
}

std::string ToString(OptLevel opt) {
  static const char* kNames[] = {"O0", "O1", "O2", "O3", "Os"};
  return kNames[static_cast<int>(opt)];
}

Arch ParseArch(const std::string& text) {
  if (text == "x86") return Arch::kX86;
  if (text == "arm") return Arch::kArm;
  if (text == "mips") return Arch::kMips;
  Fail(ErrorCode::kParse, "unknown arch '" + text + "'");
}

OptLevel ParseOptLevel(const std::string& text) {
  static const char* kNames[] = {"O0", "O1", "O2", "O3", "Os"};
  for (int i = 0; i < 5; ++i) {
    if (text == kNames[i]) return static_cast<OptLevel>(i);
  }
  Fail(ErrorCode::kParse, "unknown opt_level '" + text + "'");
}

std::string VariantKey::ToString() const {
  std::ostringstream out;
  out << function_id << '|' << graphmoco::ToString(arch) << '-' << bitness
      << '|' << compiler << '-' << compiler_version << '|'
      << graphmoco::ToString(opt_level);
  return out.str();
}

namespace {

void ValidateVariant(FunctionVariant& v) {
  Acfg& g = v.acfg;
  if (g.blocks.empty()) Fail(ErrorCode::kParse, "ACFG has no blocks");
  const int n = static_cast<int>(g.blocks.size());
  for (const BasicBlock& block : g.blocks) {
    if (block.instructions.empty()) {
      Fail(ErrorCode::kParse, "basic block has no instructions");
    }
    for (const RawInstruction& ins : block.instructions) {
      if (ins.tokens.empty()) Fail(ErrorCode::kParse, "empty instruction");
      if (!ins.addr_tags) continue;
      const int len = static_cast<int>(ins.tokens.size());
      std::set<int> seen;
      for (const auto* list : {&ins.addr_tags->in, &ins.addr_tags->out}) {
        for (int idx : *list) {
          if (idx < 0 || idx >= len) {
            Fail(ErrorCode::kParse, "address tag index out of bounds");
          }
          if (!seen.insert(idx).second) {
            Fail(ErrorCode::kParse, "address tag sets are not disjoint");
          }
        }
      }
    }
  }
  for (const auto& [src, dst] : g.edges) {
    if (src < 0 || src >= n || dst < 0 || dst >= n) {
      Fail(ErrorCode::kParse, "edge endpoint out of range");
    }
  }
  std::sort(g.edges.begin(), g.edges.end());
  g.edges.erase(std::unique(g.edges.begin(), g.edges.end()), g.edges.end());
  if (v.meta.bitness != 32 && v.meta.bitness != 64) {
    Fail(ErrorCode::kParse, "bitness must be 32 or 64");
  }
}

const nlohmann::json& Field(const nlohmann::json& record, const char* name) {
  auto it = record.find(name);
  if (it == record.end()) {
    Fail(ErrorCode::kParse, std::string("missing field '") + name + "'");
  }
  return *it;
}

}  // namespace

Corpus::Corpus(std::vector<FunctionVariant> variants)
    : variants_(std::move(variants)) {
  std::set<std::string> keys;
  for (std::size_t i = 0; i < variants_.size(); ++i) {
    ValidateVariant(variants_[i]);
    std::string key = variants_[i].key();
    if (!keys.insert(key).second) {
      Fail(ErrorCode::kDuplicateVariant, "duplicate variant key " + key);
    }
    groups_[variants_[i].function_id()].push_back(i);
  }
}

const std::vector<std::size_t>& Corpus::Group(
    const std::string& function_id) const {
  auto it = groups_.find(function_id);
  if (it == groups_.end()) {
    Fail(ErrorCode::kLookup, "unknown function_id '" + function_id + "'");
  }
  return it->second;
}

std::vector<std::string> Corpus::FunctionIds() const {
  std::vector<std::string> ids;
  ids.reserve(groups_.size());
  for (const auto& [id, members] : groups_) ids.push_back(id);
  return ids;
}

Corpus Corpus::Subset(const std::vector<std::string>& function_ids) const {
  std::set<std::string> wanted(function_ids.begin(), function_ids.end());
  std::vector<FunctionVariant> picked;
  for (const FunctionVariant& v : variants_) {
    if (wanted.count(v.function_id())) picked.push_back(v);
  }
  return Corpus(std::move(picked));
}

FunctionVariant ParseVariant(const nlohmann::json& record) {
  if (!record.is_object()) Fail(ErrorCode::kParse, "record is not an object");
  FunctionVariant v;
  try {
    v.meta.function_id = Field(record, "function_id").get<std::string>();
    v.meta.arch = ParseArch(Field(record, "arch").get<std::string>());
    v.meta.bitness = Field(record, "bitness").get<int>();
    v.meta.compiler = Field(record, "compiler").get<std::string>();
    v.meta.compiler_version =
        Field(record, "compiler_version").get<std::string>();
    v.meta.opt_level =
        ParseOptLevel(Field(record, "opt_level").get<std::string>());
    for (const auto& block_json : Field(record, "blocks")) {
      BasicBlock block;
      for (const auto& ins_json : block_json) {
        RawInstruction ins;
        ins.tokens = ins_json.get<std::vector<std::string>>();
        block.instructions.push_back(std::move(ins));
      }
      v.acfg.blocks.push_back(std::move(block));
    }
    for (const auto& edge : Field(record, "edges")) {
      if (!edge.is_array() || edge.size() != 2) {
        Fail(ErrorCode::kParse, "edge must be a [source, target] pair");
      }
      v.acfg.edges.emplace_back(edge[0].get<int>(), edge[1].get<int>());
    }
    if (auto it = record.find("addr_tags");
        it != record.end() && !it->is_null()) {
      if (it->size() != v.acfg.blocks.size()) {
        Fail(ErrorCode::kParse, "addr_tags must have one entry per block");
      }
      for (std::size_t b = 0; b < v.acfg.blocks.size(); ++b) {
        auto& instrs = v.acfg.blocks[b].instructions;
        const auto& tags = (*it)[b];
        if (tags.size() != instrs.size()) {
          Fail(ErrorCode::kParse,
               "addr_tags must have one entry per instruction");
        }
        for (std::size_t i = 0; i < instrs.size(); ++i) {
          if (tags[i].is_null()) continue;
          AddressTags t;
          t.in = tags[i].value("in", std::vector<int>{});
          t.out = tags[i].value("out", std::vector<int>{});
          instrs[i].addr_tags = std::move(t);
        }
      }
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, e.what());
  }
  ValidateVariant(v);
  return v;
}

nlohmann::json VariantToJson(const FunctionVariant& v) {
  nlohmann::json record;
  record["function_id"] = v.meta.function_id;
  record["arch"] = ToString(v.meta.arch);
  record["bitness"] = v.meta.bitness;
  record["compiler"] = v.meta.compiler;
  record["compiler_version"] = v.meta.compiler_version;
  record["opt_level"] = ToString(v.meta.opt_level);
  nlohmann::json blocks = nlohmann::json::array();
  nlohmann::json tags = nlohmann::json::array();
  bool any_tags = false;
  for (const BasicBlock& block : v.acfg.blocks) {
    nlohmann::json instrs = nlohmann::json::array();
    nlohmann::json block_tags = nlohmann::json::array();
    for (const RawInstruction& ins : block.instructions) {
      instrs.push_back(ins.tokens);
      if (ins.addr_tags) {
        any_tags = true;
        block_tags.push_back(
            {{"in", ins.addr_tags->in}, {"out", ins.addr_tags->out}});
      } else {
        block_tags.push_back(nullptr);
      }
    }
    blocks.push_back(std::move(instrs));
    tags.push_back(std::move(block_tags));
  }
  record["blocks"] = std::move(blocks);
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [src, dst] : v.acfg.edges) edges.push_back({src, dst});
  record["edges"] = std::move(edges);
  if (any_tags) record["addr_tags"] = std::move(tags);
  return record;
}

Corpus LoadCorpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open corpus " + path.string());
  std::vector<FunctionVariant> variants;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      variants.push_back(ParseVariant(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      Fail(ErrorCode::kParse, path.string() + ":" + std::to_string(line_no) +
                                  ": " + e.what());
    } catch (const Error& e) {
      Fail(e.code(), path.string() + ":" + std::to_string(line_no) + ": " +
                         e.what());
    }
  }
  return Corpus(std::move(variants));
}

std::string SerializeCorpus(const Corpus& corpus) {
  std::string out;
  for (const FunctionVariant& v : corpus.variants()) {
    out += VariantToJson(v).dump();
    out += '\n';
  }
  return out;
}

void SaveCorpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write corpus " + path.string());
  out << SerializeCorpus(corpus);
}

CorpusSplit SplitCorpus(const Corpus& corpus, const SplitRatios& ratios,
                        std::uint64_t seed) {
  const double parts[3] = {ratios.train, ratios.val, ratios.test};
  double sum = 0.0;
  for (double r : parts) {
    Require(r >= 0.0, "split ratios must be non-negative");
    sum += r;
  }
  Require(std::abs(sum - 1.0) <= 1e-9, "split ratios must sum to 1");

  std::vector<std::string> ids = corpus.FunctionIds();
  const std::size_t n = ids.size();
  const int nonzero = static_cast<int>(std::count_if(
      std::begin(parts), std::end(parts), [](double r) { return r > 0; }));
  if (n < static_cast<std::size_t>(nonzero)) {
    Fail(ErrorCode::kInfeasibleSplit,
         std::to_string(n) + " function groups cannot fill " +
             std::to_string(nonzero) + " non-empty splits");
  }

  // Largest-remainder apportionment, then make sure no requested split is
  // left empty.
  std::size_t counts[3];
  double remainders[3];
  std::size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    const double exact = parts[i] * static_cast<double>(n);
    counts[i] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainders[i] = exact - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < n) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (remainders[i] > remainders[best] + 1e-12) best = i;
    }
    ++counts[best];
    remainders[best] = -1.0;
    ++assigned;
  }
  for (int i = 0; i < 3; ++i) {
    if (parts[i] > 0 && counts[i] == 0) {
      int donor = static_cast<int>(
          std::max_element(std::begin(counts), std::end(counts)) -
          std::begin(counts));
      --counts[donor];
      ++counts[i];
    }
  }

  Rng rng(seed);
  std::shuffle(ids.begin(), ids.end(), rng);
  auto take = [&](std::size_t begin, std::size_t count) {
    return corpus.Subset(std::vector<std::string>(
        ids.begin() + static_cast<std::ptrdiff_t>(begin),
        ids.begin() + static_cast<std::ptrdiff_t>(begin + count)));
  };
  CorpusSplit split;
  split.train = take(0, counts[0]);
  split.val = take(counts[0], counts[1]);
  split.test = take(counts[0] + counts[1], counts[2]);
  return split;
}

std::pair<const FunctionVariant*, const FunctionVariant*> SamplePositivePair(
    const Corpus& corpus, const std::string& function_id, Rng& rng,
    bool allow_self_pair) {
  const auto& group = corpus.Group(function_id);
  const auto& vs = corpus.variants();
  if (group.size() == 1) {
    Require(allow_self_pair,
            "function '" + function_id + "' has a single variant");
    return {&vs[group[0]], &vs[group[0]]};
  }
  std::uniform_int_distribution<std::size_t> first(0, group.size() - 1);
  std::uniform_int_distribution<std::size_t> second(0, group.size() - 2);
  const std::size_t i = first(rng);
  std::size_t j = second(rng);
  if (j >= i) ++j;
  return {&vs[group[i]], &vs[group[j]]};
}

Corpus DropDuplicateFunctions(const Corpus& corpus) {
  std::set<std::string> seen;
  std::vector<std::string> keep;
  for (const auto& [id, members] : corpus.groups()) {
    std::string signature;
    for (std::size_t idx : members) {
      nlohmann::json record = VariantToJson(corpus.variants()[idx]);
      record.erase("function_id");
      signature += record.dump();
      signature += '\n';
    }
    if (seen.insert(signature).second) keep.push_back(id);
  }
  return corpus.Subset(keep);
}

std::string Fingerprint(std::string_view bytes) {
  std::uint64_t hash = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace graphmoco
