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

#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>

#include "graphmoco/corpus.hpp"
#include "graphmoco/error.hpp"
#include "test_util.hpp"

namespace graphmoco {
namespace {

using testing::SimpleVariant;
using testing::TempDir;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kIo;
}

void WriteLines(const std::filesystem::path& path,
                const std::vector<std::string>& lines) {
  std::ofstream out(path);
  for (const auto& l : lines) out << l << "\n";
}

TEST(LoadCorpus, TwoVariantsFormOneGroup) {
  TempDir dir;
  Corpus c({SimpleVariant("f", Arch::kX86), SimpleVariant("f", Arch::kArm)});
  SaveCorpus(c, dir / "c.jsonl");
  const Corpus loaded = LoadCorpus(dir / "c.jsonl");
  ASSERT_EQ(loaded.size(), 2u);
  ASSERT_EQ(loaded.groups().size(), 1u);
  EXPECT_EQ(loaded.Group("f").size(), 2u);
}

TEST(LoadCorpus, EmptyFileIsEmptyCorpus) {
  TempDir dir;
  WriteLines(dir / "e.jsonl", {});
  const Corpus c = LoadCorpus(dir / "e.jsonl");
  EXPECT_TRUE(c.empty());
  EXPECT_TRUE(c.groups().empty());
}

TEST(LoadCorpus, MissingEdgesNamesTheLine) {
  TempDir dir;
  const std::string good = VariantToJson(SimpleVariant("f")).dump();
  nlohmann::json bad = VariantToJson(SimpleVariant("g"));
  bad.erase("edges");
  WriteLines(dir / "c.jsonl", {good, bad.dump()});
  try {
    LoadCorpus(dir / "c.jsonl");
    FAIL() << "expected a parse error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kParse);
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("edges"), std::string::npos);
  }
}

TEST(LoadCorpus, DuplicateKeyRejected) {
  TempDir dir;
  const std::string line = VariantToJson(SimpleVariant("f")).dump();
  WriteLines(dir / "c.jsonl", {line, line});
  EXPECT_EQ(CodeOf([&] { LoadCorpus(dir / "c.jsonl"); }),
            ErrorCode::kDuplicateVariant);
}

TEST(LoadCorpus, DuplicateEdgesCollapseSelfLoopsKept) {
  FunctionVariant v = testing::MakeVariant(
      "f", Arch::kX86, 64, "gcc", "9.4", OptLevel::kO2,
      {{{"nop"}}, {{"ret"}}}, {{0, 1}, {0, 1}, {1, 1}, {1, 1}});
  const Corpus c({v});
  const auto& edges = c.variants()[0].acfg.edges;
  EXPECT_EQ(edges.size(), 2u);
  EXPECT_NE(std::find(edges.begin(), edges.end(), std::pair{1, 1}), edges.end());
}

TEST(LoadCorpus, RejectsBadEdgesAndTags) {
  nlohmann::json r = VariantToJson(SimpleVariant("f"));
  r["edges"] = {{0, 5}};
  EXPECT_EQ(CodeOf([&] { ParseVariant(r); }), ErrorCode::kParse);
  r = VariantToJson(SimpleVariant("f"));
  r["addr_tags"] = {{{{"in", {1}}, {"out", {1}}}, nullptr}};
  EXPECT_EQ(CodeOf([&] { ParseVariant(r); }), ErrorCode::kParse);
  r["addr_tags"] = {{{{"in", {7}}, {"out", nlohmann::json::array()}}, nullptr}};
  EXPECT_EQ(CodeOf([&] { ParseVariant(r); }), ErrorCode::kParse);
  r = VariantToJson(SimpleVariant("f"));
  r["blocks"] = {nlohmann::json::array()};
  EXPECT_EQ(CodeOf([&] { ParseVariant(r); }), ErrorCode::kParse);
}

TEST(LoadCorpus, AddressTagsRoundTrip) {
  FunctionVariant v = SimpleVariant("f");
  v.acfg.blocks[0].instructions[0].addr_tags = AddressTags{{}, {2}};
  const FunctionVariant back = ParseVariant(VariantToJson(v));
  ASSERT_TRUE(back.acfg.blocks[0].instructions[0].addr_tags.has_value());
  EXPECT_EQ(back.acfg.blocks[0].instructions[0].addr_tags->out, std::vector<int>{2});
  EXPECT_FALSE(back.acfg.blocks[0].instructions[1].addr_tags.has_value());
}

Corpus TenGroups() {
  std::vector<FunctionVariant> vs;
  for (int f = 0; f < 10; ++f) {
    vs.push_back(SimpleVariant("f" + std::to_string(f), Arch::kX86));
    vs.push_back(SimpleVariant("f" + std::to_string(f), Arch::kMips));
  }
  return Corpus(std::move(vs));
}

TEST(SplitCorpus, RatioArithmeticAndDisjointness) {
  const CorpusSplit s = SplitCorpus(TenGroups(), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(s.train.groups().size(), 8u);
  EXPECT_EQ(s.val.groups().size(), 1u);
  EXPECT_EQ(s.test.groups().size(), 1u);
  std::set<std::string> all;
  for (const Corpus* c : {&s.train, &s.val, &s.test}) {
    for (const auto& id : c->FunctionIds()) EXPECT_TRUE(all.insert(id).second);
  }
  EXPECT_EQ(all.size(), 10u);
  EXPECT_EQ(s.train.size() + s.val.size() + s.test.size(), 20u);
}

TEST(SplitCorpus, Deterministic) {
  const CorpusSplit a = SplitCorpus(TenGroups(), {0.8, 0.1, 0.1}, 7);
  const CorpusSplit b = SplitCorpus(TenGroups(), {0.8, 0.1, 0.1}, 7);
  EXPECT_EQ(a.train.FunctionIds(), b.train.FunctionIds());
  EXPECT_EQ(a.val.FunctionIds(), b.val.FunctionIds());
  EXPECT_EQ(a.test.FunctionIds(), b.test.FunctionIds());
}

TEST(SplitCorpus, TooFewGroupsIsInfeasible) {
  Corpus c({SimpleVariant("a"), SimpleVariant("b")});
  EXPECT_EQ(CodeOf([&] { SplitCorpus(c, {0.8, 0.1, 0.1}, 1); }),
            ErrorCode::kInfeasibleSplit);
  EXPECT_EQ(CodeOf([&] { SplitCorpus(c, {0.5, 0.4, 0.2}, 1); }),
            ErrorCode::kPrecondition);
}

TEST(SamplePositivePair, TwoElementGroupOutcomes) {
  Corpus c({SimpleVariant("f", Arch::kX86), SimpleVariant("f", Arch::kArm)});
  Rng rng(3);
  std::set<std::pair<std::string, std::string>> seen;
  for (int i = 0; i < 200; ++i) {
    auto [a, b] = SamplePositivePair(c, "f", rng);
    EXPECT_EQ(a->function_id(), b->function_id());
    EXPECT_NE(a->key(), b->key());
    seen.insert({a->key(), b->key()});
  }
  EXPECT_EQ(seen.size(), 2u);
}

TEST(SamplePositivePair, SingletonPolicy) {
  Corpus c({SimpleVariant("f")});
  Rng rng(1);
  EXPECT_EQ(CodeOf([&] { SamplePositivePair(c, "f", rng); }), ErrorCode::kPrecondition);
  auto [a, b] = SamplePositivePair(c, "f", rng, true);
  EXPECT_EQ(a, b);
  EXPECT_EQ(CodeOf([&] { SamplePositivePair(c, "missing", rng); }), ErrorCode::kLookup);
}

TEST(SamplePositivePair, UnorderedPairsAreUniform) {
  Corpus c({SimpleVariant("f", Arch::kX86), SimpleVariant("f", Arch::kArm),
            SimpleVariant("f", Arch::kMips)});
  Rng rng(11);
  std::map<std::set<std::string>, int> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    auto [a, b] = SamplePositivePair(c, "f", rng);
    counts[{a->key(), b->key()}]++;
  }
  ASSERT_EQ(counts.size(), 3u);
  for (const auto& [pair, n] : counts) {
    EXPECT_NEAR(static_cast<double>(n) / draws, 1.0 / 3.0, 0.02);
  }
}

TEST(SynthCorpus, MinimalCase) {
  const Corpus c = SynthCorpus(1, 1, 0);
  EXPECT_EQ(c.size(), 1u);
  EXPECT_EQ(c.groups().size(), 1u);
}

TEST(SynthCorpus, ByteIdenticalAcrossRuns) {
  EXPECT_EQ(SerializeCorpus(SynthCorpus(5, 4, 9)), SerializeCorpus(SynthCorpus(5, 4, 9)));
  EXPECT_NE(SerializeCorpus(SynthCorpus(5, 4, 9)), SerializeCorpus(SynthCorpus(5, 4, 10)));
}

TEST(SynthCorpus, VariantsDifferTextuallyWithinSplitBound) {
  const Corpus c = SynthCorpus(50, 4, 3);
  ASSERT_EQ(c.size(), 200u);
  for (const auto& [fid, members] : c.groups()) {
    ASSERT_EQ(members.size(), 4u);
    std::set<std::string> texts;
    std::size_t lo = SIZE_MAX, hi = 0;
    for (std::size_t i : members) {
      nlohmann::json r = VariantToJson(c.variants()[i]);
      texts.insert(r["blocks"].dump());
      lo = std::min(lo, c.variants()[i].acfg.blocks.size());
      hi = std::max(hi, c.variants()[i].acfg.blocks.size());
    }
    EXPECT_EQ(texts.size(), 4u) << fid;
    EXPECT_LE(hi - lo, static_cast<std::size_t>(kSynthMaxBlockSplits)) << fid;
  }
}

TEST(SynthCorpus, TemplateSizesInRange) {
  const Corpus c = SynthCorpus(40, 1, 5);
  for (const auto& v : c.variants()) {
    EXPECT_GE(v.acfg.blocks.size(), 3u);
    EXPECT_LE(v.acfg.blocks.size(), 15u + kSynthMaxBlockSplits);
  }
}

TEST(SynthCorpus, RejectsBadCounts) {
  EXPECT_EQ(CodeOf([] { SynthCorpus(0, 1, 0); }), ErrorCode::kPrecondition);
  EXPECT_EQ(CodeOf([] { SynthCorpus(1, kSynthMaxVariants + 1, 0); }),
            ErrorCode::kPrecondition);
}

TEST(Corpus, GroupsPartitionVariants) {
  const Corpus c = SynthCorpus(7, 3, 2);
  std::size_t total = 0;
  std::set<std::size_t> seen;
  for (const auto& [fid, members] : c.groups()) {
    total += members.size();
    for (std::size_t i : members) {
      EXPECT_TRUE(seen.insert(i).second);
      EXPECT_EQ(c.variants()[i].function_id(), fid);
    }
  }
  EXPECT_EQ(total, c.size());
}

TEST(Corpus, DropDuplicateFunctions) {
  Corpus c({SimpleVariant("a"), SimpleVariant("b"), SimpleVariant("c", Arch::kArm)});
  const Corpus d = DropDuplicateFunctions(c);
  EXPECT_EQ(d.FunctionIds(), (std::vector<std::string>{"a", "c"}));
}

}  // namespace
}  // namespace graphmoco
