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

#include <random>
#include <set>

#include "graphmoco/encoder.hpp"
#include "graphmoco/error.hpp"
#include "graphmoco/trainer.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

namespace graphmoco {
namespace {

using testing::Pointers;
using testing::RandomFunction;
using testing::TinyConfig;

constexpr int kOps = 6;
constexpr int kOperands = 7;

Matrix RandomUnitRows(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  m.rowwise().normalize();
  return m;
}

double PipelineGradientError(const EncoderConfig& config, std::uint64_t seed,
                             std::string* worst) {
  std::mt19937_64 rng(seed);
  EncoderParams params = InitEncoder(config, kOps, kOperands, seed);
  std::vector<EncodedFunction> fns;
  for (int i = 0; i < 2; ++i) fns.push_back(RandomFunction(rng, 4, 3, kOps, kOperands));
  const auto ptrs = Pointers(fns);
  const Matrix k = RandomUnitRows(2, config.graph.output_dim, rng);
  const Matrix queue = RandomUnitRows(4, config.graph.output_dim, rng);
  const double tau = 0.07;

  EncoderCache cache;
  const Matrix q = EncodeFunctions(ptrs, params, &cache);
  Matrix grad_q;
  InfoNceLoss(q, k, queue, tau, &grad_q);
  EncoderParams grad = ZerosLike(params);
  EncodeFunctionsBackward(grad_q, cache, params, grad);
  return oracle::GradientCheck(
      params, grad,
      [&] { return InfoNceLoss(EncodeFunctions(ptrs, params), k, queue, tau); },
      1e-5, worst);
}

TEST(EncodeFunctionsBackward, InfoNceGradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    std::string worst;
    EXPECT_LE(PipelineGradientError(TinyConfig(), seed, &worst), 1e-4) << worst;
  }
}

TEST(EncodeFunctionsBackward, DirectedAndUnscaledVariants) {
  EncoderConfig c = TinyConfig();
  c.graph.directed = true;
  std::string worst;
  EXPECT_LE(PipelineGradientError(c, 11, &worst), 1e-4) << worst;
  c.graph.node_norm = false;
  c.graph.two_tuple_enabled = false;
  EXPECT_LE(PipelineGradientError(c, 12, &worst), 1e-4) << worst;
}

TEST(EncodeFunctions, BatchOfEightMatchesSingles) {
  std::mt19937_64 rng(3);
  const EncoderParams params = InitEncoder(TinyConfig(), kOps, kOperands, 5);
  std::vector<EncodedFunction> fns;
  for (int i = 0; i < 8; ++i) fns.push_back(RandomFunction(rng, 6, 5, kOps, kOperands));
  const Matrix batch = EncodeFunctions(Pointers(fns), params);
  for (std::size_t i = 0; i < fns.size(); ++i) {
    const EncodedFunction* one[] = {&fns[i]};
    const Matrix single = EncodeFunctions(one, params);
    EXPECT_LE((batch.row(static_cast<Eigen::Index>(i)) - single.row(0)).cwiseAbs().maxCoeff(),
              1e-5);
  }
}

TEST(EncodeFunctions, OrderOfBatchDoesNotMatter) {
  std::mt19937_64 rng(4);
  const EncoderParams params = InitEncoder(TinyConfig(), kOps, kOperands, 6);
  const EncodedFunction x = RandomFunction(rng, 4, 3, kOps, kOperands);
  const EncodedFunction y = RandomFunction(rng, 4, 3, kOps, kOperands);
  const EncodedFunction* xy[] = {&x, &y};
  const EncodedFunction* yx[] = {&y, &x};
  const Matrix a = EncodeFunctions(xy, params);
  const Matrix b = EncodeFunctions(yx, params);
  EXPECT_LE((a.row(0) - b.row(1)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((a.row(1) - b.row(0)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(EncodeCorpus, ChunkingDoesNotChangeRows) {
  const Corpus corpus = SynthCorpus(6, 3, 2);
  const Vocab vocab = BuildVocab(corpus);
  EncoderConfig c = TinyConfig();
  const EncoderParams params = InitEncoder(c, vocab.op_size(), vocab.operand_size(), 1);
  const Matrix one = EncodeCorpus(corpus, vocab, params, 1);
  const Matrix many = EncodeCorpus(corpus, vocab, params, 7);
  ASSERT_EQ(one.rows(), static_cast<Eigen::Index>(corpus.size()));
  EXPECT_LE((one - many).cwiseAbs().maxCoeff(), 1e-5);
  const Vector first = EncodeFunction(corpus.variants()[0], vocab, params);
  EXPECT_LE((one.row(0).transpose() - first).cwiseAbs().maxCoeff(), 1e-12);
  for (Eigen::Index r = 0; r < one.rows(); ++r) EXPECT_NEAR(one.row(r).norm(), 1.0, 1e-12);
}

TEST(ParamRefs, NamesShapesAndFrozenPad) {
  EncoderParams p = InitEncoder(TinyConfig(), kOps, kOperands, 1);
  const auto refs = ParamRefs(p);
  std::set<std::string> names;
  std::size_t total = 0;
  for (const ParamRef& r : refs) {
    EXPECT_TRUE(names.insert(r.name).second) << r.name;
    long count = 1;
    for (long s : r.shape) count *= s;
    EXPECT_EQ(static_cast<std::size_t>(count), r.values.size()) << r.name;
    total += r.values.size();
  }
  EXPECT_TRUE(names.count("tokens/op_table"));
  EXPECT_TRUE(names.count("graph/pair/self"));
  EXPECT_TRUE(names.count("graph/readout/weight"));
  // 6x4 + 7x4 tokens, 8x(16+24+32) + 24 strand, 520 + 136 layers, 136 pair,
  // 256x8 + 256 readout.
  EXPECT_EQ(total, 3748u);
  for (const ParamRef& r : refs) {
    if (r.name == "tokens/operand_table") {
      EXPECT_EQ(r.frozen, 4u);
      for (std::size_t j = 0; j < r.frozen; ++j) EXPECT_EQ(r.values[j], 0.0);
    } else if (r.name == "graph/readout/bias") {
      EXPECT_EQ(r.frozen, r.values.size());
      for (double v : r.values) EXPECT_EQ(v, 0.0);
    } else {
      EXPECT_EQ(r.frozen, 0u) << r.name;
    }
  }
  EncoderParams zeros = ZerosLike(p);
  for (const ParamRef& r : ParamRefs(zeros)) {
    for (double v : r.values) ASSERT_EQ(v, 0.0);
  }
}

TEST(EncoderConfig, JsonRoundTrip) {
  EncoderConfig c = TinyConfig();
  c.graph.directed = true;
  c.graph.node_norm = false;
  c.graph.two_tuple_node_cap = 12;
  const EncoderConfig back = EncoderConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_EQ(back.BlockDim(), 3 * 8 + 2 * 4);
  try {
    EncoderConfig::FromJson({{"token_dim", "wide"}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
  }
}

}  // namespace
}  // namespace graphmoco
