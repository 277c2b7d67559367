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

#ifndef GRAPHMOCO_EVAL_HPP
#define GRAPHMOCO_EVAL_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "graphmoco/corpus.hpp"
#include "graphmoco/tensor.hpp"
#include "json.hpp"

namespace graphmoco {

// Cosine of the angle between a and b; throws kPrecondition on a zero vector.
double CosineSim(const Vector& a, const Vector& b);

// Mann-Whitney form: P(s+ > s-) + P(s+ == s-) / 2 over all cross pairs.
double AucRoc(std::span<const double> scores, std::span<const int> labels);

// Labels 1 where the score reaches the threshold.
std::vector<int> ThresholdClassify(std::span<const double> scores,
                                   double threshold);

// One query's candidates in rank order.
struct Ranking {
  std::vector<std::string> keys;
  std::vector<double> scores;
  std::vector<bool> relevant;

  int num_relevant() const;
};

// Sorts candidates by descending score, ties by ascending key.
Ranking RankCandidates(std::span<const double> scores,
                       std::span<const std::string> keys,
                       const std::vector<bool>& relevant);

double MrrAtK(std::span<const Ranking> rankings, int k = 10);
double RecallAt1(std::span<const Ranking> rankings);

// sum_{k<=n} P(k) rel(k) / n_rel.
double AveragePrecision(const Ranking& ranking, int n, int n_rel);

// Mean AP with n_rel taken as the ranking's relevant count, clipped to n
// when cap_nrel is set.
double MeanAp(std::span<const Ranking> rankings, int n = 10,
              bool cap_nrel = false);

enum class TaskKind { kArch, kOpt, kComp, kXc, kXcXb, kXa, kXm, kSearch };

std::string ToString(TaskKind kind);
TaskKind ParseTaskKind(const std::string& text);

// Whether (a, b) satisfies the metadata constraint of `kind`, ignoring
// function identity.
bool SatisfiesKind(TaskKind kind, const VariantKey& a, const VariantKey& b);

// Variant indices refer to the corpus the task was built from.
struct PairTask {
  struct Query {
    std::size_t query = 0;
    std::vector<std::size_t> candidates;
    std::vector<bool> relevant;
  };

  TaskKind kind = TaskKind::kXm;
  std::vector<std::pair<std::size_t, std::size_t>> positives;
  std::vector<std::pair<std::size_t, std::size_t>> negatives;
  std::vector<Query> queries;
  int pool_size = 0;
};

// Ranking tasks: each query gets one positive (same function, kind
// constraint) and pool_size - 1 negatives (other functions, same
// constraint). The search task instead puts every other variant of the
// query's function in the pool and fills it with distractors.
// n_queries <= 0 uses every eligible query variant.
PairTask BuildPairTask(const Corpus& corpus, TaskKind kind, int n_queries,
                       int pool_size, std::uint64_t seed);

struct TaskScores {
  std::vector<Ranking> rankings;
  std::vector<double> pair_scores;  // positives then negatives
  std::vector<int> pair_labels;
};

// Scores a task against precomputed embeddings (one row per corpus variant).
TaskScores ScoreTask(const PairTask& task, const Corpus& corpus,
                     const Matrix& embeddings);

inline const std::vector<std::string> kAllMetrics = {"auc", "mrr10", "recall1",
                                                     "map"};

// Requested metrics by name over a scored task.
nlohmann::json ComputeMetrics(const TaskScores& scores,
                              const std::vector<std::string>& metrics,
                              bool cap_nrel = false);

}  // namespace graphmoco

#endif  // GRAPHMOCO_EVAL_HPP
