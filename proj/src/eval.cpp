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

#include "graphmoco/eval.hpp"

#include <algorithm>
#include <numeric>

#include "graphmoco/error.hpp"

namespace graphmoco {
namespace {

void CheckRankings(std::span<const Ranking> rankings) {
  if (rankings.empty()) {
    Fail(ErrorCode::kUndefinedMetric, "ranking metric over zero queries");
  }
}

// Axis a kind needs to vary for positive pairs to exist.
const char* KindAxis(TaskKind kind) {
  switch (kind) {
    case TaskKind::kArch:
    case TaskKind::kXa:
      return "arch";
    case TaskKind::kOpt:
      return "opt_level";
    case TaskKind::kComp:
    case TaskKind::kXc:
    case TaskKind::kXcXb:
      return "compiler";
    case TaskKind::kXm:
    case TaskKind::kSearch:
      return "variants per function";
  }
  return "unknown";
}

// Draws `count` distinct elements of `pool` (partial Fisher-Yates).
std::vector<std::size_t> SampleWithout(std::vector<std::size_t> pool,
                                       std::size_t count, Rng& rng) {
  for (std::size_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  return pool;
}

}  // namespace

double CosineSim(const Vector& a, const Vector& b) {
  Require(a.size() == b.size(), "cosine of vectors with different widths");
  const double na = a.norm();
  const double nb = b.norm();
  Require(na > 0.0 && nb > 0.0, "cosine similarity of a zero vector");
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

double AucRoc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    Fail(ErrorCode::kShapeMismatch, "scores and labels differ in length");
  }
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (labels[i] != 0 ? pos : neg).push_back(scores[i]);
  }
  if (pos.empty() || neg.empty()) {
    Fail(ErrorCode::kUndefinedMetric, "AUC needs both positive and negative labels");
  }
  // Count wins and ties by merging the two sorted lists.
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  double wins = 0.0;
  std::size_t below = 0;
  std::size_t upto = 0;
  for (double p : pos) {
    while (below < neg.size() && neg[below] < p) ++below;
    upto = std::max(upto, below);
    while (upto < neg.size() && neg[upto] <= p) ++upto;
    wins += static_cast<double>(below) + 0.5 * static_cast<double>(upto - below);
  }
  return wins / (static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

std::vector<int> ThresholdClassify(std::span<const double> scores,
                                   double threshold) {
  std::vector<int> out;
  out.reserve(scores.size());
  for (double s : scores) out.push_back(s >= threshold ? 1 : 0);
  return out;
}

int Ranking::num_relevant() const {
  return static_cast<int>(std::count(relevant.begin(), relevant.end(), true));
}

Ranking RankCandidates(std::span<const double> scores,
                       std::span<const std::string> keys,
                       const std::vector<bool>& relevant) {
  if (scores.size() != keys.size() || keys.size() != relevant.size()) {
    Fail(ErrorCode::kShapeMismatch, "ranking inputs differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return keys[a] < keys[b];
  });
  Ranking r;
  for (std::size_t i : order) {
    r.keys.push_back(keys[i]);
    r.scores.push_back(scores[i]);
    r.relevant.push_back(relevant[i]);
  }
  return r;
}

double MrrAtK(std::span<const Ranking> rankings, int k) {
  Require(k >= 1, "MRR cutoff must be at least 1");
  CheckRankings(rankings);
  double total = 0.0;
  for (const Ranking& r : rankings) {
    const int limit = std::min<int>(k, static_cast<int>(r.relevant.size()));
    for (int i = 0; i < limit; ++i) {
      if (r.relevant[static_cast<std::size_t>(i)]) {
        total += 1.0 / (i + 1);
        break;
      }
    }
  }
  return total / static_cast<double>(rankings.size());
}

double RecallAt1(std::span<const Ranking> rankings) {
  CheckRankings(rankings);
  double hits = 0.0;
  for (const Ranking& r : rankings) {
    if (!r.relevant.empty() && r.relevant[0]) hits += 1.0;
  }
  return hits / static_cast<double>(rankings.size());
}

double AveragePrecision(const Ranking& ranking, int n, int n_rel) {
  Require(n >= 1, "AP cutoff must be at least 1");
  if (n_rel <= 0) {
    Fail(ErrorCode::kUndefinedMetric, "AP with no relevant items");
  }
  const int limit = std::min<int>(n, static_cast<int>(ranking.relevant.size()));
  double sum = 0.0;
  int hits = 0;
  for (int k = 0; k < limit; ++k) {
    if (ranking.relevant[static_cast<std::size_t>(k)]) {
      ++hits;
      sum += static_cast<double>(hits) / (k + 1);
    }
  }
  return sum / n_rel;
}

double MeanAp(std::span<const Ranking> rankings, int n, bool cap_nrel) {
  CheckRankings(rankings);
  double total = 0.0;
  for (const Ranking& r : rankings) {
    const int n_rel = cap_nrel ? std::min(n, r.num_relevant()) : r.num_relevant();
    total += AveragePrecision(r, n, n_rel);
  }
  return total / static_cast<double>(rankings.size());
}

std::string ToString(TaskKind kind) {
  switch (kind) {
    case TaskKind::kArch: return "arch";
    case TaskKind::kOpt: return "opt";
    case TaskKind::kComp: return "comp";
    case TaskKind::kXc: return "xc";
    case TaskKind::kXcXb: return "xcxb";
    case TaskKind::kXa: return "xa";
    case TaskKind::kXm: return "xm";
    case TaskKind::kSearch: return "search";
  }
  return "unknown";
}

TaskKind ParseTaskKind(const std::string& text) {
  for (TaskKind k : {TaskKind::kArch, TaskKind::kOpt, TaskKind::kComp,
                     TaskKind::kXc, TaskKind::kXcXb, TaskKind::kXa,
                     TaskKind::kXm, TaskKind::kSearch}) {
    if (ToString(k) == text) return k;
  }
  Fail(ErrorCode::kParse, "unknown task '" + text + "'");
}

bool SatisfiesKind(TaskKind kind, const VariantKey& a, const VariantKey& b) {
  const bool same_arch = a.arch == b.arch;
  const bool same_bits = a.bitness == b.bitness;
  const bool same_comp = a.compiler == b.compiler;
  const bool same_ver = same_comp && a.compiler_version == b.compiler_version;
  const bool same_opt = a.opt_level == b.opt_level;
  switch (kind) {
    case TaskKind::kArch:
      return !same_arch;
    case TaskKind::kOpt:
      return !same_opt && same_ver && same_arch && same_bits;
    case TaskKind::kComp:
      return !same_comp;
    case TaskKind::kXc:
      return !same_comp && same_arch && same_bits;
    case TaskKind::kXcXb:
      return !same_comp && same_arch;
    case TaskKind::kXa:
      return !same_arch && same_ver && same_opt;
    case TaskKind::kXm:
    case TaskKind::kSearch:
      return true;
  }
  return false;
}

PairTask BuildPairTask(const Corpus& corpus, TaskKind kind, int n_queries,
                       int pool_size, std::uint64_t seed) {
  Require(pool_size >= 2, "pool must hold at least two candidates");
  const auto& variants = corpus.variants();
  Rng rng(seed);
  PairTask task;
  task.kind = kind;
  task.pool_size = pool_size;

  // Every variant with at least one admissible positive is a query candidate.
  std::vector<std::size_t> eligible;
  for (std::size_t q = 0; q < variants.size(); ++q) {
    for (std::size_t p : corpus.Group(variants[q].function_id())) {
      if (p != q && SatisfiesKind(kind, variants[q].meta, variants[p].meta)) {
        eligible.push_back(q);
        break;
      }
    }
  }
  if (eligible.empty()) {
    Fail(ErrorCode::kInfeasibleTask, "task " + ToString(kind) +
                                         " has no positive pairs: corpus lacks variation in " +
                                         KindAxis(kind));
  }
  eligible = SampleWithout(eligible, eligible.size(), rng);

  std::size_t short_pool = 0;
  for (std::size_t q : eligible) {
    if (n_queries > 0 && static_cast<int>(task.queries.size()) >= n_queries) break;
    const VariantKey& qk = variants[q].meta;
    std::vector<std::size_t> same, other;
    for (std::size_t c = 0; c < variants.size(); ++c) {
      if (c == q || !SatisfiesKind(kind, qk, variants[c].meta)) continue;
      (variants[c].function_id() == qk.function_id ? same : other).push_back(c);
    }
    PairTask::Query query;
    query.query = q;
    if (kind == TaskKind::kSearch) {
      if (same.size() + 1 > static_cast<std::size_t>(pool_size) ||
          other.size() < static_cast<std::size_t>(pool_size) - same.size()) {
        ++short_pool;
        continue;
      }
      const auto distractors = SampleWithout(other, pool_size - same.size(), rng);
      query.candidates = same;
      query.relevant.assign(same.size(), true);
      query.candidates.insert(query.candidates.end(), distractors.begin(),
                              distractors.end());
      query.relevant.resize(query.candidates.size(), false);
      task.positives.emplace_back(q, same.front());
      task.negatives.emplace_back(q, distractors.front());
    } else {
      if (other.size() < static_cast<std::size_t>(pool_size) - 1) {
        ++short_pool;
        continue;
      }
      std::uniform_int_distribution<std::size_t> pick(0, same.size() - 1);
      const std::size_t positive = same[pick(rng)];
      const auto negatives = SampleWithout(other, pool_size - 1, rng);
      query.candidates.push_back(positive);
      query.candidates.insert(query.candidates.end(), negatives.begin(),
                              negatives.end());
      query.relevant.assign(query.candidates.size(), false);
      query.relevant[0] = true;
      task.positives.emplace_back(q, positive);
      task.negatives.emplace_back(q, negatives.front());
    }
    task.queries.push_back(std::move(query));
  }
  if (task.queries.empty()) {
    Fail(ErrorCode::kInfeasibleTask,
         "task " + ToString(kind) + ": no query has enough candidates for a pool of " +
             std::to_string(pool_size) + " (" + std::to_string(short_pool) +
             " queries short of negatives)");
  }
  return task;
}

TaskScores ScoreTask(const PairTask& task, const Corpus& corpus,
                     const Matrix& embeddings) {
  if (embeddings.rows() != static_cast<Eigen::Index>(corpus.size())) {
    Fail(ErrorCode::kShapeMismatch, "one embedding row per corpus variant expected");
  }
  auto sim = [&](std::size_t a, std::size_t b) {
    return CosineSim(embeddings.row(static_cast<Eigen::Index>(a)).transpose(),
                     embeddings.row(static_cast<Eigen::Index>(b)).transpose());
  };
  TaskScores out;
  for (const auto& q : task.queries) {
    std::vector<double> scores;
    std::vector<std::string> keys;
    for (std::size_t c : q.candidates) {
      scores.push_back(sim(q.query, c));
      keys.push_back(corpus.variants()[c].key());
    }
    out.rankings.push_back(RankCandidates(scores, keys, q.relevant));
  }
  for (const auto& [a, b] : task.positives) {
    out.pair_scores.push_back(sim(a, b));
    out.pair_labels.push_back(1);
  }
  for (const auto& [a, b] : task.negatives) {
    out.pair_scores.push_back(sim(a, b));
    out.pair_labels.push_back(0);
  }
  return out;
}

nlohmann::json ComputeMetrics(const TaskScores& scores,
                              const std::vector<std::string>& metrics,
                              bool cap_nrel) {
  nlohmann::json out = nlohmann::json::object();
  for (const std::string& m : metrics) {
    if (m == "auc") {
      out[m] = AucRoc(scores.pair_scores, scores.pair_labels);
    } else if (m == "mrr10") {
      out[m] = MrrAtK(scores.rankings, 10);
    } else if (m == "recall1") {
      out[m] = RecallAt1(scores.rankings);
    } else if (m == "map") {
      out[m] = MeanAp(scores.rankings, 10, cap_nrel);
    } else {
      Fail(ErrorCode::kParse, "unknown metric '" + m + "'");
    }
  }
  return out;
}

}  // namespace graphmoco
