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

// Independent reference implementations used as test oracles. Each one is
// written the slow, obvious way and shares no code with the library path it
// checks.

#ifndef GRAPHMOCO_TESTS_ORACLES_HPP
#define GRAPHMOCO_TESTS_ORACLES_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "graphmoco/encoder.hpp"
#include "graphmoco/tensor.hpp"

namespace graphmoco::oracle {

// -log(exp(q.k/tau) / (exp(q.k/tau) + sum_j exp(q.c_j/tau))), averaged.
inline double InfoNce(const Matrix& q, const Matrix& k, const Matrix& queue,
                      double tau) {
  long double total = 0.0L;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    long double pos = 0.0L;
    for (Eigen::Index d = 0; d < q.cols(); ++d) pos += (long double)q(i, d) * k(i, d);
    const long double numerator = std::exp(pos / tau);
    long double denominator = numerator;
    for (Eigen::Index j = 0; j < queue.rows(); ++j) {
      long double dot = 0.0L;
      for (Eigen::Index d = 0; d < q.cols(); ++d) dot += (long double)q(i, d) * queue(j, d);
      denominator += std::exp(dot / tau);
    }
    total += -std::log(numerator / denominator);
  }
  return static_cast<double>(total / q.rows());
}

// Fraction of (positive, negative) pairs ordered correctly, ties as half.
inline double Auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      pairs += 1.0;
      if (scores[i] > scores[j]) good += 1.0;
      if (scores[i] == scores[j]) good += 0.5;
    }
  }
  return good / pairs;
}

// One query as raw candidates, before ranking.
struct Candidates {
  std::vector<double> scores;
  std::vector<std::string> keys;
  std::vector<bool> relevant;
};

// 1-based rank of candidate i: how many others beat it, plus one.
inline int RankOf(const Candidates& c, std::size_t i) {
  int rank = 1;
  for (std::size_t j = 0; j < c.scores.size(); ++j) {
    if (j == i) continue;
    if (c.scores[j] > c.scores[i] ||
        (c.scores[j] == c.scores[i] && c.keys[j] < c.keys[i])) {
      ++rank;
    }
  }
  return rank;
}

inline int FirstRelevantRank(const Candidates& c) {
  int best = 0;
  for (std::size_t i = 0; i < c.scores.size(); ++i) {
    if (!c.relevant[i]) continue;
    const int r = RankOf(c, i);
    if (best == 0 || r < best) best = r;
  }
  return best;  // 0 when nothing is relevant
}

inline double Mrr(const std::vector<Candidates>& queries, int k) {
  double sum = 0.0;
  for (const Candidates& c : queries) {
    const int r = FirstRelevantRank(c);
    if (r >= 1 && r <= k) sum += 1.0 / r;
  }
  return sum / static_cast<double>(queries.size());
}

inline double Recall1(const std::vector<Candidates>& queries) {
  double hits = 0.0;
  for (const Candidates& c : queries) hits += FirstRelevantRank(c) == 1 ? 1.0 : 0.0;
  return hits / static_cast<double>(queries.size());
}

// P(k) rel(k) summed over k <= n, divided by n_rel.
inline double Ap(const Candidates& c, int n, int n_rel) {
  double sum = 0.0;
  for (int k = 1; k <= n; ++k) {
    int hits = 0;
    bool rel_k = false;
    for (std::size_t i = 0; i < c.scores.size(); ++i) {
      const int r = RankOf(c, i);
      if (r <= k && c.relevant[i]) ++hits;
      if (r == k && c.relevant[i]) rel_k = true;
    }
    if (rel_k) sum += static_cast<double>(hits) / k;
  }
  return sum / n_rel;
}

inline double Map(const std::vector<Candidates>& queries, int n) {
  double sum = 0.0;
  for (const Candidates& c : queries) {
    const int n_rel = static_cast<int>(std::count(c.relevant.begin(), c.relevant.end(), true));
    sum += Ap(c, n, n_rel);
  }
  return sum / static_cast<double>(queries.size());
}

// Relative error between two gradient vectors, |a - n| / max(|a|, |n|).
// Both below `floor` counts as agreement.
inline double RelativeError(const std::vector<double>& analytic,
                            const std::vector<double>& numeric,
                            double floor = 1e-10) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  const double scale = std::max(std::sqrt(na), std::sqrt(nn));
  if (scale < floor) return 0.0;
  return std::sqrt(diff) / scale;
}

// Central differences of `objective` over every unfrozen entry of every
// parameter array, compared per array with `analytic` (same layout).
// Returns the worst array's relative error and names it in `worst`.
template <typename Objective>
double GradientCheck(EncoderParams& params, EncoderParams& analytic,
                     Objective objective, double eps, std::string* worst) {
  const std::vector<ParamRef> values = ParamRefs(params);
  const std::vector<ParamRef> grads = ParamRefs(analytic);
  double max_error = 0.0;
  for (std::size_t a = 0; a < values.size(); ++a) {
    std::vector<double> numeric, expected;
    for (std::size_t j = values[a].frozen; j < values[a].values.size(); ++j) {
      double& x = values[a].values[j];
      const double saved = x;
      x = saved + eps;
      const double up = objective();
      x = saved - eps;
      const double down = objective();
      x = saved;
      numeric.push_back((up - down) / (2.0 * eps));
      expected.push_back(grads[a].values[j]);
    }
    const double err = RelativeError(expected, numeric);
    if (err >= max_error) {
      max_error = err;
      if (worst) *worst = values[a].name;
    }
  }
  return max_error;
}

}  // namespace graphmoco::oracle

#endif  // GRAPHMOCO_TESTS_ORACLES_HPP
