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

#include "graphmoco/index.hpp"

#include <algorithm>
#include <numeric>

#include "graphmoco/container.hpp"
#include "graphmoco/encoder.hpp"
#include "graphmoco/error.hpp"

namespace graphmoco {

std::size_t EmbeddingIndex::FindFunction(const std::string& function_id) const {
  // Keys read "fid|arch-bits|compiler-version|opt"; the id may itself hold '|'.
  const std::string prefix = function_id + "|";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const std::string& k = keys[i];
    if (k.starts_with(prefix) &&
        std::count(k.begin() + static_cast<std::ptrdiff_t>(prefix.size()), k.end(), '|') == 2) {
      return i;
    }
  }
  Fail(ErrorCode::kLookup, "function '" + function_id + "' is not in the index");
}

std::size_t EmbeddingIndex::FindKey(const std::string& key) const {
  const auto it = std::find(keys.begin(), keys.end(), key);
  if (it == keys.end()) Fail(ErrorCode::kLookup, "key '" + key + "' is not in the index");
  return static_cast<std::size_t>(it - keys.begin());
}

EmbeddingIndex BuildIndex(const Checkpoint& checkpoint,
                          const std::string& fingerprint, const Corpus& corpus) {
  EmbeddingIndex index;
  index.fingerprint = fingerprint;
  const int dims = checkpoint.pair.query.graph.options.output_dim;
  if (corpus.empty()) {
    index.embeddings.resize(0, dims);
    return index;
  }
  index.embeddings = EncodeCorpus(corpus, checkpoint.vocab, checkpoint.pair.query);
  for (const auto& v : corpus.variants()) index.keys.push_back(v.key());
  return index;
}

void SaveIndex(const std::filesystem::path& path, const EmbeddingIndex& index) {
  Container c;
  c.kind = "index";
  const Matrix& e = index.embeddings;
  c.meta = {{"keys", index.keys},
            {"fingerprint", index.fingerprint},
            {"dims", e.cols()}};
  c.arrays.push_back(NamedArray{"embeddings",
                                {static_cast<long>(e.rows()), static_cast<long>(e.cols())},
                                false,
                                {e.data(), e.data() + e.size()}});
  WriteContainer(path, c);
}

EmbeddingIndex LoadIndex(const std::filesystem::path& path) {
  const Container c = ReadContainer(path);
  if (c.kind != "index") {
    Fail(ErrorCode::kFormat, path.string() + " is a " + c.kind + ", not an index");
  }
  EmbeddingIndex index;
  try {
    index.keys = c.meta.at("keys").get<std::vector<std::string>>();
    index.fingerprint = c.meta.at("fingerprint").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, path.string() + ": bad index metadata: " + e.what());
  }
  const NamedArray& a = c.Get("embeddings");
  if (a.shape.size() != 2 || a.shape[0] != static_cast<long>(index.keys.size())) {
    Fail(ErrorCode::kFormat, path.string() + ": embedding rows do not match keys");
  }
  index.embeddings = Eigen::Map<const Matrix>(a.data.data(), a.shape[0], a.shape[1]);
  return index;
}

std::vector<SearchHit> QueryIndex(const EmbeddingIndex& index,
                                  const Vector& query, int top_k) {
  Require(top_k >= 1, "top_k must be at least 1");
  if (index.size() == 0) Fail(ErrorCode::kIndex, "cannot search an empty index");
  if (query.size() != index.embeddings.cols()) {
    Fail(ErrorCode::kShapeMismatch, "query width differs from the index");
  }
  const double qn = query.norm();
  Require(qn > 0.0, "query embedding is zero");
  const Vector sims = index.embeddings * query / qn;
  std::vector<std::size_t> order(index.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(top_k), order.size());
  auto before = [&](std::size_t a, std::size_t b) {
    const double sa = sims[static_cast<Eigen::Index>(a)];
    const double sb = sims[static_cast<Eigen::Index>(b)];
    if (sa != sb) return sa > sb;
    return index.keys[a] < index.keys[b];
  };
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k),
                    order.end(), before);
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < k; ++i) {
    hits.push_back({index.keys[order[i]], sims[static_cast<Eigen::Index>(order[i])]});
  }
  return hits;
}

nlohmann::json RunSearchEval(const Checkpoint& checkpoint, const Corpus& corpus,
                             const EvalRequest& request) {
  Require(!corpus.empty(), "evaluation corpus is empty");
  const PairTask task =
      BuildPairTask(corpus, request.task, request.queries, request.pool, request.seed);
  const Matrix emb = EncodeCorpus(corpus, checkpoint.vocab, checkpoint.pair.query);
  const TaskScores scores = ScoreTask(task, corpus, emb);
  nlohmann::json report;
  report["task"] = ToString(request.task);
  report["pool"] = request.pool;
  report["metrics"] = ComputeMetrics(scores, request.metrics, request.cap_nrel);
  report["config"] = {{"train", checkpoint.config.ToJson()},
                      {"epoch", checkpoint.epoch},
                      {"queries", task.queries.size()},
                      {"seed", request.seed},
                      {"cap_nrel", request.cap_nrel}};
  report["corpus_fingerprint"] = Fingerprint(SerializeCorpus(corpus));
  return report;
}

}  // namespace graphmoco
