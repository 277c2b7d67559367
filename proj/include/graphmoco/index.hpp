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

#ifndef GRAPHMOCO_INDEX_HPP
#define GRAPHMOCO_INDEX_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "graphmoco/corpus.hpp"
#include "graphmoco/eval.hpp"
#include "graphmoco/tensor.hpp"
#include "graphmoco/trainer.hpp"
#include "json.hpp"

namespace graphmoco {

// Query-encoder embeddings of a corpus, searchable by exact cosine scan.
struct EmbeddingIndex {
  Matrix embeddings;  // one unit-norm row per key
  std::vector<std::string> keys;
  std::string fingerprint;  // of the producing checkpoint file

  std::size_t size() const { return keys.size(); }
  // Row of the first key (in index order) belonging to `function_id`.
  std::size_t FindFunction(const std::string& function_id) const;
  std::size_t FindKey(const std::string& key) const;
};

EmbeddingIndex BuildIndex(const Checkpoint& checkpoint,
                          const std::string& fingerprint, const Corpus& corpus);

void SaveIndex(const std::filesystem::path& path, const EmbeddingIndex& index);
EmbeddingIndex LoadIndex(const std::filesystem::path& path);

struct SearchHit {
  std::string key;
  double similarity = 0.0;
};

// Top-k rows by descending cosine, ties by ascending key. k is clamped to
// the index size.
std::vector<SearchHit> QueryIndex(const EmbeddingIndex& index,
                                  const Vector& query, int top_k);

struct EvalRequest {
  TaskKind task = TaskKind::kXm;
  int pool = 100;
  std::vector<std::string> metrics = kAllMetrics;
  int queries = 0;  // 0 uses every eligible query
  std::uint64_t seed = 0;
  bool cap_nrel = false;
};

// Embeds the corpus with the query encoder, ranks every task query and
// returns {task, pool, metrics, config, corpus_fingerprint}.
nlohmann::json RunSearchEval(const Checkpoint& checkpoint, const Corpus& corpus,
                             const EvalRequest& request);

}  // namespace graphmoco

#endif  // GRAPHMOCO_INDEX_HPP
