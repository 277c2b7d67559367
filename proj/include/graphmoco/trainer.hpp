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

#ifndef GRAPHMOCO_TRAINER_HPP
#define GRAPHMOCO_TRAINER_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "graphmoco/corpus.hpp"
#include "graphmoco/encoder.hpp"
#include "graphmoco/normalizer.hpp"
#include "json.hpp"

namespace graphmoco {

enum class LossKind { kInfoNce, kTriplet };

std::string ToString(LossKind kind);
LossKind ParseLossKind(const std::string& text);

struct TrainConfig {
  double temperature = 0.07;
  double momentum = 0.999;
  int queue_size = 5120;
  int batch_size = 128;
  double learning_rate = 0.01;
  double weight_decay = 1e-4;
  int epochs = 100;
  std::uint64_t seed = 0;
  bool preshuffle = true;
  LossKind loss = LossKind::kInfoNce;
  double triplet_margin = 0.5;
  double clip_norm = 5.0;
  // Scale each array's step by its initialisation scale 1/sqrt(fan_in).
  bool fan_in_lr = true;
  // Drop queue entries whose function matches the query from its negatives.
  bool mask_same_function = false;
  // Lets single-variant functions form (A, A) pairs.
  bool allow_self_pairs = false;
  // Keep one representative of functions whose variants are all identical
  // to another function's.
  bool dedup_functions = false;
  // Pool size for the per-epoch validation Recall@1.
  int val_pool = 100;
  EncoderConfig encoder;
  // Test-only cross-sample layer; never set by the command line.
  BatchCoupling coupling;

  // Throws kPrecondition on out-of-range values.
  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& doc);
};

// Query and key encoders of identical shape.
struct EncoderPair {
  EncoderParams query;
  EncoderParams key;
};

// The key encoder starts as an exact copy of the query encoder.
EncoderPair MakeEncoderPair(const EncoderParams& init);

// Fixed-capacity FIFO of unit-norm key embeddings. Rows are overwritten in
// place; `head` marks the oldest row.
struct EmbeddingQueue {
  Matrix buffer;                           // K x D
  int head = 0;
  std::vector<std::string> function_ids;  // source function per row

  int capacity() const { return static_cast<int>(buffer.rows()); }
  // Rows from oldest to newest.
  Matrix Ordered() const;
  // Replaces the N oldest rows by `keys`. N must not exceed K.
  void EnqueueDequeue(const Matrix& keys,
                      std::span<const std::string> ids = {});
};

// Tokenized form of every variant in a corpus, index-aligned with
// corpus.variants().
struct TokenizedCorpus {
  const Corpus* corpus = nullptr;
  std::vector<EncodedFunction> functions;

  std::size_t IndexOf(const FunctionVariant* variant) const;
};

TokenizedCorpus Tokenize(const Corpus& corpus, const Vocab& vocab,
                         const NormalizerOptions& options = {});

// Fills a K-row queue with key encodings of K corpus variants, distinct when
// the corpus has at least K of them and drawn with replacement otherwise.
EmbeddingQueue InitQueue(const TokenizedCorpus& data,
                         const EncoderParams& key_encoder, int capacity,
                         std::uint64_t seed, const BatchCoupling& coupling = {});

// Uniform random permutation pi with shuffled[i] = batch[pi[i]].
std::vector<int> RandomPermutation(int n, Rng& rng);

template <typename T>
std::pair<std::vector<T>, std::vector<int>> Preshuffle(
    const std::vector<T>& batch, Rng& rng) {
  std::vector<int> perm = RandomPermutation(static_cast<int>(batch.size()), rng);
  std::vector<T> shuffled;
  shuffled.reserve(batch.size());
  for (int p : perm) shuffled.push_back(batch[static_cast<std::size_t>(p)]);
  return {std::move(shuffled), std::move(perm)};
}

// Inverts Preshuffle on encoded rows: out[pi[i]] = rows[i].
Matrix Unshuffle(const Matrix& rows, std::span<const int> perm);

// Mean over rows of -log softmax([q.k, q.queue_1, ..., q.queue_K] / tau)[0].
// `negative_mask` (N x K, 1 keeps, 0 drops) is optional. When `grad_q` is
// non-null it receives d(loss)/dq; keys and queue are constants.
double InfoNceLoss(const Matrix& q, const Matrix& k, const Matrix& queue,
                   double tau, Matrix* grad_q = nullptr,
                   const Matrix* negative_mask = nullptr);

// Mean over rows of (1/K') sum_j max(0, margin - q.k + q.queue_j) over the
// K' unmasked queue rows.
double TripletLoss(const Matrix& q, const Matrix& k, const Matrix& queue,
                   double margin, Matrix* grad_q = nullptr,
                   const Matrix* negative_mask = nullptr);

// theta_k <- m theta_k + (1 - m) theta_q for every array.
void MomentumUpdate(EncoderParams& key, const EncoderParams& query,
                    double momentum);
void MomentumUpdate(std::span<const ParamRef> key,
                    std::span<const ParamRef> query, double momentum);

// Adam with coupled L2 weight decay. Gradients are first clipped to a global
// norm; frozen leading elements of each array are left untouched. With
// fan_in_lr each array's step is multiplied by its ParamRef::scale.
class Adam {
 public:
  Adam(double learning_rate, double weight_decay, double clip_norm,
       bool fan_in_lr = false, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8);

  // Returns the gradient norm before clipping.
  double Step(std::span<const ParamRef> params, std::span<const ParamRef> grads);
  long steps() const { return steps_; }

 private:
  double lr_, wd_, clip_;
  bool fan_in_lr_;
  double beta1_, beta2_, eps_;
  long steps_ = 0;
  std::vector<Vector> m_, v_;
};

struct StepResult {
  double loss = 0.0;
  double grad_norm = 0.0;
  double positive_sim = 0.0;  // mean q.k over the batch
  double negative_sim = 0.0;  // mean q.queue over the batch and queue
};

// One iteration over a batch of function ids: sample positive pairs, encode
// queries and (optionally preshuffled) keys, take a gradient step on the
// query encoder, momentum-update the key encoder and enqueue the keys.
class Trainer {
 public:
  Trainer(const TrainConfig& config, const TokenizedCorpus& data,
          EncoderPair pair, EmbeddingQueue queue);

  StepResult Step(std::span<const std::string> function_ids, Rng& rng);

  const EncoderPair& pair() const { return pair_; }
  const EmbeddingQueue& queue() const { return queue_; }
  EncoderPair& mutable_pair() { return pair_; }

 private:
  TrainConfig config_;
  const TokenizedCorpus& data_;
  EncoderPair pair_;
  EmbeddingQueue queue_;
  EncoderParams grad_;
  Adam adam_;
};

struct Checkpoint {
  TrainConfig config;
  Vocab vocab;
  EncoderPair pair;
  EmbeddingQueue queue;
  int epoch = 0;
};

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
// `fingerprint` receives the hash of the file bytes when non-null.
Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          std::string* fingerprint = nullptr);

struct EpochLog {
  int epoch = 0;
  double mean_loss = 0.0;
  std::optional<double> val_recall1;
  double seconds = 0.0;
};

struct TrainResult {
  Checkpoint checkpoint;
  std::vector<EpochLog> log;
};

struct TrainOptions {
  // Checkpoint and loss log are written here after every epoch when set.
  std::optional<std::filesystem::path> out_dir;
  const Corpus* validation = nullptr;
  std::function<void(const EpochLog&)> on_epoch;
};

// Runs config.epochs passes. A pass lists each trainable function once per
// variant, shuffles the list and consumes it in batches of
// config.batch_size, drawing a fresh positive pair per entry; a trailing
// partial batch is dropped so whole batches cycle through the queue.
TrainResult Train(const Corpus& corpus, const TrainConfig& config,
                  const TrainOptions& options = {});

}  // namespace graphmoco

#endif  // GRAPHMOCO_TRAINER_HPP
