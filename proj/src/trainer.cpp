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

#include "graphmoco/trainer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>

#include "graphmoco/container.hpp"
#include "graphmoco/error.hpp"
#include "graphmoco/eval.hpp"

namespace graphmoco {
namespace {

void RequireFinite(const Matrix& m, const char* what) {
  if (!m.allFinite()) {
    Fail(ErrorCode::kNumeric, std::string(what) + " contains non-finite values");
  }
}

// Logit row i: [q_i . k_i, q_i . queue_j ...] with masked entries removed.
void CheckLossInputs(const Matrix& q, const Matrix& k, const Matrix& queue,
                     const Matrix* mask) {
  Require(q.rows() >= 1, "loss needs at least one query");
  if (q.rows() != k.rows() || q.cols() != k.cols() ||
      queue.cols() != q.cols()) {
    Fail(ErrorCode::kShapeMismatch, "query, key and queue widths differ");
  }
  if (mask && (mask->rows() != q.rows() || mask->cols() != queue.rows())) {
    Fail(ErrorCode::kShapeMismatch, "negative mask must be N x K");
  }
  RequireFinite(q, "query embeddings");
  RequireFinite(k, "key embeddings");
  RequireFinite(queue, "queue");
}

std::size_t TotalSize(const EncoderParams& p) {
  std::size_t n = 0;
  for (const ParamRef& r : ParamRefs(const_cast<EncoderParams&>(p))) {
    n += r.values.size();
  }
  return n;
}

}  // namespace

std::string ToString(LossKind kind) {
  return kind == LossKind::kInfoNce ? "infonce" : "triplet";
}

LossKind ParseLossKind(const std::string& text) {
  if (text == "infonce") return LossKind::kInfoNce;
  if (text == "triplet") return LossKind::kTriplet;
  Fail(ErrorCode::kParse, "unknown loss '" + text + "'");
}

void TrainConfig::Validate() const {
  Require(temperature > 0.0, "temperature must be positive");
  Require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  Require(batch_size >= 1, "batch size must be positive");
  Require(queue_size >= batch_size && queue_size % batch_size == 0,
          "queue size must be a positive multiple of the batch size");
  Require(learning_rate > 0.0, "learning rate must be positive");
  Require(weight_decay >= 0.0, "weight decay must be non-negative");
  Require(epochs >= 0, "epochs must be non-negative");
  Require(clip_norm > 0.0, "clip norm must be positive");
  Require(val_pool >= 2, "validation pool must hold at least two candidates");
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"temperature", temperature},
          {"momentum", momentum},
          {"queue_size", queue_size},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"weight_decay", weight_decay},
          {"epochs", epochs},
          {"seed", seed},
          {"preshuffle", preshuffle},
          {"loss", ToString(loss)},
          {"triplet_margin", triplet_margin},
          {"clip_norm", clip_norm},
          {"fan_in_lr", fan_in_lr},
          {"mask_same_function", mask_same_function},
          {"allow_self_pairs", allow_self_pairs},
          {"dedup_functions", dedup_functions},
          {"val_pool", val_pool},
          {"encoder", encoder.ToJson()}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& doc) {
  TrainConfig c;
  try {
    c.temperature = doc.value("temperature", c.temperature);
    c.momentum = doc.value("momentum", c.momentum);
    c.queue_size = doc.value("queue_size", c.queue_size);
    c.batch_size = doc.value("batch_size", c.batch_size);
    c.learning_rate = doc.value("learning_rate", c.learning_rate);
    c.weight_decay = doc.value("weight_decay", c.weight_decay);
    c.epochs = doc.value("epochs", c.epochs);
    c.seed = doc.value("seed", c.seed);
    c.preshuffle = doc.value("preshuffle", c.preshuffle);
    c.loss = ParseLossKind(doc.value("loss", ToString(c.loss)));
    c.triplet_margin = doc.value("triplet_margin", c.triplet_margin);
    c.clip_norm = doc.value("clip_norm", c.clip_norm);
    c.fan_in_lr = doc.value("fan_in_lr", c.fan_in_lr);
    c.mask_same_function = doc.value("mask_same_function", c.mask_same_function);
    c.allow_self_pairs = doc.value("allow_self_pairs", c.allow_self_pairs);
    c.dedup_functions = doc.value("dedup_functions", c.dedup_functions);
    c.val_pool = doc.value("val_pool", c.val_pool);
    if (doc.contains("encoder")) c.encoder = EncoderConfig::FromJson(doc["encoder"]);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, std::string("bad training config: ") + e.what());
  }
  return c;
}

EncoderPair MakeEncoderPair(const EncoderParams& init) {
  return EncoderPair{init, init};
}

Matrix EmbeddingQueue::Ordered() const {
  const int k = capacity();
  Matrix out(k, buffer.cols());
  for (int i = 0; i < k; ++i) out.row(i) = buffer.row((head + i) % k);
  return out;
}

void EmbeddingQueue::EnqueueDequeue(const Matrix& keys,
                                    std::span<const std::string> ids) {
  const int k = capacity();
  const int n = static_cast<int>(keys.rows());
  Require(n <= k, "cannot enqueue more rows than the queue holds");
  if (keys.cols() != buffer.cols()) {
    Fail(ErrorCode::kShapeMismatch, "enqueued rows have the wrong width");
  }
  Require(ids.empty() || static_cast<int>(ids.size()) == n,
          "one function id per enqueued row");
  if (function_ids.size() != static_cast<std::size_t>(k)) {
    function_ids.assign(static_cast<std::size_t>(k), std::string());
  }
  for (int i = 0; i < n; ++i) {
    const int slot = (head + i) % k;
    buffer.row(slot) = keys.row(i);
    function_ids[static_cast<std::size_t>(slot)] =
        ids.empty() ? std::string() : ids[static_cast<std::size_t>(i)];
  }
  head = (head + n) % k;
}

std::size_t TokenizedCorpus::IndexOf(const FunctionVariant* variant) const {
  const auto* base = corpus->variants().data();
  Require(variant >= base && variant < base + corpus->size(),
          "variant does not belong to this corpus");
  return static_cast<std::size_t>(variant - base);
}

TokenizedCorpus Tokenize(const Corpus& corpus, const Vocab& vocab,
                         const NormalizerOptions& options) {
  TokenizedCorpus t;
  t.corpus = &corpus;
  t.functions.reserve(corpus.size());
  for (const auto& v : corpus.variants()) {
    t.functions.push_back(TokenizeVariant(v, vocab, options));
  }
  return t;
}

EmbeddingQueue InitQueue(const TokenizedCorpus& data,
                         const EncoderParams& key_encoder, int capacity,
                         std::uint64_t seed, const BatchCoupling& coupling) {
  const std::size_t n = data.functions.size();
  if (n == 0) Fail(ErrorCode::kPrecondition, "cannot fill a queue from an empty corpus");
  Require(capacity >= 1, "queue capacity must be positive");
  Rng rng(seed);
  std::vector<std::size_t> picks;
  if (static_cast<std::size_t>(capacity) <= n) {
    std::vector<std::size_t> all(n);
    std::iota(all.begin(), all.end(), std::size_t{0});
    for (int i = 0; i < capacity; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), n - 1);
      std::swap(all[static_cast<std::size_t>(i)], all[pick(rng)]);
    }
    picks.assign(all.begin(), all.begin() + capacity);
  } else {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    for (int i = 0; i < capacity; ++i) picks.push_back(pick(rng));
  }
  EmbeddingQueue q;
  q.buffer.resize(capacity, key_encoder.graph.options.output_dim);
  q.function_ids.resize(static_cast<std::size_t>(capacity));
  constexpr int kChunk = 64;
  for (int start = 0; start < capacity; start += kChunk) {
    const int stop = std::min(capacity, start + kChunk);
    std::vector<const EncodedFunction*> fns;
    for (int i = start; i < stop; ++i) {
      const std::size_t idx = picks[static_cast<std::size_t>(i)];
      fns.push_back(&data.functions[idx]);
      q.function_ids[static_cast<std::size_t>(i)] =
          data.corpus->variants()[idx].function_id();
    }
    q.buffer.middleRows(start, stop - start) =
        EncodeFunctions(fns, key_encoder, nullptr, coupling);
  }
  q.head = 0;
  return q;
}

std::vector<int> RandomPermutation(int n, Rng& rng) {
  Require(n >= 0, "permutation length must be non-negative");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  // Fisher-Yates from the back.
  for (int i = n - 1; i > 0; --i) {
    std::uniform_int_distribution<int> pick(0, i);
    std::swap(perm[static_cast<std::size_t>(i)],
              perm[static_cast<std::size_t>(pick(rng))]);
  }
  return perm;
}

Matrix Unshuffle(const Matrix& rows, std::span<const int> perm) {
  if (static_cast<Eigen::Index>(perm.size()) != rows.rows()) {
    Fail(ErrorCode::kShapeMismatch, "permutation length differs from row count");
  }
  Matrix out(rows.rows(), rows.cols());
  std::vector<bool> seen(perm.size(), false);
  for (std::size_t i = 0; i < perm.size(); ++i) {
    const int p = perm[i];
    Require(p >= 0 && p < static_cast<int>(perm.size()) &&
                !seen[static_cast<std::size_t>(p)],
            "not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
    out.row(p) = rows.row(static_cast<Eigen::Index>(i));
  }
  return out;
}

double InfoNceLoss(const Matrix& q, const Matrix& k, const Matrix& queue,
                   double tau, Matrix* grad_q, const Matrix* negative_mask) {
  Require(tau > 0.0, "temperature must be positive");
  CheckLossInputs(q, k, queue, negative_mask);
  const Eigen::Index n = q.rows();
  const Matrix neg = q * queue.transpose() / tau;  // N x K
  if (grad_q) *grad_q = Matrix::Zero(n, q.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pos = q.row(i).dot(k.row(i)) / tau;
    double top = pos;
    for (Eigen::Index j = 0; j < neg.cols(); ++j) {
      if (!negative_mask || (*negative_mask)(i, j) != 0.0) top = std::max(top, neg(i, j));
    }
    double sum = std::exp(pos - top);
    Vector weights = Vector::Zero(neg.cols());
    for (Eigen::Index j = 0; j < neg.cols(); ++j) {
      if (negative_mask && (*negative_mask)(i, j) == 0.0) continue;
      weights[j] = std::exp(neg(i, j) - top);
      sum += weights[j];
    }
    total += std::log(sum) + top - pos;
    if (grad_q) {
      // d/dq of LSE - pos: (sum_j p_j c_j - k) / tau.
      const double p_pos = std::exp(pos - top) / sum;
      grad_q->row(i) = ((p_pos - 1.0) * k.row(i) +
                        (weights / sum).transpose() * queue) /
                       (tau * static_cast<double>(n));
    }
  }
  const double loss = total / static_cast<double>(n);
  if (!std::isfinite(loss)) Fail(ErrorCode::kNumeric, "InfoNCE loss is not finite");
  return loss;
}

double TripletLoss(const Matrix& q, const Matrix& k, const Matrix& queue,
                   double margin, Matrix* grad_q, const Matrix* negative_mask) {
  CheckLossInputs(q, k, queue, negative_mask);
  const Eigen::Index n = q.rows();
  const Matrix neg = q * queue.transpose();
  if (grad_q) *grad_q = Matrix::Zero(n, q.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pos = q.row(i).dot(k.row(i));
    double row_loss = 0.0;
    int kept = 0;
    Vector active = Vector::Zero(neg.cols());
    for (Eigen::Index j = 0; j < neg.cols(); ++j) {
      if (negative_mask && (*negative_mask)(i, j) == 0.0) continue;
      ++kept;
      const double hinge = margin - pos + neg(i, j);
      if (hinge > 0.0) {
        row_loss += hinge;
        active[j] = 1.0;
      }
    }
    if (kept == 0) continue;
    total += row_loss / kept;
    if (grad_q) {
      grad_q->row(i) = (active.transpose() * queue - active.sum() * k.row(i)) /
                       (static_cast<double>(kept) * static_cast<double>(n));
    }
  }
  const double loss = total / static_cast<double>(n);
  if (!std::isfinite(loss)) Fail(ErrorCode::kNumeric, "triplet loss is not finite");
  return loss;
}

void MomentumUpdate(std::span<const ParamRef> key,
                    std::span<const ParamRef> query, double momentum) {
  Require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  if (key.size() != query.size()) {
    Fail(ErrorCode::kShapeMismatch, "encoders have different parameter lists");
  }
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (key[i].shape != query[i].shape || key[i].name != query[i].name) {
      Fail(ErrorCode::kShapeMismatch, "parameter '" + key[i].name + "' differs in shape");
    }
    const double* src = query[i].values.data();
    double* dst = key[i].values.data();
    for (std::size_t j = 0; j < key[i].values.size(); ++j) {
      dst[j] = momentum * dst[j] + (1.0 - momentum) * src[j];
    }
  }
}

void MomentumUpdate(EncoderParams& key, const EncoderParams& query,
                    double momentum) {
  const auto k = ParamRefs(key);
  const auto q = ParamRefs(const_cast<EncoderParams&>(query));
  MomentumUpdate(k, q, momentum);
}

Adam::Adam(double learning_rate, double weight_decay, double clip_norm,
           bool fan_in_lr, double beta1, double beta2, double eps)
    : lr_(learning_rate),
      wd_(weight_decay),
      clip_(clip_norm),
      fan_in_lr_(fan_in_lr),
      beta1_(beta1),
      beta2_(beta2),
      eps_(eps) {}

double Adam::Step(std::span<const ParamRef> params,
                  std::span<const ParamRef> grads) {
  if (params.size() != grads.size()) {
    Fail(ErrorCode::kShapeMismatch, "parameter and gradient lists differ");
  }
  if (m_.empty()) {
    for (const ParamRef& p : params) {
      m_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
      v_.push_back(Vector::Zero(static_cast<Eigen::Index>(p.values.size())));
    }
  }
  double sq = 0.0;
  for (const ParamRef& g : grads) {
    for (std::size_t j = g.frozen; j < g.values.size(); ++j) sq += g.values[j] * g.values[j];
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) Fail(ErrorCode::kNumeric, "gradient is not finite");
  const double scale = norm > clip_ ? clip_ / norm : 1.0;
  ++steps_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const ParamRef& p = params[i];
    const ParamRef& g = grads[i];
    if (p.values.size() != g.values.size()) {
      Fail(ErrorCode::kShapeMismatch, "gradient for '" + p.name + "' has the wrong size");
    }
    Vector& m = m_[i];
    Vector& v = v_[i];
    const double lr = fan_in_lr_ ? lr_ * p.scale : lr_;
    for (std::size_t j = p.frozen; j < p.values.size(); ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      const double grad = scale * g.values[j] + wd_ * p.values[j];
      m[e] = beta1_ * m[e] + (1.0 - beta1_) * grad;
      v[e] = beta2_ * v[e] + (1.0 - beta2_) * grad * grad;
      p.values[j] -= lr * (m[e] / c1) / (std::sqrt(v[e] / c2) + eps_);
    }
  }
  return norm;
}

Trainer::Trainer(const TrainConfig& config, const TokenizedCorpus& data,
                 EncoderPair pair, EmbeddingQueue queue)
    : config_(config),
      data_(data),
      pair_(std::move(pair)),
      queue_(std::move(queue)),
      grad_(ZerosLike(pair_.query)),
      adam_(config.learning_rate, config.weight_decay, config.clip_norm,
            config.fan_in_lr) {
  config_.Validate();
}

StepResult Trainer::Step(std::span<const std::string> function_ids, Rng& rng) {
  Require(!function_ids.empty(), "training batch is empty");
  const Corpus& corpus = *data_.corpus;
  std::vector<const EncodedFunction*> queries;
  std::vector<const EncodedFunction*> keys;
  for (const std::string& fid : function_ids) {
    const auto [a, b] =
        SamplePositivePair(corpus, fid, rng, config_.allow_self_pairs);
    queries.push_back(&data_.functions[data_.IndexOf(a)]);
    keys.push_back(&data_.functions[data_.IndexOf(b)]);
  }

  Matrix k;
  if (config_.preshuffle) {
    auto [shuffled, perm] = Preshuffle(keys, rng);
    k = Unshuffle(EncodeFunctions(shuffled, pair_.key, nullptr, config_.coupling),
                  perm);
  } else {
    k = EncodeFunctions(keys, pair_.key, nullptr, config_.coupling);
  }

  EncoderCache cache;
  const Matrix q = EncodeFunctions(queries, pair_.query, &cache, config_.coupling);

  Matrix mask;
  const Matrix* mask_ptr = nullptr;
  if (config_.mask_same_function) {
    mask = Matrix::Ones(q.rows(), queue_.capacity());
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      for (int j = 0; j < queue_.capacity(); ++j) {
        if (queue_.function_ids[static_cast<std::size_t>(j)] ==
            function_ids[static_cast<std::size_t>(i)]) {
          mask(i, j) = 0.0;
        }
      }
    }
    mask_ptr = &mask;
  }

  Matrix grad_q;
  StepResult result;
  result.loss = config_.loss == LossKind::kInfoNce
                    ? InfoNceLoss(q, k, queue_.buffer, config_.temperature,
                                  &grad_q, mask_ptr)
                    : TripletLoss(q, k, queue_.buffer, config_.triplet_margin,
                                  &grad_q, mask_ptr);

  result.positive_sim = (q.array() * k.array()).sum() / static_cast<double>(q.rows());
  result.negative_sim = (q * queue_.buffer.transpose()).mean();

  for (ParamRef& g : ParamRefs(grad_)) std::fill(g.values.begin(), g.values.end(), 0.0);
  EncodeFunctionsBackward(grad_q, cache, pair_.query, grad_, config_.coupling);
  result.grad_norm = adam_.Step(ParamRefs(pair_.query), ParamRefs(grad_));
  MomentumUpdate(pair_.key, pair_.query, config_.momentum);
  queue_.EnqueueDequeue(k, function_ids);
  return result;
}

void SaveCheckpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  Container c;
  c.kind = "checkpoint";
  c.meta = {{"config", ckpt.config.ToJson()},
            {"vocab", ckpt.vocab.ToJson()},
            {"epoch", ckpt.epoch},
            {"queue_head", ckpt.queue.head},
            {"queue_function_ids", ckpt.queue.function_ids}};
  auto add = [&c](const std::string& prefix, const EncoderParams& params) {
    for (const ParamRef& r : ParamRefs(const_cast<EncoderParams&>(params))) {
      c.arrays.push_back(NamedArray{prefix + r.name, r.shape, r.row_major,
                                    {r.values.begin(), r.values.end()}});
    }
  };
  add("query/", ckpt.pair.query);
  add("key/", ckpt.pair.key);
  const Matrix& qb = ckpt.queue.buffer;
  c.arrays.push_back(NamedArray{"queue/buffer",
                                {static_cast<long>(qb.rows()), static_cast<long>(qb.cols())},
                                false,
                                {qb.data(), qb.data() + qb.size()}});
  WriteContainer(path, c);
}

Checkpoint LoadCheckpoint(const std::filesystem::path& path,
                          std::string* fingerprint) {
  std::string raw;
  const Container c = ReadContainer(path, &raw);
  if (c.kind != "checkpoint") {
    Fail(ErrorCode::kFormat, path.string() + " is a " + c.kind + ", not a checkpoint");
  }
  Checkpoint ckpt;
  try {
    ckpt.config = TrainConfig::FromJson(c.meta.at("config"));
    ckpt.vocab = Vocab::FromJson(c.meta.at("vocab"));
    ckpt.epoch = c.meta.at("epoch").get<int>();
    ckpt.queue.head = c.meta.at("queue_head").get<int>();
    ckpt.queue.function_ids =
        c.meta.at("queue_function_ids").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kFormat, path.string() + ": bad checkpoint metadata: " + e.what());
  }
  const EncoderParams shape = InitEncoder(ckpt.config.encoder, ckpt.vocab.op_size(),
                                          ckpt.vocab.operand_size(), 0);
  auto fill = [&](const std::string& prefix, EncoderParams& params) {
    params = shape;
    for (ParamRef& r : ParamRefs(params)) {
      const NamedArray& a = c.Get(prefix + r.name);
      if (a.shape != r.shape || a.row_major != r.row_major) {
        Fail(ErrorCode::kShapeMismatch,
             path.string() + ": array '" + a.name + "' does not match the encoder config");
      }
      std::copy(a.data.begin(), a.data.end(), r.values.begin());
    }
  };
  fill("query/", ckpt.pair.query);
  fill("key/", ckpt.pair.key);
  const NamedArray& qb = c.Get("queue/buffer");
  if (qb.shape.size() != 2) Fail(ErrorCode::kFormat, "queue buffer must be 2-D");
  ckpt.queue.buffer = Eigen::Map<const Matrix>(qb.data.data(), qb.shape[0], qb.shape[1]);
  if (ckpt.queue.function_ids.size() != static_cast<std::size_t>(qb.shape[0])) {
    Fail(ErrorCode::kFormat, "queue labels do not match queue rows");
  }
  if (fingerprint) *fingerprint = Fingerprint(raw);
  return ckpt;
}

TrainResult Train(const Corpus& input, const TrainConfig& config,
                  const TrainOptions& options) {
  config.Validate();
  const Corpus corpus =
      config.dedup_functions ? DropDuplicateFunctions(input) : input;
  Require(!corpus.empty(), "training corpus is empty");

  // One slot per variant of every trainable function, so an epoch draws as
  // many pairs as there are variants.
  std::vector<std::string> trainable;
  std::size_t functions = 0;
  for (const auto& [fid, members] : corpus.groups()) {
    if (members.size() < 2 && !config.allow_self_pairs) continue;
    ++functions;
    trainable.insert(trainable.end(), members.size(), fid);
  }
  Require(static_cast<int>(functions) >= config.batch_size,
          "fewer trainable functions than one batch");

  TrainResult result;
  Checkpoint& ckpt = result.checkpoint;
  ckpt.config = config;
  ckpt.vocab = BuildVocab(corpus);
  const TokenizedCorpus data = Tokenize(corpus, ckpt.vocab);
  const EncoderParams init = InitEncoder(config.encoder, ckpt.vocab.op_size(),
                                         ckpt.vocab.operand_size(), config.seed);
  EncoderPair pair = MakeEncoderPair(init);
  EmbeddingQueue queue = InitQueue(data, pair.key, config.queue_size,
                                   config.seed + 101, config.coupling);
  spdlog::info("training on {} functions ({} variants), vocab {} ops / {} operands, {} parameters",
               functions, corpus.size(), ckpt.vocab.op_size(),
               ckpt.vocab.operand_size(), TotalSize(init));

  std::ofstream log_file;
  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    log_file.open(*options.out_dir / "train_log.jsonl", std::ios::trunc);
  }
  Trainer trainer(config, data, std::move(pair), std::move(queue));
  auto snapshot = [&](int epoch) {
    ckpt.pair = trainer.pair();
    ckpt.queue = trainer.queue();
    ckpt.epoch = epoch;
    if (options.out_dir) SaveCheckpoint(*options.out_dir / "checkpoint.gmco", ckpt);
  };
  snapshot(0);

  Rng rng(config.seed);
  const int steps = static_cast<int>(trainable.size()) / config.batch_size;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::string> order = trainable;
    const std::vector<int> perm = RandomPermutation(static_cast<int>(order.size()), rng);
    for (std::size_t i = 0; i < perm.size(); ++i) order[i] = trainable[static_cast<std::size_t>(perm[i])];
    double loss_sum = 0.0;
    for (int s = 0; s < steps; ++s) {
      const std::span<const std::string> batch(
          order.data() + static_cast<std::ptrdiff_t>(s) * config.batch_size,
          static_cast<std::size_t>(config.batch_size));
      const StepResult step = trainer.Step(batch, rng);
      loss_sum += step.loss;
      spdlog::debug("epoch {} step {} loss {:.6f} grad_norm {:.4f} pos {:.4f} neg {:.4f}",
                    epoch, s, step.loss, step.grad_norm, step.positive_sim,
                    step.negative_sim);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.mean_loss = loss_sum / steps;
    if (options.validation && !options.validation->empty()) {
      const Corpus& val = *options.validation;
      std::size_t largest = 0;
      for (const auto& [fid, members] : val.groups()) largest = std::max(largest, members.size());
      const int pool = std::min<int>(config.val_pool,
                                     static_cast<int>(val.size() - largest) + 1);
      if (pool >= 2 && largest >= 2) {
        const PairTask task = BuildPairTask(val, TaskKind::kXm, 0, pool, config.seed);
        const int chunk = config.coupling.group_size > 0 ? 1 : 64;
        const Matrix emb = EncodeCorpus(val, ckpt.vocab, trainer.pair().query,
                                        chunk, config.coupling);
        entry.val_recall1 = RecallAt1(ScoreTask(task, val, emb).rankings);
      }
    }
    entry.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("epoch {} loss {:.6f} val_recall1 {} ({:.1f}s)", epoch,
                 entry.mean_loss,
                 entry.val_recall1 ? fmt::format("{:.4f}", *entry.val_recall1) : "n/a",
                 entry.seconds);
    if (log_file) {
      nlohmann::json line = {{"epoch", epoch}, {"loss", entry.mean_loss},
                             {"seconds", entry.seconds}};
      if (entry.val_recall1) line["val_recall1"] = *entry.val_recall1;
      log_file << line.dump() << '\n';
      log_file.flush();
    }
    result.log.push_back(entry);
    snapshot(epoch);
    if (options.on_epoch) options.on_epoch(entry);
  }
  return result;
}

}  // namespace graphmoco
