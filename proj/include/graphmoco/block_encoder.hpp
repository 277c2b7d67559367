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

#ifndef GRAPHMOCO_BLOCK_ENCODER_HPP
#define GRAPHMOCO_BLOCK_ENCODER_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "graphmoco/tensor.hpp"

namespace graphmoco {

inline constexpr int kMaxWindow = 4;

// Convolution filters over instruction windows. weights[i] is
// (filters x windows[i] * input_dim): row f is filter f applied to the
// concatenation of windows[i] consecutive instruction embeddings.
struct StrandCnnParams {
  std::vector<int> windows;
  int filters = 0;
  int input_dim = 0;
  Activation activation = Activation::kTanh;
  std::vector<Matrix> weights;
  std::vector<Vector> biases;

  int MaxWindow() const;
  // |windows| * filters pooled strand features followed by the mean embedding.
  int OutputDim() const {
    return static_cast<int>(windows.size()) * filters + input_dim;
  }
};

// Fan-in scaled uniform init: |w| <= 1/sqrt(h * 2d). d is the token width,
// so the convolution input is 2d wide.
StrandCnnParams InitStrandParams(const std::vector<int>& windows, int filters,
                                 int d, std::uint64_t seed,
                                 Activation activation = Activation::kTanh);

// Single block: max-pooled strand features then the mean instruction
// embedding. Sequences shorter than the widest window are zero padded; the
// mean covers real instructions only.
Vector EncodeBlock(const Matrix& instr_embeds, const StrandCnnParams& params);

// Values retained by the batched forward pass for backpropagation.
struct BlockBatchCache {
  std::vector<int> offsets;
  // Per window size: window matrix, activations and per (block, filter) argmax
  // window row.
  std::vector<Matrix> window_inputs;
  std::vector<Matrix> activations;
  std::vector<std::vector<int>> window_block_start;  // first window per block
  std::vector<Eigen::MatrixXi> argmax;
};

// Encodes many blocks at once. Block b owns rows [offsets[b], offsets[b+1])
// of `instr_embeds`; the result has one row per block.
Matrix EncodeBlocks(const Matrix& instr_embeds, std::span<const int> offsets,
                    const StrandCnnParams& params,
                    BlockBatchCache* cache = nullptr);

// Accumulates parameter gradients into `grad` and, when non-null, writes
// d(loss)/d(instr_embeds) into `grad_embeds`.
void EncodeBlocksBackward(const Matrix& grad_out, const BlockBatchCache& cache,
                          const StrandCnnParams& params, StrandCnnParams& grad,
                          Matrix* grad_embeds);

}  // namespace graphmoco

#endif  // GRAPHMOCO_BLOCK_ENCODER_HPP
