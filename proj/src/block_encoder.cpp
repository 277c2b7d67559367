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

#include "graphmoco/block_encoder.hpp"

#include <algorithm>
#include <random>

#include "graphmoco/error.hpp"

namespace graphmoco {

int StrandCnnParams::MaxWindow() const {
  return windows.empty() ? 1 : *std::max_element(windows.begin(), windows.end());
}

StrandCnnParams InitStrandParams(const std::vector<int>& windows, int filters,
                                 int d, std::uint64_t seed,
                                 Activation activation) {
  Require(!windows.empty(), "at least one window size is required");
  Require(filters >= 1, "filters_per_size must be positive");
  Require(d >= 1, "token width must be positive");
  for (int h : windows) {
    Require(h >= 1 && h <= kMaxWindow,
            "window size " + std::to_string(h) + " outside [1, 4]");
  }
  StrandCnnParams p;
  p.windows = windows;
  p.filters = filters;
  p.input_dim = 2 * d;
  p.activation = activation;
  std::mt19937_64 rng(seed);
  for (int h : windows) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(h * p.input_dim));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix w(filters, h * p.input_dim);
    for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = dist(rng);
    Vector b(filters);
    for (Eigen::Index i = 0; i < b.size(); ++i) b[i] = dist(rng);
    p.weights.push_back(std::move(w));
    p.biases.push_back(std::move(b));
  }
  return p;
}

Vector EncodeBlock(const Matrix& instr_embeds, const StrandCnnParams& params) {
  const int offsets[2] = {0, static_cast<int>(instr_embeds.rows())};
  return EncodeBlocks(instr_embeds, offsets, params).row(0).transpose();
}

Matrix EncodeBlocks(const Matrix& instr_embeds, std::span<const int> offsets,
                    const StrandCnnParams& params, BlockBatchCache* cache) {
  Require(!offsets.empty(), "block offsets must not be empty");
  Require(instr_embeds.cols() == params.input_dim,
          "instruction embedding width does not match the strand filters");
  const int num_blocks = static_cast<int>(offsets.size()) - 1;
  for (int b = 0; b < num_blocks; ++b) {
    Require(offsets[b + 1] > offsets[b], "basic block has no instructions");
  }
  const int dim = params.input_dim;
  const int filters = params.filters;
  const int max_h = params.MaxWindow();
  Matrix out(num_blocks, params.OutputDim());

  if (cache) {
    cache->offsets.assign(offsets.begin(), offsets.end());
    cache->window_inputs.clear();
    cache->activations.clear();
    cache->window_block_start.clear();
    cache->argmax.clear();
  }

  for (std::size_t wi = 0; wi < params.windows.size(); ++wi) {
    const int h = params.windows[wi];
    std::vector<int> starts(static_cast<std::size_t>(num_blocks) + 1, 0);
    for (int b = 0; b < num_blocks; ++b) {
      const int n = offsets[b + 1] - offsets[b];
      starts[b + 1] = starts[b] + std::max(n, max_h) - h + 1;
    }
    Matrix windows = Matrix::Zero(starts.back(), h * dim);
    for (int b = 0; b < num_blocks; ++b) {
      const int n = offsets[b + 1] - offsets[b];
      for (int i = 0; i < starts[b + 1] - starts[b]; ++i) {
        for (int j = 0; j < h && i + j < n; ++j) {
          windows.block(starts[b] + i, j * dim, 1, dim) =
              instr_embeds.row(offsets[b] + i + j);
        }
      }
    }
    Matrix act = windows * params.weights[wi].transpose();
    act.rowwise() += params.biases[wi].transpose();
    ActivateInPlace(params.activation, act);

    Eigen::MatrixXi argmax(num_blocks, filters);
    for (int b = 0; b < num_blocks; ++b) {
      for (int f = 0; f < filters; ++f) {
        int best = starts[b];
        for (int r = starts[b] + 1; r < starts[b + 1]; ++r) {
          if (act(r, f) > act(best, f)) best = r;
        }
        argmax(b, f) = best;
        out(b, static_cast<Eigen::Index>(wi) * filters + f) = act(best, f);
      }
    }
    if (cache) {
      cache->window_inputs.push_back(std::move(windows));
      cache->activations.push_back(std::move(act));
      cache->window_block_start.push_back(std::move(starts));
      cache->argmax.push_back(std::move(argmax));
    }
  }

  const Eigen::Index mean_col =
      static_cast<Eigen::Index>(params.windows.size()) * filters;
  for (int b = 0; b < num_blocks; ++b) {
    const int n = offsets[b + 1] - offsets[b];
    out.block(b, mean_col, 1, dim) =
        instr_embeds.middleRows(offsets[b], n).colwise().mean();
  }
  return out;
}

void EncodeBlocksBackward(const Matrix& grad_out, const BlockBatchCache& cache,
                          const StrandCnnParams& params, StrandCnnParams& grad,
                          Matrix* grad_embeds) {
  const int num_blocks = static_cast<int>(cache.offsets.size()) - 1;
  const int dim = params.input_dim;
  const int filters = params.filters;
  if (grad_embeds) *grad_embeds = Matrix::Zero(cache.offsets.back(), dim);

  for (std::size_t wi = 0; wi < params.windows.size(); ++wi) {
    const int h = params.windows[wi];
    const Matrix& windows = cache.window_inputs[wi];
    const Matrix& act = cache.activations[wi];
    const auto& starts = cache.window_block_start[wi];
    const Eigen::MatrixXi& argmax = cache.argmax[wi];
    // Max pooling routes each pooled gradient to a single window, so only
    // those rows contribute.
    Matrix grad_windows;
    if (grad_embeds) grad_windows = Matrix::Zero(windows.rows(), windows.cols());
    for (int b = 0; b < num_blocks; ++b) {
      for (int f = 0; f < filters; ++f) {
        const int r = argmax(b, f);
        const double g =
            grad_out(b, static_cast<Eigen::Index>(wi) * filters + f) *
            ActivationSlope(params.activation, act(r, f));
        if (g == 0.0) continue;
        grad.weights[wi].row(f) += g * windows.row(r);
        grad.biases[wi][f] += g;
        if (grad_embeds) grad_windows.row(r) += g * params.weights[wi].row(f);
      }
    }
    if (!grad_embeds) continue;
    for (int b = 0; b < num_blocks; ++b) {
      const int n = cache.offsets[b + 1] - cache.offsets[b];
      for (int i = 0; i < starts[b + 1] - starts[b]; ++i) {
        for (int j = 0; j < h && i + j < n; ++j) {
          grad_embeds->row(cache.offsets[b] + i + j) +=
              grad_windows.block(starts[b] + i, j * dim, 1, dim);
        }
      }
    }
  }

  if (grad_embeds) {
    const Eigen::Index mean_col =
        static_cast<Eigen::Index>(params.windows.size()) * filters;
    for (int b = 0; b < num_blocks; ++b) {
      const int n = cache.offsets[b + 1] - cache.offsets[b];
      const Eigen::RowVectorXd g =
          grad_out.block(b, mean_col, 1, dim) / static_cast<double>(n);
      grad_embeds->middleRows(cache.offsets[b], n).rowwise() += g;
    }
  }
}

}  // namespace graphmoco
