/* Copyright 2026 The vqtk Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vqtk/types.hpp"

namespace vqtk {

struct VqLossConfig {
  /// Weight of the commitment term.
  double beta = 0.25;

  void validate() const;
};

struct VqLoss {
  double total = 0.0;
  /// mean ||sg[x] - C(z)||^2, gradient flows to the codebook only.
  double codebook_term = 0.0;
  /// mean ||x - sg[C(z)]||^2, gradient flows to the input only.
  double commitment_term = 0.0;
};

struct VqGradients {
  FeatureMap grad_x;
  Codebook grad_book;
};

struct SteGradients {
  FeatureMap grad_x;
  /// Always all-zero: the straight-through path gives the codebook nothing.
  Codebook grad_book;
};

/// Nearest-code assignment under Euclidean distance. Distances accumulate in
/// double; ties go to the lowest code index. Results do not depend on
/// `threads`.
QuantizeOutput vq_quantize(const FeatureMap& map, const Codebook& book,
                           unsigned threads = 1);

/// Index of the nearest row of `book` to `x` (lowest index on ties), and its
/// squared distance.
struct NearestCode {
  std::uint32_t code;
  double distance_sq;
};
NearestCode nearest_code(std::span<const float> x, const Codebook& book) noexcept;

/// The two-term quantization loss. Both terms evaluate to the same number;
/// they differ only in where their gradients flow (see vq_loss_gradients).
VqLoss vq_loss(const FeatureMap& map, const Codebook& book,
               const TokenGrid& tokens, const VqLossConfig& cfg);

/// Gradients of vq_loss with stop-gradient semantics:
///   grad_x[p]    = 2 * beta * (x_p - c_{z_p}) / L       (commitment term)
///   grad_book[c] = -2 / L * sum_{p : z_p = c} (x_p - c)  (codebook term)
/// Rows of unused codes are zero.
VqGradients vq_loss_gradients(const FeatureMap& map, const Codebook& book,
                              const TokenGrid& tokens, const VqLossConfig& cfg);

/// Straight-through backward pass: copies the gradient arriving at the
/// quantizer output to its input unchanged.
SteGradients ste_backward(const FeatureMap& upstream,
                          const QuantizeOutput& forward, const Codebook& book);

/// Full objective with an externally computed reconstruction loss.
inline double total_tokenizer_loss(const VqLoss& quant, double reconstruction) {
  return quant.total + reconstruction;
}

struct VqTrainConfig {
  double ema_decay = 0.99;
  /// Codes used fewer than this many times in an epoch are reinitialized.
  /// Zero disables reinitialization.
  std::uint32_t dead_code_threshold = 0;
  std::uint64_t reinit_seed = 0;
  std::uint32_t epochs = 10;
  /// Vectors per batch; the pooled data is walked in order.
  std::size_t batch_size = 4096;
  unsigned threads = 1;

  void validate() const;
};

struct VqTrainResult {
  Codebook codebook;
  /// Mean squared quantization error observed during each epoch.
  std::vector<double> quant_error_trace;
  /// Distinct codes used during each epoch.
  std::vector<std::uint32_t> usage_trace;
  /// Codes reinitialized at the end of each epoch.
  std::vector<std::uint32_t> reinit_trace;
};

/// EMA codebook training: every batch assigns its vectors with nearest_code
/// and moves each used code to decay * c + (1 - decay) * mean(assigned).
/// After each epoch, dead codes are replaced by vectors drawn from the last
/// batch with a PRNG seeded from cfg.reinit_seed.
VqTrainResult train_codebook(std::span<const FeatureMap> data,
                             const Codebook& init, const VqTrainConfig& cfg);

}  // namespace vqtk
