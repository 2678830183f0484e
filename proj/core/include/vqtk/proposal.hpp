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
#include <filesystem>
#include <map>
#include <span>
#include <vector>

#include "vqtk/types.hpp"

namespace vqtk {

/// An autoregressive model of code sequences: p(z_i | z_1..z_{i-1}).
/// Grids are read as sequences in raster (row-major) order.
class ProposalModel {
 public:
  virtual ~ProposalModel() = default;

  virtual std::uint32_t vocab_size() const noexcept = 0;

  /// Distribution over the next code given every code emitted so far in the
  /// sequence. Entries are >= 0 and sum to 1 within 1e-9.
  virtual std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const = 0;

  /// p(code | prefix). The default evaluates the full distribution.
  virtual double probability(std::span<const std::uint32_t> prefix,
                             std::uint32_t code) const;
};

/// Every code equally likely, regardless of context.
class UniformModel final : public ProposalModel {
 public:
  explicit UniformModel(std::uint32_t vocab_size);

  std::uint32_t vocab_size() const noexcept override { return vocab_; }
  std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const override;
  double probability(std::span<const std::uint32_t> prefix,
                     std::uint32_t code) const override;

 private:
  std::uint32_t vocab_;
};

/// A fixed context-free distribution, e.g. a one-hot "deterministic" model.
class UnigramModel final : public ProposalModel {
 public:
  explicit UnigramModel(std::vector<double> probs);

  std::uint32_t vocab_size() const noexcept override {
    return static_cast<std::uint32_t>(probs_.size());
  }
  std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const override;
  double probability(std::span<const std::uint32_t> prefix,
                     std::uint32_t code) const override;

 private:
  std::vector<double> probs_;
};

/// Count-based n-gram model with add-alpha smoothing:
///   p(z | ctx) = (count(ctx, z) + alpha) / (count(ctx) + alpha * N)
/// where ctx is the previous order - 1 codes. Positions before the start of
/// a sequence are filled with the reserved begin-of-sequence marker kBos,
/// which is never a valid code.
class NgramModel final : public ProposalModel {
 public:
  static constexpr std::uint32_t kBos = 0xFFFFFFFFu;

  using Context = std::vector<std::uint32_t>;
  struct ContextCounts {
    std::uint64_t total = 0;
    std::map<std::uint32_t, std::uint64_t> next;
  };

  NgramModel(std::uint32_t order, std::uint32_t vocab_size, double alpha);

  static NgramModel fit(std::span<const TokenGrid> corpus, std::uint32_t order,
                        std::uint32_t vocab_size, double alpha);

  /// Adds one sequence's n-gram counts.
  void add_sequence(std::span<const std::uint32_t> codes);
  void add_count(const Context& context, std::uint32_t code, std::uint64_t count);

  std::uint32_t order() const noexcept { return order_; }
  double alpha() const noexcept { return alpha_; }
  const std::map<Context, ContextCounts>& table() const noexcept { return table_; }
  std::uint64_t count(const Context& context, std::uint32_t code) const;

  /// The (order - 1)-code context preceding position prefix.size().
  Context context_of(std::span<const std::uint32_t> prefix) const;

  std::uint32_t vocab_size() const noexcept override { return vocab_; }
  std::vector<double> next_token_distribution(
      std::span<const std::uint32_t> prefix) const override;
  double probability(std::span<const std::uint32_t> prefix,
                     std::uint32_t code) const override;

  friend bool operator==(const NgramModel& a, const NgramModel& b);

 private:
  std::uint32_t order_;
  std::uint32_t vocab_;
  double alpha_;
  std::map<Context, ContextCounts> table_;
};

bool operator==(const NgramModel::ContextCounts& a,
                const NgramModel::ContextCounts& b);

/// Natural-log probability of a whole sequence, sum of log p(z_i | z_<i).
/// A zero-probability code raises ZeroProbability instead of returning -inf.
double sequence_log_prob(const ProposalModel& model,
                         std::span<const std::uint32_t> sequence);

/// Ancestral sampling of `length` codes; deterministic for a given seed.
std::vector<std::uint32_t> ngram_sample(const ProposalModel& model,
                                        std::size_t length, std::uint64_t seed);

// NGRM format, little-endian:
//   "NGRM" | version u32 = 1 | order u32 | N u32 | alpha f64 | entries u64 |
//   entries x ((order - 1) x u32 context, u32 code, u64 count)
// Entries are sorted by (context, code); kBos marks pre-sequence positions.
std::vector<std::byte> encode_ngram(const NgramModel& model);
NgramModel decode_ngram(std::span<const std::byte> bytes);
NgramModel read_ngram(const std::filesystem::path& path);
void write_ngram(const NgramModel& model, const std::filesystem::path& path);

}  // namespace vqtk
