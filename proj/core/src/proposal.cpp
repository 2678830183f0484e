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

#include "vqtk/proposal.hpp"

#include <cmath>
#include <random>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/io.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {
namespace {

void require_code(std::uint32_t code, std::uint32_t vocab) {
  if (code >= vocab) {
    throw Error(ErrorCode::CodeOutOfRange,
                "code " + std::to_string(code) + " is outside [0, " +
                    std::to_string(vocab) + ")");
  }
}

}  // namespace

double ProposalModel::probability(std::span<const std::uint32_t> prefix,
                                  std::uint32_t code) const {
  require_code(code, vocab_size());
  return next_token_distribution(prefix)[code];
}

UniformModel::UniformModel(std::uint32_t vocab_size) : vocab_(vocab_size) {
  if (vocab_ == 0) throw Error(ErrorCode::InvalidArgument, "vocab size must be >= 1");
}

std::vector<double> UniformModel::next_token_distribution(
    std::span<const std::uint32_t>) const {
  return std::vector<double>(vocab_, 1.0 / static_cast<double>(vocab_));
}

double UniformModel::probability(std::span<const std::uint32_t>,
                                 std::uint32_t code) const {
  require_code(code, vocab_);
  return 1.0 / static_cast<double>(vocab_);
}

UnigramModel::UnigramModel(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");
  CompensatedSum total;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw Error(ErrorCode::NotStochastic, "probabilities must be finite and >= 0");
    }
    total.add(p);
  }
  if (std::abs(total.value() - 1.0) > 1e-9) {
    throw Error(ErrorCode::NotStochastic, "probabilities must sum to 1");
  }
}

std::vector<double> UnigramModel::next_token_distribution(
    std::span<const std::uint32_t>) const {
  return probs_;
}

double UnigramModel::probability(std::span<const std::uint32_t>,
                                 std::uint32_t code) const {
  require_code(code, vocab_size());
  return probs_[code];
}

NgramModel::NgramModel(std::uint32_t order, std::uint32_t vocab_size, double alpha)
    : order_(order), vocab_(vocab_size), alpha_(alpha) {
  if (order_ == 0) throw Error(ErrorCode::InvalidArgument, "n-gram order must be >= 1");
  if (vocab_ == 0 || vocab_ == kBos) {
    throw Error(ErrorCode::InvalidArgument, "vocab size must lie in [1, 2^32 - 1)");
  }
  if (!std::isfinite(alpha_) || alpha_ <= 0.0) {
    throw Error(ErrorCode::InvalidArgument, "smoothing alpha must be finite and > 0");
  }
}

NgramModel NgramModel::fit(std::span<const TokenGrid> corpus, std::uint32_t order,
                           std::uint32_t vocab_size, double alpha) {
  NgramModel model(order, vocab_size, alpha);
  if (corpus.empty()) throw Error(ErrorCode::EmptyInput, "empty token corpus");
  for (const auto& grid : corpus) {
    grid.validate(vocab_size);
    model.add_sequence(grid.codes());
  }
  return model;
}

NgramModel::Context NgramModel::context_of(
    std::span<const std::uint32_t> prefix) const {
  const std::size_t width = order_ - 1;
  Context ctx(width, kBos);
  const std::size_t have = std::min(width, prefix.size());
  for (std::size_t j = 0; j < have; ++j) {
    ctx[width - have + j] = prefix[prefix.size() - have + j];
  }
  return ctx;
}

void NgramModel::add_sequence(std::span<const std::uint32_t> codes) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    require_code(codes[i], vocab_);
    add_count(context_of(codes.first(i)), codes[i], 1);
  }
}

void NgramModel::add_count(const Context& context, std::uint32_t code,
                           std::uint64_t count) {
  if (context.size() != order_ - 1) {
    throw Error(ErrorCode::ShapeMismatch, "context length must equal order - 1");
  }
  for (auto c : context) {
    if (c != kBos) require_code(c, vocab_);
  }
  require_code(code, vocab_);
  auto& slot = table_[context];
  slot.total += count;
  slot.next[code] += count;
}

std::uint64_t NgramModel::count(const Context& context, std::uint32_t code) const {
  const auto it = table_.find(context);
  if (it == table_.end()) return 0;
  const auto jt = it->second.next.find(code);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::vector<double> NgramModel::next_token_distribution(
    std::span<const std::uint32_t> prefix) const {
  const auto it = table_.find(context_of(prefix));
  const double total = it == table_.end() ? 0.0 : static_cast<double>(it->second.total);
  const double denom = total + alpha_ * vocab_;
  std::vector<double> dist(vocab_, alpha_ / denom);
  if (it != table_.end()) {
    for (const auto& [code, n] : it->second.next) {
      dist[code] = (static_cast<double>(n) + alpha_) / denom;
    }
  }
  return dist;
}

double NgramModel::probability(std::span<const std::uint32_t> prefix,
                               std::uint32_t code) const {
  require_code(code, vocab_);
  const auto it = table_.find(context_of(prefix));
  if (it == table_.end()) return 1.0 / static_cast<double>(vocab_);
  const auto jt = it->second.next.find(code);
  const double n = jt == it->second.next.end() ? 0.0 : static_cast<double>(jt->second);
  return (n + alpha_) / (static_cast<double>(it->second.total) + alpha_ * vocab_);
}

bool operator==(const NgramModel::ContextCounts& a,
                const NgramModel::ContextCounts& b) {
  return a.total == b.total && a.next == b.next;
}

bool operator==(const NgramModel& a, const NgramModel& b) {
  return a.order_ == b.order_ && a.vocab_ == b.vocab_ && a.alpha_ == b.alpha_ &&
         a.table_ == b.table_;
}

double sequence_log_prob(const ProposalModel& model,
                         std::span<const std::uint32_t> sequence) {
  CompensatedSum total;
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    const double p = model.probability(sequence.first(i), sequence[i]);
    if (!(p > 0.0)) {
      throw Error(ErrorCode::ZeroProbability,
                  "code " + std::to_string(sequence[i]) + " at position " +
                      std::to_string(i) + " has zero probability");
    }
    total.add(std::log(p));
  }
  return total.value();
}

std::vector<std::uint32_t> ngram_sample(const ProposalModel& model,
                                        std::size_t length, std::uint64_t seed) {
  if (length == 0) throw Error(ErrorCode::InvalidArgument, "sample length must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::uint32_t> out;
  out.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const auto dist = model.next_token_distribution(out);
    const double target = u(rng);
    double run = 0.0;
    std::uint32_t pick = 0;
    for (std::uint32_t c = 0; c < dist.size(); ++c) {
      if (dist[c] <= 0.0) continue;
      pick = c;  // last code with positive mass, kept if rounding undershoots
      run += dist[c];
      if (target < run) break;
    }
    out.push_back(pick);
  }
  return out;
}

std::vector<std::byte> encode_ngram(const NgramModel& model) {
  detail::ByteWriter out;
  out.magic("NGRM");
  out.u32(kFormatVersion);
  out.u32(model.order());
  out.u32(model.vocab_size());
  out.f64(model.alpha());
  std::uint64_t entries = 0;
  for (const auto& [ctx, counts] : model.table()) entries += counts.next.size();
  out.u64(entries);
  for (const auto& [ctx, counts] : model.table()) {
    for (const auto& [code, n] : counts.next) {
      for (auto c : ctx) out.u32(c);
      out.u32(code);
      out.u64(n);
    }
  }
  return std::move(out).take();
}

NgramModel decode_ngram(std::span<const std::byte> bytes) {
  detail::ByteReader in(bytes);
  in.expect_magic("NGRM");
  in.expect_version();
  const auto order_at = in.offset();
  const auto order = in.u32();
  const auto vocab = in.u32();
  const auto alpha = in.f64();
  if (order == 0 || vocab == 0 || vocab == NgramModel::kBos ||
      !std::isfinite(alpha) || alpha <= 0.0) {
    throw Error(ErrorCode::InvalidShape, "invalid n-gram header", order_at);
  }
  NgramModel model(order, vocab, alpha);
  const auto entries = in.u64();
  const std::uint64_t entry_bytes = 4ull * order + 8ull;
  if (entries > in.remaining() / entry_bytes) {
    throw Error(ErrorCode::Truncated,
                "n-gram table declares " + std::to_string(entries) + " entries",
                in.offset() + in.remaining());
  }
  NgramModel::Context ctx(order - 1);
  for (std::uint64_t e = 0; e < entries; ++e) {
    const auto at = in.offset();
    for (auto& c : ctx) c = in.u32();
    const auto code = in.u32();
    const auto n = in.u64();
    try {
      model.add_count(ctx, code, n);
    } catch (const Error& err) {
      throw Error(err.code(), "bad n-gram entry", at);
    }
  }
  in.expect_end();
  return model;
}

NgramModel read_ngram(const std::filesystem::path& path) {
  return decode_ngram(read_file_bytes(path));
}

void write_ngram(const NgramModel& model, const std::filesystem::path& path) {
  write_file_bytes(path, encode_ngram(model));
}

}  // namespace vqtk
