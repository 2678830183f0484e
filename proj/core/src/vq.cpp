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

#include "vqtk/vq.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {
namespace {

void require_same_dim(std::uint32_t map_dim, std::uint32_t book_dim) {
  if (map_dim != book_dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature dim " + std::to_string(map_dim) +
                    " does not match codebook dim " + std::to_string(book_dim));
  }
}

void require_loss_inputs(const FeatureMap& map, const Codebook& book,
                         const TokenGrid& tokens) {
  require_same_dim(map.dim(), book.dim());
  if (tokens.height() != map.height() || tokens.width() != map.width()) {
    throw Error(ErrorCode::ShapeMismatch, "token grid shape differs from map");
  }
  tokens.validate(book.size());
}

double squared_distance(std::span<const float> a,
                        std::span<const float> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double diff = static_cast<double>(a[k]) - static_cast<double>(b[k]);
    s += diff * diff;
  }
  return s;
}

}  // namespace

void VqLossConfig::validate() const {
  if (!std::isfinite(beta) || beta < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "beta must be finite and >= 0");
  }
}

void VqTrainConfig::validate() const {
  if (!(ema_decay > 0.0 && ema_decay < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "ema_decay must lie in (0, 1)");
  }
  if (epochs == 0) throw Error(ErrorCode::InvalidArgument, "epochs must be >= 1");
  if (batch_size == 0) {
    throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  }
}

NearestCode nearest_code(std::span<const float> x, const Codebook& book) noexcept {
  NearestCode best{0, squared_distance(x, book.row(0))};
  for (std::uint32_t c = 1; c < book.size(); ++c) {
    const double d = squared_distance(x, book.row(c));
    if (d < best.distance_sq) best = {c, d};
  }
  return best;
}

QuantizeOutput vq_quantize(const FeatureMap& map, const Codebook& book,
                           unsigned threads) {
  require_same_dim(map.dim(), book.dim());
  const std::size_t n = map.positions();
  const std::size_t d = map.dim();
  std::vector<std::uint32_t> codes(n);
  std::vector<double> dist(n);
  std::vector<float> vectors(n * d);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto hit = nearest_code(map.vector(p), book);
      codes[p] = hit.code;
      dist[p] = hit.distance_sq;
      const auto row = book.row(hit.code);
      std::copy(row.begin(), row.end(), vectors.begin() + p * d);
    }
  });
  const double err = pairwise_sum(dist) / static_cast<double>(n);
  return QuantizeOutput{
      TokenGrid(map.height(), map.width(), std::move(codes)),
      FeatureMap(map.height(), map.width(), map.dim(), std::move(vectors)),
      err};
}

VqLoss vq_loss(const FeatureMap& map, const Codebook& book,
               const TokenGrid& tokens, const VqLossConfig& cfg) {
  cfg.validate();
  require_loss_inputs(map, book, tokens);
  const std::size_t n = map.positions();
  std::vector<double> dist(n);
  for (std::size_t p = 0; p < n; ++p) {
    dist[p] = squared_distance(map.vector(p), book.row(tokens.codes()[p]));
  }
  const double mean_sq = pairwise_sum(dist) / static_cast<double>(n);
  VqLoss out;
  out.codebook_term = mean_sq;
  out.commitment_term = mean_sq;
  out.total = out.codebook_term + cfg.beta * out.commitment_term;
  return out;
}

VqGradients vq_loss_gradients(const FeatureMap& map, const Codebook& book,
                              const TokenGrid& tokens, const VqLossConfig& cfg) {
  cfg.validate();
  require_loss_inputs(map, book, tokens);
  const std::size_t n = map.positions();
  const std::size_t d = map.dim();
  const double inv_len = 1.0 / static_cast<double>(n);

  std::vector<float> grad_x(n * d);
  std::vector<double> book_acc(std::size_t{book.size()} * d, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto code = tokens.codes()[p];
    const auto x = map.vector(p);
    const auto c = book.row(code);
    for (std::size_t k = 0; k < d; ++k) {
      const double diff = static_cast<double>(x[k]) - static_cast<double>(c[k]);
      grad_x[p * d + k] = static_cast<float>(2.0 * cfg.beta * diff * inv_len);
      book_acc[code * d + k] -= diff;
    }
  }
  std::vector<float> grad_book(book_acc.size());
  for (std::size_t i = 0; i < book_acc.size(); ++i) {
    grad_book[i] = static_cast<float>(2.0 * inv_len * book_acc[i]);
  }
  return VqGradients{
      FeatureMap(map.height(), map.width(), map.dim(), std::move(grad_x)),
      Codebook(book.size(), book.dim(), std::move(grad_book))};
}

SteGradients ste_backward(const FeatureMap& upstream,
                          const QuantizeOutput& forward, const Codebook& book) {
  if (!upstream.same_shape(forward.code_vectors)) {
    throw Error(ErrorCode::ShapeMismatch,
                "upstream gradient shape differs from quantizer output");
  }
  require_same_dim(upstream.dim(), book.dim());
  return SteGradients{
      upstream,
      Codebook(book.size(), book.dim(),
               std::vector<float>(std::size_t{book.size()} * book.dim(), 0.0f))};
}

VqTrainResult train_codebook(std::span<const FeatureMap> data,
                             const Codebook& init, const VqTrainConfig& cfg) {
  cfg.validate();
  const VectorSet pool = pool_vectors(data);
  require_same_dim(pool.dim, init.dim());
  const std::size_t n = pool.count();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "no training vectors");
  const std::size_t d = pool.dim;
  const std::uint32_t codes = init.size();

  std::vector<float> book(init.data().begin(), init.data().end());
  std::mt19937_64 rng(cfg.reinit_seed);
  VqTrainResult result{init, {}, {}, {}};

  std::vector<std::uint32_t> assign;
  std::vector<double> dist;
  std::vector<double> sums(std::size_t{codes} * d);
  std::vector<std::uint64_t> batch_counts(codes);
  std::vector<std::uint64_t> epoch_counts(codes);

  for (std::uint32_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(epoch_counts.begin(), epoch_counts.end(), 0);
    double err_sum = 0.0;
    std::size_t last_begin = 0;
    std::size_t last_end = 0;

    for (std::size_t begin = 0; begin < n; begin += cfg.batch_size) {
      const std::size_t end = std::min(n, begin + cfg.batch_size);
      const Codebook current(codes, init.dim(), book);
      assign.assign(end - begin, 0);
      dist.assign(end - begin, 0.0);
      parallel_for(end - begin, cfg.threads, [&](std::size_t b, std::size_t e) {
        for (std::size_t i = b; i < e; ++i) {
          const auto hit = nearest_code(pool.row(begin + i), current);
          assign[i] = hit.code;
          dist[i] = hit.distance_sq;
        }
      });
      err_sum += pairwise_sum(dist);

      // Fixed-order accumulation keeps updates independent of thread count.
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(batch_counts.begin(), batch_counts.end(), 0);
      for (std::size_t i = 0; i < assign.size(); ++i) {
        const auto x = pool.row(begin + i);
        double* s = sums.data() + std::size_t{assign[i]} * d;
        for (std::size_t k = 0; k < d; ++k) s[k] += x[k];
        ++batch_counts[assign[i]];
      }
      for (std::uint32_t c = 0; c < codes; ++c) {
        if (batch_counts[c] == 0) continue;
        epoch_counts[c] += batch_counts[c];
        const double inv = 1.0 / static_cast<double>(batch_counts[c]);
        for (std::size_t k = 0; k < d; ++k) {
          const double mean = sums[c * d + k] * inv;
          float& v = book[c * d + k];
          v = static_cast<float>(cfg.ema_decay * v + (1.0 - cfg.ema_decay) * mean);
        }
      }
      last_begin = begin;
      last_end = end;
    }

    std::uint32_t used = 0;
    std::vector<std::uint32_t> dead;
    for (std::uint32_t c = 0; c < codes; ++c) {
      if (epoch_counts[c] > 0) ++used;
      if (epoch_counts[c] < cfg.dead_code_threshold) dead.push_back(c);
    }

    // Anchors: distinct vectors of the last batch while they last.
    std::vector<std::size_t> candidates(last_end - last_begin);
    std::iota(candidates.begin(), candidates.end(), last_begin);
    for (std::size_t i = 0; i < dead.size(); ++i) {
      std::size_t pick;
      if (i < candidates.size()) {
        std::uniform_int_distribution<std::size_t> u(i, candidates.size() - 1);
        std::swap(candidates[i], candidates[u(rng)]);
        pick = candidates[i];
      } else {
        std::uniform_int_distribution<std::size_t> u(0, candidates.size() - 1);
        pick = candidates[u(rng)];
      }
      const auto x = pool.row(pick);
      std::copy(x.begin(), x.end(), book.begin() + std::size_t{dead[i]} * d);
    }

    result.quant_error_trace.push_back(err_sum / static_cast<double>(n));
    result.usage_trace.push_back(used);
    result.reinit_trace.push_back(static_cast<std::uint32_t>(dead.size()));
  }

  result.codebook = Codebook(codes, init.dim(), std::move(book));
  return result;
}

}  // namespace vqtk
