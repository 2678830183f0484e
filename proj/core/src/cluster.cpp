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

#include "vqtk/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {
namespace {

double squared_distance(std::span<const float> x, const double* c) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double diff = static_cast<double>(x[k]) - c[k];
    s += diff * diff;
  }
  return s;
}

class Centroids {
 public:
  Centroids(std::uint32_t k, std::uint32_t dim)
      : k_(k), dim_(dim), values_(std::size_t{k} * dim, 0.0) {}

  std::uint32_t k() const noexcept { return k_; }
  double* row(std::uint32_t c) noexcept { return values_.data() + std::size_t{c} * dim_; }
  const double* row(std::uint32_t c) const noexcept {
    return values_.data() + std::size_t{c} * dim_;
  }
  void set(std::uint32_t c, std::span<const float> x) noexcept {
    std::copy(x.begin(), x.end(), row(c));
  }

  std::pair<std::uint32_t, double> nearest(std::span<const float> x) const noexcept {
    std::uint32_t best = 0;
    double best_d = squared_distance(x, row(0));
    for (std::uint32_t c = 1; c < k_; ++c) {
      const double d = squared_distance(x, row(c));
      if (d < best_d) {
        best = c;
        best_d = d;
      }
    }
    return {best, best_d};
  }

  Codebook to_codebook() const {
    std::vector<float> out(values_.size());
    std::transform(values_.begin(), values_.end(), out.begin(),
                   [](double v) { return static_cast<float>(v); });
    return Codebook(k_, dim_, std::move(out));
  }

 private:
  std::uint32_t k_;
  std::uint32_t dim_;
  std::vector<double> values_;
};

struct Assignment {
  std::vector<std::uint32_t> label;
  std::vector<double> dist;
};

void assign_all(const VectorSet& data, const Centroids& cents, unsigned threads,
                Assignment& out) {
  const std::size_t n = data.count();
  out.label.resize(n);
  out.dist.resize(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto [c, d] = cents.nearest(data.row(i));
      out.label[i] = c;
      out.dist[i] = d;
    }
  });
}

double mean_of(std::span<const double> v) {
  return pairwise_sum(v) / static_cast<double>(v.size());
}

Centroids kmeans_plus_plus(const VectorSet& data, std::uint32_t k,
                           std::mt19937_64& rng, unsigned threads) {
  const std::size_t n = data.count();
  Centroids cents(k, data.dim);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  cents.set(0, data.row(pick(rng)));

  std::vector<double> d2(n);
  parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) d2[i] = squared_distance(data.row(i), cents.row(0));
  });
  for (std::uint32_t c = 1; c < k; ++c) {
    const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
    std::size_t chosen = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double run = 0.0;
      chosen = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (run > target && d2[i] > 0.0) {
          chosen = i;
          break;
        }
      }
      // Rounding can leave `run` short of target; fall back to the last
      // candidate with positive weight.
      while (d2[chosen] == 0.0 && chosen > 0) --chosen;
    } else {
      chosen = pick(rng);
    }
    cents.set(c, data.row(chosen));
    parallel_for(n, threads, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        d2[i] = std::min(d2[i], squared_distance(data.row(i), cents.row(c)));
      }
    });
  }
  return cents;
}

// Moves each empty cluster onto the point farthest from its own centroid,
// never reusing a point. Returns the number of clusters moved.
std::uint32_t reinit_empty_clusters(const VectorSet& data, Centroids& cents,
                                    std::span<const std::uint32_t> labels,
                                    std::span<const std::uint64_t> counts,
                                    std::span<const std::size_t> candidates) {
  std::vector<std::uint32_t> empty;
  for (std::uint32_t c = 0; c < cents.k(); ++c) {
    if (counts[c] == 0) empty.push_back(c);
  }
  if (empty.empty()) return 0;

  std::vector<std::pair<double, std::size_t>> far;
  far.reserve(candidates.size());
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const auto i = candidates[j];
    far.emplace_back(squared_distance(data.row(i), cents.row(labels[j])), i);
  }
  // Largest distance first; ties resolved by lower index.
  std::stable_sort(far.begin(), far.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  std::uint32_t moved = 0;
  for (std::size_t e = 0; e < empty.size() && e < far.size(); ++e) {
    cents.set(empty[e], data.row(far[e].second));
    ++moved;
  }
  return moved;
}

}  // namespace

void KMeansConfig::validate() const {
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (max_iters == 0) throw Error(ErrorCode::InvalidArgument, "max_iters must be >= 1");
  if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be >= 1");
  if (!std::isfinite(tol) || tol < 0.0) {
    throw Error(ErrorCode::InvalidArgument, "tol must be finite and >= 0");
  }
}

void normalize_rows(VectorSet& data) {
  const std::size_t d = data.dim;
  for (std::size_t i = 0; i < data.count(); ++i) {
    float* x = data.values.data() + i * d;
    double ss = 0.0;
    for (std::size_t k = 0; k < d; ++k) ss += static_cast<double>(x[k]) * x[k];
    const double norm = std::sqrt(ss);
    if (norm <= 1e-12) {
      throw Error(ErrorCode::ZeroNorm,
                  "cannot normalize zero vector " + std::to_string(i));
    }
    for (std::size_t k = 0; k < d; ++k) x[k] = static_cast<float>(x[k] / norm);
  }
}

KMeansResult kmeans_fit(const VectorSet& input, const KMeansConfig& cfg) {
  cfg.validate();
  VectorSet owned;
  const VectorSet* data = &input;
  if (cfg.normalize) {
    owned = input;
    normalize_rows(owned);
    data = &owned;
  }
  const std::size_t n = data->count();
  const std::size_t d = data->dim;
  if (n < cfg.k) {
    throw Error(ErrorCode::InsufficientData,
                "k = " + std::to_string(cfg.k) + " exceeds the " +
                    std::to_string(n) + " available vectors");
  }

  std::mt19937_64 rng(cfg.seed);
  Centroids cents = kmeans_plus_plus(*data, cfg.k, rng, cfg.threads);
  KMeansResult result{cents.to_codebook(), {}, 0, false, 0};

  Assignment current;
  assign_all(*data, cents, cfg.threads, current);
  double prev_inertia = mean_of(current.dist);

  const bool full_batch = cfg.batch_size >= n;
  std::vector<double> sums(std::size_t{cfg.k} * d);
  std::vector<std::uint64_t> counts(cfg.k, 0);  // lifetime counts in mini-batch
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> all_indices = perm;
  Assignment batch;

  for (std::uint32_t iter = 0; iter < cfg.max_iters; ++iter) {
    if (full_batch) {
      std::fill(sums.begin(), sums.end(), 0.0);
      std::fill(counts.begin(), counts.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        const auto x = data->row(i);
        double* s = sums.data() + std::size_t{current.label[i]} * d;
        for (std::size_t k = 0; k < d; ++k) s[k] += x[k];
        ++counts[current.label[i]];
      }
      for (std::uint32_t c = 0; c < cfg.k; ++c) {
        if (counts[c] == 0) continue;
        const double inv = 1.0 / static_cast<double>(counts[c]);
        double* row = cents.row(c);
        for (std::size_t k = 0; k < d; ++k) row[k] = sums[c * d + k] * inv;
      }
      if (cfg.reinit_empty) {
        result.reinitialized += reinit_empty_clusters(*data, cents, current.label,
                                                      counts, all_indices);
      }
    } else {
      // Partial Fisher-Yates: the first batch_size entries form the batch.
      const std::size_t b = cfg.batch_size;
      for (std::size_t i = 0; i < b; ++i) {
        std::uniform_int_distribution<std::size_t> u(i, n - 1);
        std::swap(perm[i], perm[u(rng)]);
      }
      std::vector<std::size_t> idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(b));
      batch.label.resize(b);
      batch.dist.resize(b);
      parallel_for(b, cfg.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
          const auto [c, dist] = cents.nearest(data->row(idx[j]));
          batch.label[j] = c;
          batch.dist[j] = dist;
        }
      });
      for (std::size_t j = 0; j < b; ++j) {
        const auto c = batch.label[j];
        ++counts[c];
        const double eta = 1.0 / static_cast<double>(counts[c]);
        const auto x = data->row(idx[j]);
        double* row = cents.row(c);
        for (std::size_t k = 0; k < d; ++k) row[k] += eta * (x[k] - row[k]);
      }
    }

    Assignment next;
    assign_all(*data, cents, cfg.threads, next);
    if (!full_batch && cfg.reinit_empty) {
      // A centroid can drift away from every point; such clusters are empty
      // over the whole data and restart on an anchor with a fresh count.
      std::vector<std::uint64_t> owned(cfg.k, 0);
      for (auto c : next.label) ++owned[c];
      const auto moved = reinit_empty_clusters(*data, cents, next.label, owned, all_indices);
      if (moved > 0) {
        result.reinitialized += moved;
        for (std::uint32_t c = 0; c < cfg.k; ++c) {
          if (owned[c] == 0) counts[c] = 1;
        }
        assign_all(*data, cents, cfg.threads, next);
      }
    }
    const double inertia = mean_of(next.dist);
    result.inertia_trace.push_back(inertia);
    result.iterations = iter + 1;

    const bool unchanged = full_batch && next.label == current.label;
    current = std::move(next);
    const double rel = prev_inertia > 0.0
                           ? (prev_inertia - inertia) / prev_inertia
                           : 0.0;
    prev_inertia = inertia;
    if (inertia == 0.0 || unchanged || std::abs(rel) < cfg.tol) {
      result.converged = true;
      break;
    }
  }

  result.centroids = cents.to_codebook();
  return result;
}

KMeansResult kmeans_fit(std::span<const FeatureMap> data, const KMeansConfig& cfg) {
  return kmeans_fit(pool_vectors(data), cfg);
}

Codebook build_cluster_tokenizer(std::span<const FeatureMap> data,
                                 const KMeansConfig& cfg) {
  return kmeans_fit(data, cfg).centroids;
}

}  // namespace vqtk
