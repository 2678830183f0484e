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
#include <limits>
#include <span>
#include <vector>

#include "vqtk/types.hpp"

namespace vqtk {

struct KMeansConfig {
  /// Number of centroids, i.e. the codebook size.
  std::uint32_t k = 8;
  std::uint32_t max_iters = 100;
  /// Vectors sampled per mini-batch step. A value >= the pooled vector count
  /// selects full-batch Lloyd iterations.
  std::size_t batch_size = std::numeric_limits<std::size_t>::max();
  std::uint64_t seed = 0;
  /// Stop once the relative inertia change of an iteration drops below tol.
  double tol = 1e-4;
  /// Move empty clusters onto the point farthest from its centroid.
  bool reinit_empty = true;
  /// L2-normalize every vector before clustering.
  bool normalize = false;
  unsigned threads = 1;

  void validate() const;
};

struct KMeansResult {
  Codebook centroids;
  /// Mean squared distance of all vectors to their nearest centroid, after
  /// each iteration.
  std::vector<double> inertia_trace;
  std::uint32_t iterations = 0;
  bool converged = false;
  /// Total empty-cluster reinitializations.
  std::uint32_t reinitialized = 0;
};

/// k-means++ seeding followed by Lloyd (full batch) or mini-batch updates with
/// per-centroid 1/count learning rates. Assignment runs in parallel; all
/// accumulation happens in a fixed order, so the result is bitwise identical
/// for any thread count.
KMeansResult kmeans_fit(const VectorSet& data, const KMeansConfig& cfg);
KMeansResult kmeans_fit(std::span<const FeatureMap> data, const KMeansConfig& cfg);

/// Codebook of a frozen cluster tokenizer: the k-means centroids of the
/// given features. Tokenize against it with vq_quantize.
Codebook build_cluster_tokenizer(std::span<const FeatureMap> data,
                                 const KMeansConfig& cfg);

/// Scales every vector to unit L2 norm; zero vectors raise ZeroNorm.
void normalize_rows(VectorSet& data);

}  // namespace vqtk
