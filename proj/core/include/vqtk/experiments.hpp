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
#include <string>
#include <string_view>
#include <vector>

#include "vqtk/cluster.hpp"
#include "vqtk/types.hpp"

namespace vqtk {

/// Synthetic "token world": every map is a raster sequence of latent
/// component labels drawn from a cyclic Markov chain (label c is followed by
/// c + 1 mod C with probability cycle_prob, otherwise by a uniformly chosen
/// other label), and each position holds that component's mean plus
/// isotropic Gaussian noise.
struct TokenWorldConfig {
  std::uint32_t components = 4;
  std::uint32_t dim = 8;
  /// When nonzero and below dim, components live in a random
  /// intrinsic_dim-dimensional subspace of the feature space.
  std::uint32_t intrinsic_dim = 0;
  std::uint32_t maps = 48;
  std::uint32_t heldout_maps = 16;
  std::uint32_t height = 8;
  std::uint32_t width = 8;
  /// Standard deviation of component means around the origin.
  double separation = 3.0;
  /// Within-component standard deviation.
  double noise = 1.0;
  /// Extra isotropic noise in all dims (only used with intrinsic_dim).
  double ambient_noise = 0.05;
  double cycle_prob = 0.9;

  void validate() const;
};

struct TokenWorld {
  std::vector<FeatureMap> train;
  std::vector<FeatureMap> heldout;
  /// Latent component label per position, aligned with `train`.
  std::vector<TokenGrid> train_labels;
  Codebook component_means;
};

TokenWorld generate_token_world(const TokenWorldConfig& cfg, std::uint64_t seed);

/// Codebook whose rows are drawn i.i.d. from a diagonal Gaussian matched to
/// the per-dimension mean and standard deviation of `data`.
Codebook random_codebook(const VectorSet& data, std::uint32_t size,
                         std::uint64_t seed);

enum class CodebookMethod { Cluster, VqEma, Random };
CodebookMethod parse_codebook_method(std::string_view text);
std::string_view to_string(CodebookMethod m) noexcept;

/// Everything a single (codebook, data) evaluation reports.
struct TokenizerReport {
  std::uint32_t codebook_size = 0;
  std::uint32_t dim = 0;
  double usage_percent = 0.0;
  /// Mean squared quantization error on the training features.
  double quant_error = 0.0;
  /// Frechet distance between training features and their reconstructions.
  double frechet_recon = 0.0;
  /// Held-out perplexity under an n-gram fitted on training tokens.
  double perplexity = 0.0;
  /// Frechet distance between held-out features and decoded samples.
  double frechet_generated = 0.0;
};

struct EvalConfig {
  std::uint32_t ngram_order = 2;
  double alpha = 1.0;
  unsigned threads = 1;
};

/// Tokenizes `train` and `heldout` with `book`, fits an n-gram on the
/// training tokens, samples as many grids as `train` holds and reports all
/// metrics. Sampling is seeded by `seed`.
TokenizerReport evaluate_tokenizer(const Codebook& book,
                                   const std::vector<FeatureMap>& train,
                                   const std::vector<FeatureMap>& heldout,
                                   const EvalConfig& cfg, std::uint64_t seed);

struct BuildConfig {
  CodebookMethod method = CodebookMethod::Cluster;
  std::uint32_t kmeans_iters = 100;
  std::size_t kmeans_batch = std::numeric_limits<std::size_t>::max();
  double kmeans_tol = 1e-4;
  std::uint32_t vq_epochs = 20;
  double vq_decay = 0.9;
  std::uint32_t vq_dead_threshold = 0;
  unsigned threads = 1;
};

/// Builds a codebook of `size` rows with the configured method.
Codebook build_codebook(const std::vector<FeatureMap>& train, std::uint32_t size,
                        const BuildConfig& cfg, std::uint64_t seed);

struct DemoConfig {
  TokenWorldConfig world;
  /// Matches the number of latent components by default.
  std::uint32_t codebook_size = 4;
  EvalConfig eval;
  std::uint32_t kmeans_iters = 100;
};

struct DemoResult {
  TokenizerReport cluster;
  TokenizerReport random;
  bool cluster_lower_ppl = false;
  bool cluster_lower_frechet = false;
};

/// Cluster-derived codebook versus a random codebook of equal size and
/// dimension on one seeded token world.
DemoResult run_demo(const DemoConfig& cfg, std::uint64_t seed);

struct SweepConfig {
  std::vector<std::uint32_t> sizes;
  std::vector<std::uint32_t> dims;
  TokenWorldConfig world;
  BuildConfig build;
  EvalConfig eval;
};

struct SweepRow {
  std::uint32_t codebook_size = 0;
  std::uint32_t dim = 0;
  TokenizerReport report;
};

/// One row per (size, dim) cell on token worlds generated from `seed`; the
/// world for a given dim is identical across sizes.
std::vector<SweepRow> run_sweep(const SweepConfig& cfg, std::uint64_t seed);

/// Sweep over codebook sizes on fixed user data.
std::vector<SweepRow> run_sweep_on(const std::vector<FeatureMap>& train,
                                   const std::vector<FeatureMap>& heldout,
                                   const SweepConfig& cfg, std::uint64_t seed);

std::string sweep_csv(const std::vector<SweepRow>& rows);

}  // namespace vqtk
