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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vqtk/proposal.hpp"
#include "vqtk/types.hpp"

namespace vqtk {

// ---------------------------------------------------------------------------
// Codebook usage

struct UsageReport {
  std::uint64_t used = 0;
  std::uint64_t total = 0;
  /// 100 * used / total.
  double usage_percent = 0.0;
};

/// Per-code occurrence counts over a corpus.
std::vector<std::uint64_t> code_histogram(std::span<const TokenGrid> corpus,
                                          std::uint64_t vocab_size);

/// Fraction of the vocabulary that appears at least once in the corpus.
UsageReport codebook_usage(std::span<const TokenGrid> corpus,
                           std::uint64_t vocab_size);

// ---------------------------------------------------------------------------
// Perplexity

/// exp(-(1/L) sum log p(z_i | z_<i)) pooled over every grid of the corpus,
/// each grid scored as its own raster-order sequence. Evaluated in base 2,
/// which gives exact powers of two for uniform models over 2^k codes.
double perplexity(const ProposalModel& model, std::span<const TokenGrid> corpus);

// ---------------------------------------------------------------------------
// Frechet distance between Gaussian fits

/// Sample mean and unbiased covariance. Needs at least two vectors.
GaussianStats gaussian_stats(const VectorSet& vectors);
GaussianStats gaussian_stats(std::span<const FeatureMap> maps);

struct MatrixSqrt {
  /// Row-major n x n square root.
  std::vector<double> values;
  std::uint32_t iterations = 0;
  /// ||M M - A||_F / ||A||_F (0 when A is zero).
  double relative_residual = 0.0;
};

inline constexpr std::uint32_t kMaxSqrtIterations = 100;
inline constexpr double kMaxSqrtResidual = 1e-6;

/// Principal square root of a matrix with nonnegative real spectrum by the
/// coupled Newton-Schulz iteration, after scaling A by its Frobenius norm.
/// Raises NonConvergence if the residual stays above kMaxSqrtResidual.
MatrixSqrt matrix_sqrt_newton_schulz(std::span<const double> a, std::size_t n);

/// Covariances whose eigenvalues dip below zero by no more than this are
/// clamped to PSD; anything more negative raises NotPsd.
inline constexpr double kPsdSlack = 1e-8;

/// ||mu1 - mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^(1/2)). Results in [-1e-6, 0)
/// are clamped to zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

/// Both covariances after the PSD clamp, their product, and its square root.
struct FrechetTerms {
  double mean_term = 0.0;
  double trace_term = 0.0;
  double distance = 0.0;
  MatrixSqrt sqrt_product;
  std::vector<double> product;
};
FrechetTerms frechet_terms(const GaussianStats& a, const GaussianStats& b);

// ---------------------------------------------------------------------------
// Inception-score style diversity

/// A row-stochastic matrix of class probabilities, one row per sample.
class ProbMatrix {
 public:
  ProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::span<const double> row(std::size_t r) const noexcept {
    return std::span<const double>(values_).subspan(r * cols_, cols_);
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

/// exp(mean_x KL(p(y|x) || p(y))) with p(y) the column mean. >= 1.
double inception_score(const ProbMatrix& probs);

// ---------------------------------------------------------------------------
// Codebook projection export

struct ProjectionRow {
  std::uint32_t code = 0;
  std::uint64_t usage = 0;
  double pc1 = 0.0;
  double pc2 = 0.0;
};

struct CodebookProjection {
  std::vector<ProjectionRow> rows;
  /// All eigenvalues of the row covariance, descending.
  std::vector<double> eigenvalues;
  /// (lambda_1 + lambda_2) / sum(lambda).
  double variance_share = 0.0;
};

/// Projects codebook rows onto their top two principal components. Each
/// component's largest-magnitude entry is made positive. `usage` supplies
/// per-code counts (e.g. code_histogram) and defaults to zeros.
CodebookProjection export_codebook_projection(
    const Codebook& book,
    std::optional<std::span<const std::uint64_t>> usage = std::nullopt);

/// "code,usage,pc1,pc2" header plus one line per code.
std::string projection_csv(const CodebookProjection& proj);

}  // namespace vqtk
