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

#include "vqtk/metrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {
namespace {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<const Matrix>;

std::vector<double> to_vector(const Matrix& m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

// Eigenvalues within kPsdSlack below zero are clamped; worse ones are errors.
Matrix clamp_psd(const GaussianStats& s, const char* which) {
  const Matrix cov = MatrixMap(s.covariance.data(), s.dim, s.dim);
  const Matrix sym = 0.5 * (cov + cov.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence,
                std::string("eigendecomposition failed for ") + which);
  }
  Eigen::VectorXd lambda = eig.eigenvalues();
  bool clamped = false;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < -kPsdSlack) {
      throw Error(ErrorCode::NotPsd, std::string(which) +
                                         " covariance has eigenvalue " +
                                         std::to_string(lambda[i]));
    }
    if (lambda[i] < 0.0) {
      lambda[i] = 0.0;
      clamped = true;
    }
  }
  if (!clamped) return sym;
  const Matrix& v = eig.eigenvectors();
  Matrix out = v * lambda.asDiagonal() * v.transpose();
  return 0.5 * (out + out.transpose());
}

}  // namespace

std::vector<std::uint64_t> code_histogram(std::span<const TokenGrid> corpus,
                                          std::uint64_t vocab_size) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyInput, "empty token corpus");
  if (vocab_size == 0) throw Error(ErrorCode::InvalidArgument, "vocab size must be >= 1");
  std::vector<std::uint64_t> hist(vocab_size, 0);
  for (const auto& grid : corpus) {
    grid.validate(vocab_size);
    for (auto c : grid.codes()) ++hist[c];
  }
  return hist;
}

UsageReport codebook_usage(std::span<const TokenGrid> corpus,
                           std::uint64_t vocab_size) {
  const auto hist = code_histogram(corpus, vocab_size);
  UsageReport r;
  r.total = vocab_size;
  r.used = static_cast<std::uint64_t>(
      std::count_if(hist.begin(), hist.end(), [](auto n) { return n > 0; }));
  r.usage_percent = 100.0 * static_cast<double>(r.used) / static_cast<double>(r.total);
  return r;
}

double perplexity(const ProposalModel& model, std::span<const TokenGrid> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::EmptyInput, "empty token corpus");
  CompensatedSum log2_total;
  std::uint64_t tokens = 0;
  for (const auto& grid : corpus) {
    grid.validate(model.vocab_size());
    const auto seq = grid.codes();
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const double p = model.probability(seq.first(i), seq[i]);
      if (!(p > 0.0)) {
        throw Error(ErrorCode::ZeroProbability,
                    "code " + std::to_string(seq[i]) + " has zero probability");
      }
      log2_total.add(std::log2(p));
    }
    tokens += seq.size();
  }
  return std::exp2(-log2_total.value() / static_cast<double>(tokens));
}

GaussianStats gaussian_stats(const VectorSet& vectors) {
  const std::size_t n = vectors.count();
  const std::size_t d = vectors.dim;
  if (n < 2) {
    throw Error(ErrorCode::InsufficientData,
                "Gaussian statistics need at least 2 vectors, got " + std::to_string(n));
  }
  std::vector<double> mean(d, 0.0);
  {
    std::vector<CompensatedSum> acc(d);
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = vectors.row(i);
      for (std::size_t k = 0; k < d; ++k) acc[k].add(x[k]);
    }
    for (std::size_t k = 0; k < d; ++k) mean[k] = acc[k].value() / static_cast<double>(n);
  }
  Matrix centered(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = vectors.row(i);
    for (std::size_t k = 0; k < d; ++k) centered(i, k) = x[k] - mean[k];
  }
  Matrix cov = Matrix::Zero(d, d);
  cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
  cov /= static_cast<double>(n - 1);
  // Mirror the lower triangle so the result is exactly symmetric.
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) cov(i, j) = cov(j, i);
  }
  return GaussianStats(d, std::move(mean), to_vector(cov), n);
}

GaussianStats gaussian_stats(std::span<const FeatureMap> maps) {
  return gaussian_stats(pool_vectors(maps));
}

MatrixSqrt matrix_sqrt_newton_schulz(std::span<const double> a, std::size_t n) {
  if (a.size() != n * n) throw Error(ErrorCode::ShapeMismatch, "matrix must be n x n");
  const Matrix target = MatrixMap(a.data(), n, n);
  const double scale = target.norm();
  MatrixSqrt out;
  if (scale == 0.0) {
    out.values.assign(n * n, 0.0);
    return out;
  }
  const Matrix eye = Matrix::Identity(n, n);
  Matrix y = target / scale;
  Matrix z = eye;
  const double root = std::sqrt(scale);

  auto residual = [&](const Matrix& m) { return (m * m - target).norm() / scale; };

  Matrix best = y * root;
  double best_res = residual(best);
  std::uint32_t best_iter = 0;
  for (std::uint32_t it = 1; it <= kMaxSqrtIterations; ++it) {
    const Matrix t = 0.5 * (3.0 * eye - z * y);
    const Matrix y_next = y * t;
    z = t * z;
    const double change = (y_next - y).norm() / std::max(y_next.norm(), 1e-300);
    y = y_next;
    const Matrix m = y * root;
    const double res = residual(m);
    if (!std::isfinite(res)) break;
    if (res < best_res) {
      best = m;
      best_res = res;
      best_iter = it;
    } else if (res > 1e3 * best_res && best_res < kMaxSqrtResidual) {
      // Rounding in null directions has started to amplify; keep the best.
      break;
    }
    if (change <= 1e-15) break;
  }
  if (!(best_res <= kMaxSqrtResidual)) {
    throw Error(ErrorCode::NonConvergence,
                "Newton-Schulz square root did not converge (relative residual " +
                    std::to_string(best_res) + ")");
  }
  out.values = to_vector(best);
  out.iterations = best_iter;
  out.relative_residual = best_res;
  return out;
}

FrechetTerms frechet_terms(const GaussianStats& a, const GaussianStats& b) {
  if (a.dim != b.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "statistics dims differ: " + std::to_string(a.dim) + " vs " +
                    std::to_string(b.dim));
  }
  const std::size_t d = a.dim;
  const Matrix s1 = clamp_psd(a, "first");
  const Matrix s2 = clamp_psd(b, "second");
  const Matrix prod = s1 * s2;

  FrechetTerms out;
  out.product = to_vector(prod);
  out.sqrt_product = matrix_sqrt_newton_schulz(out.product, d);
  const MatrixMap root(out.sqrt_product.values.data(), d, d);

  CompensatedSum mean_term;
  for (std::size_t k = 0; k < d; ++k) {
    const double diff = a.mean[k] - b.mean[k];
    mean_term.add(diff * diff);
  }
  out.mean_term = mean_term.value();
  // (S S)^(1/2) = S exactly for PSD S, so equal covariances cancel.
  out.trace_term = s1 == s2 ? 0.0 : s1.trace() + s2.trace() - 2.0 * root.trace();
  double dist = out.mean_term + out.trace_term;
  if (dist < 0.0) {
    if (dist < -1e-6) {
      throw Error(ErrorCode::NonConvergence,
                  "Frechet distance evaluated to " + std::to_string(dist));
    }
    dist = 0.0;
  }
  out.distance = dist;
  return out;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
  return frechet_terms(a, b).distance;
}

ProbMatrix::ProbMatrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (rows_ == 0 || cols_ == 0) {
    throw Error(ErrorCode::EmptyInput, "probability matrix is empty");
  }
  if (values_.size() != rows_ * cols_) {
    throw Error(ErrorCode::ShapeMismatch, "probability matrix size mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    CompensatedSum s;
    for (double p : row(r)) {
      if (!std::isfinite(p) || p < 0.0) {
        throw Error(ErrorCode::NotStochastic,
                    "row " + std::to_string(r) + " has a negative or non-finite entry");
      }
      s.add(p);
    }
    if (std::abs(s.value() - 1.0) > 1e-9) {
      throw Error(ErrorCode::NotStochastic,
                  "row " + std::to_string(r) + " sums to " + std::to_string(s.value()));
    }
  }
}

double inception_score(const ProbMatrix& probs) {
  const std::size_t n = probs.rows();
  const std::size_t k = probs.cols();
  std::vector<double> marginal(k);
  for (std::size_t j = 0; j < k; ++j) {
    CompensatedSum s;
    for (std::size_t r = 0; r < n; ++r) s.add(probs.row(r)[j]);
    marginal[j] = s.value() / static_cast<double>(n);
  }
  std::vector<double> kl(n);
  for (std::size_t r = 0; r < n; ++r) {
    CompensatedSum s;
    const auto p = probs.row(r);
    for (std::size_t j = 0; j < k; ++j) {
      if (p[j] > 0.0) s.add(p[j] * (std::log(p[j]) - std::log(marginal[j])));
    }
    kl[r] = s.value();
  }
  return std::exp(pairwise_sum(kl) / static_cast<double>(n));
}

CodebookProjection export_codebook_projection(
    const Codebook& book, std::optional<std::span<const std::uint64_t>> usage) {
  const std::size_t n = book.size();
  const std::size_t d = book.dim();
  if (d < 2) {
    throw Error(ErrorCode::InvalidShape, "projection needs codebook dim >= 2");
  }
  if (usage && usage->size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "usage counts must have one entry per code");
  }
  Matrix rows(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    const auto r = book.row(static_cast<std::uint32_t>(i));
    for (std::size_t k = 0; k < d; ++k) rows(i, k) = r[k];
  }
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Matrix centered = rows.rowwise() - mean;
  const Matrix cov = (centered.transpose() * centered) / static_cast<double>(n);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::NonConvergence, "codebook eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues.
  CodebookProjection out;
  for (Eigen::Index i = static_cast<Eigen::Index>(d) - 1; i >= 0; --i) {
    out.eigenvalues.push_back(std::max(0.0, eig.eigenvalues()[i]));
  }
  Matrix basis(d, 2);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd v = eig.eigenvectors().col(static_cast<Eigen::Index>(d) - 1 - c);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0.0) v = -v;
    basis.col(c) = v;
  }
  const double total = std::accumulate(out.eigenvalues.begin(), out.eigenvalues.end(), 0.0);
  out.variance_share =
      total > 0.0 ? (out.eigenvalues[0] + out.eigenvalues[1]) / total : 0.0;

  const Matrix coords = centered * basis;
  out.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.rows.push_back(ProjectionRow{static_cast<std::uint32_t>(i),
                                     usage ? (*usage)[i] : 0, coords(i, 0),
                                     coords(i, 1)});
  }
  return out;
}

std::string projection_csv(const CodebookProjection& proj) {
  std::string out = "code,usage,pc1,pc2\n";
  char line[128];
  for (const auto& r : proj.rows) {
    std::snprintf(line, sizeof(line), "%u,%llu,%.9g,%.9g\n", r.code,
                  static_cast<unsigned long long>(r.usage), r.pc1, r.pc2);
    out += line;
  }
  return out;
}

}  // namespace vqtk
