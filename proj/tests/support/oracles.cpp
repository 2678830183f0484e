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

#include "oracles.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

namespace vqtk_test {

namespace {

std::vector<float> uniform_values(Rng& rng, std::size_t n, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(u(rng));
  return v;
}

std::vector<float> grid_values(Rng& rng, std::size_t n) {
  std::uniform_int_distribution<int> u(-8, 8);
  std::vector<float> v(n);
  for (auto& x : v) x = static_cast<float>(u(rng)) * 0.25f;
  return v;
}

}  // namespace

vqtk::FeatureMap random_map(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t d,
                            double lo, double hi) {
  return vqtk::FeatureMap(h, w, d, uniform_values(rng, std::size_t{h} * w * d, lo, hi));
}

vqtk::Codebook random_book(Rng& rng, std::uint32_t n, std::uint32_t d, double lo,
                           double hi) {
  return vqtk::Codebook(n, d, uniform_values(rng, std::size_t{n} * d, lo, hi));
}

vqtk::FeatureMap grid_map(Rng& rng, std::uint32_t h, std::uint32_t w, std::uint32_t d) {
  return vqtk::FeatureMap(h, w, d, grid_values(rng, std::size_t{h} * w * d));
}

vqtk::Codebook grid_book(Rng& rng, std::uint32_t n, std::uint32_t d) {
  return vqtk::Codebook(n, d, grid_values(rng, std::size_t{n} * d));
}

std::uint32_t brute_force_nearest(const float* x, const vqtk::Codebook& book) {
  std::vector<double> dist(book.size());
  for (std::uint32_t c = 0; c < book.size(); ++c) {
    const auto row = book.row(c);
    double s = 0.0;
    for (std::uint32_t k = 0; k < book.dim(); ++k) {
      const double diff = static_cast<double>(x[k]) - static_cast<double>(row[k]);
      s += diff * diff;
    }
    dist[c] = s;
  }
  double best = std::numeric_limits<double>::infinity();
  for (double v : dist) best = std::min(best, v);
  for (std::uint32_t c = 0; c < book.size(); ++c) {
    if (dist[c] == best) return c;
  }
  return 0;
}

double relative_error(const Vec& a, const Vec& b, double floor) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

Vec to_vec(std::span<const float> v) { return Vec(v.begin(), v.end()); }

double commitment_term(const Vec& x, const Vec& selected, std::size_t dim, double beta) {
  const std::size_t n = x.size() / dim;
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - selected[i]) * (x[i] - selected[i]);
  return beta * s / static_cast<double>(n);
}

double codebook_term(const Vec& book, const Vec& x, const std::vector<std::uint32_t>& codes,
                     std::size_t dim) {
  double s = 0.0;
  for (std::size_t p = 0; p < codes.size(); ++p) {
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = x[p * dim + k] - book[codes[p] * dim + k];
      s += diff * diff;
    }
  }
  return s / static_cast<double>(codes.size());
}

double neg_cosine(const Vec& r, const Vec& t, std::size_t dim) {
  const std::size_t n = r.size() / dim;
  double total = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    double rt = 0.0, rr = 0.0, tt = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      rt += r[p * dim + k] * t[p * dim + k];
      rr += r[p * dim + k] * r[p * dim + k];
      tt += t[p * dim + k] * t[p * dim + k];
    }
    total -= rt / (std::sqrt(rr) * std::sqrt(tt));
  }
  return total / static_cast<double>(n);
}

double fsq_value(double x, std::uint32_t levels) {
  const double b = std::tanh(x);
  if (levels % 2 == 1) {
    const double h = std::floor(levels / 2.0);
    return std::round(h * b) / h;
  }
  const double v = levels / 2.0 - 0.5;
  return (std::round(v * b + 0.5) - 0.5) / v;
}

std::uint64_t mixed_radix(const std::vector<std::uint32_t>& digits,
                          const std::vector<std::uint32_t>& levels) {
  std::uint64_t flat = 0;
  for (std::size_t k = digits.size(); k-- > 0;) flat = flat * levels[k] + digits[k];
  return flat;
}

double naive_inception_score(const std::vector<Vec>& rows) {
  const std::size_t n = rows.size();
  const std::size_t k = rows.front().size();
  Vec marginal(k, 0.0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < k; ++c) marginal[c] += r[c] / static_cast<double>(n);
  }
  double kl_sum = 0.0;
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < k; ++c) {
      if (r[c] > 0.0) kl_sum += r[c] * (std::log(r[c]) - std::log(marginal[c]));
    }
  }
  return std::exp(kl_sum / static_cast<double>(n));
}

double eigen_frechet(const Vec& m1, const Vec& s1, const Vec& m2, const Vec& s2,
                     std::size_t d) {
  using M = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  const M a = Eigen::Map<const M>(s1.data(), d, d);
  const M b = Eigen::Map<const M>(s2.data(), d, d);
  Eigen::SelfAdjointEigenSolver<M> ea(a);
  const Eigen::VectorXd la = ea.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const M root_a = ea.eigenvectors() * la.asDiagonal() * ea.eigenvectors().transpose();
  const M inner = root_a * b * root_a;
  Eigen::SelfAdjointEigenSolver<M> ei(0.5 * (inner + inner.transpose()));
  double tr_sqrt = 0.0;
  for (Eigen::Index i = 0; i < ei.eigenvalues().size(); ++i) {
    tr_sqrt += std::sqrt(std::max(0.0, ei.eigenvalues()[i]));
  }
  double mean_term = 0.0;
  for (std::size_t i = 0; i < d; ++i) mean_term += (m1[i] - m2[i]) * (m1[i] - m2[i]);
  return mean_term + a.trace() + b.trace() - 2.0 * tr_sqrt;
}

Vec random_psd(Rng& rng, std::size_t d, std::size_t rank) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vec a(d * rank);
  for (auto& v : a) v = g(rng);
  Vec s(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < rank; ++k) acc += a[i * rank + k] * a[j * rank + k];
      s[i * d + j] = acc / static_cast<double>(d);
    }
  }
  return s;
}

void naive_moments(const std::vector<Vec>& rows, Vec& mean, Vec& cov) {
  const std::size_t n = rows.size();
  const std::size_t d = rows.front().size();
  mean.assign(d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < d; ++k) mean[k] += r[k];
  }
  for (auto& m : mean) m /= static_cast<double>(n);
  cov.assign(d * d, 0.0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) cov[i * d + j] += (r[i] - mean[i]) * (r[j] - mean[j]);
    }
  }
  for (auto& c : cov) c /= static_cast<double>(n - 1);
}

}  // namespace vqtk_test

namespace vqtk_test {

Vec symmetric_eigenvalues(Vec a, std::size_t n) {
  // Cyclic Jacobi rotations until the off-diagonal mass vanishes.
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) off += a[i * n + j] * a[i * n + j];
    }
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p], akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k], aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i * n + i];
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

}  // namespace vqtk_test
