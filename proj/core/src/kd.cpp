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

#include "vqtk/kd.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "vqtk/error.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {
namespace {

struct Moments {
  double dot = 0.0;
  double rr = 0.0;
  double tt = 0.0;
};

Moments moments(std::span<const float> r, std::span<const float> t) noexcept {
  Moments m;
  for (std::size_t k = 0; k < r.size(); ++k) {
    const double a = r[k];
    const double b = t[k];
    m.dot += a * b;
    m.rr += a * a;
    m.tt += b * b;
  }
  return m;
}

void require_nonzero(const Moments& m, std::size_t pos) {
  if (std::sqrt(m.rr) <= kMinCosineNorm || std::sqrt(m.tt) <= kMinCosineNorm) {
    throw Error(ErrorCode::ZeroNorm,
                "near-zero vector norm at position " + std::to_string(pos));
  }
}

double cosine(const Moments& m) noexcept {
  return std::clamp(m.dot / std::sqrt(m.rr * m.tt), -1.0, 1.0);
}

void require_same_shape(const FeatureMap& recon, const FeatureMap& teacher) {
  if (!recon.same_shape(teacher)) {
    throw Error(ErrorCode::ShapeMismatch,
                "reconstruction and teacher maps differ in shape");
  }
}

}  // namespace

CosineMode parse_cosine_mode(std::string_view text) {
  if (text == "per-position") return CosineMode::PerPosition;
  if (text == "flat") return CosineMode::Flat;
  throw Error(ErrorCode::InvalidArgument,
              "cosine mode must be 'flat' or 'per-position', got '" +
                  std::string(text) + "'");
}

double kd_loss(const FeatureMap& recon, const FeatureMap& teacher,
               CosineMode mode) {
  require_same_shape(recon, teacher);
  if (mode == CosineMode::Flat) {
    const auto m = moments(recon.data(), teacher.data());
    require_nonzero(m, 0);
    return -cosine(m);
  }
  const std::size_t n = recon.positions();
  std::vector<double> cos(n);
  for (std::size_t p = 0; p < n; ++p) {
    const auto m = moments(recon.vector(p), teacher.vector(p));
    require_nonzero(m, p);
    cos[p] = cosine(m);
  }
  return -pairwise_sum(cos) / static_cast<double>(n);
}

FeatureMap kd_loss_gradient(const FeatureMap& recon, const FeatureMap& teacher,
                            CosineMode mode) {
  require_same_shape(recon, teacher);
  std::vector<float> grad(recon.data().size());

  // d(-cos)/dr = -(t / (|r||t|) - cos * r / |r|^2), scaled by `weight`.
  auto fill = [&](std::span<const float> r, std::span<const float> t,
                  const Moments& m, double weight, std::size_t offset) {
    const double inv_norms = 1.0 / std::sqrt(m.rr * m.tt);
    const double c = m.dot * inv_norms;
    for (std::size_t k = 0; k < r.size(); ++k) {
      const double g = -(t[k] * inv_norms - c * r[k] / m.rr);
      grad[offset + k] = static_cast<float>(weight * g);
    }
  };

  if (mode == CosineMode::Flat) {
    const auto m = moments(recon.data(), teacher.data());
    require_nonzero(m, 0);
    fill(recon.data(), teacher.data(), m, 1.0, 0);
  } else {
    const std::size_t n = recon.positions();
    const double weight = 1.0 / static_cast<double>(n);
    for (std::size_t p = 0; p < n; ++p) {
      const auto m = moments(recon.vector(p), teacher.vector(p));
      require_nonzero(m, p);
      fill(recon.vector(p), teacher.vector(p), m, weight, p * recon.dim());
    }
  }
  return FeatureMap(recon.height(), recon.width(), recon.dim(), std::move(grad));
}

}  // namespace vqtk
