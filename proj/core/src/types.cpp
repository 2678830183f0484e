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

#include "vqtk/types.hpp"

#include <cmath>
#include <cstring>
#include <initializer_list>
#include <limits>
#include <string>

#include "vqtk/error.hpp"

namespace vqtk {
namespace {

void require_finite(std::span<const float> values, const char* what) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error(ErrorCode::NonFinite, std::string(what) +
                                            " has non-finite value at index " +
                                            std::to_string(i));
    }
  }
}

std::size_t checked_product(std::initializer_list<std::uint64_t> dims,
                            const char* what) {
  std::uint64_t total = 1;
  for (auto d : dims) {
    if (d == 0) {
      throw Error(ErrorCode::InvalidShape,
                  std::string(what) + " has a zero dimension");
    }
    if (total > std::numeric_limits<std::size_t>::max() / d) {
      throw Error(ErrorCode::DimensionOverflow,
                  std::string(what) + " element count overflows");
    }
    total *= d;
  }
  return static_cast<std::size_t>(total);
}

bool same_bits(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() &&
         (a.empty() || std::memcmp(a.data(), b.data(), a.size_bytes()) == 0);
}

}  // namespace

FeatureMap::FeatureMap(std::uint32_t height, std::uint32_t width,
                       std::uint32_t dim, std::vector<float> data)
    : height_(height), width_(width), dim_(dim), data_(std::move(data)) {
  const auto n = checked_product({height, width, dim}, "feature map");
  if (data_.size() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "feature map expects " + std::to_string(n) + " values, got " +
                    std::to_string(data_.size()));
  }
  require_finite(data_, "feature map");
}

FeatureMap FeatureMap::zeros(std::uint32_t height, std::uint32_t width,
                             std::uint32_t dim) {
  const auto n = checked_product({height, width, dim}, "feature map");
  return FeatureMap(height, width, dim, std::vector<float>(n, 0.0f));
}

Codebook::Codebook(std::uint32_t size, std::uint32_t dim,
                   std::vector<float> vectors)
    : size_(size), dim_(dim), vectors_(std::move(vectors)) {
  const auto n = checked_product({size, dim}, "codebook");
  if (vectors_.size() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "codebook expects " + std::to_string(n) + " values, got " +
                    std::to_string(vectors_.size()));
  }
  require_finite(vectors_, "codebook");
}

TokenGrid::TokenGrid(std::uint32_t height, std::uint32_t width,
                     std::vector<std::uint32_t> codes)
    : height_(height), width_(width), codes_(std::move(codes)) {
  const auto n = checked_product({height, width}, "token grid");
  if (codes_.size() != n) {
    throw Error(ErrorCode::ShapeMismatch,
                "token grid expects " + std::to_string(n) + " codes, got " +
                    std::to_string(codes_.size()));
  }
}

void TokenGrid::validate(std::uint64_t vocab_size) const {
  for (std::size_t i = 0; i < codes_.size(); ++i) {
    if (codes_[i] >= vocab_size) {
      throw Error(ErrorCode::CodeOutOfRange,
                  "code " + std::to_string(codes_[i]) + " at position " +
                      std::to_string(i) + " is outside [0, " +
                      std::to_string(vocab_size) + ")");
    }
  }
}

GaussianStats::GaussianStats(std::size_t dim_, std::vector<double> mean_,
                             std::vector<double> covariance_,
                             std::size_t count_)
    : dim(dim_),
      mean(std::move(mean_)),
      covariance(std::move(covariance_)),
      count(count_) {
  if (dim == 0) throw Error(ErrorCode::InvalidShape, "stats dim is zero");
  if (mean.size() != dim || covariance.size() != dim * dim) {
    throw Error(ErrorCode::ShapeMismatch, "stats mean/covariance size mismatch");
  }
  if (count < 2) {
    throw Error(ErrorCode::InsufficientData, "stats need at least 2 samples");
  }
  for (double v : mean) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "stats mean");
  }
  for (double v : covariance) {
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "stats covariance");
  }
  for (std::size_t i = 0; i < dim; ++i) {
    if (cov(i, i) < 0.0) {
      throw Error(ErrorCode::NotPsd, "negative variance on diagonal entry " +
                                         std::to_string(i));
    }
    for (std::size_t j = i + 1; j < dim; ++j) {
      if (std::abs(cov(i, j) - cov(j, i)) > 1e-8) {
        throw Error(ErrorCode::NotSymmetric,
                    "covariance asymmetric at (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
    }
  }
}

VectorSet pool_vectors(std::span<const FeatureMap> maps) {
  if (maps.empty()) throw Error(ErrorCode::EmptyInput, "no feature maps given");
  VectorSet out;
  out.dim = maps.front().dim();
  std::size_t total = 0;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    if (maps[i].dim() != out.dim) {
      throw Error(ErrorCode::DimensionMismatch,
                  "feature map " + std::to_string(i) + " has dim " +
                      std::to_string(maps[i].dim()) + ", expected " +
                      std::to_string(out.dim));
    }
    total += maps[i].data().size();
  }
  out.values.reserve(total);
  for (const auto& m : maps) {
    out.values.insert(out.values.end(), m.data().begin(), m.data().end());
  }
  return out;
}

bool bitwise_equal(const FeatureMap& a, const FeatureMap& b) noexcept {
  return a.same_shape(b) && same_bits(a.data(), b.data());
}

bool bitwise_equal(const Codebook& a, const Codebook& b) noexcept {
  return a.size() == b.size() && a.dim() == b.dim() &&
         same_bits(a.data(), b.data());
}

}  // namespace vqtk
