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

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace vqtk {

/// An h x w grid of d-dimensional vectors, stored row-major as
/// (row, column, channel). All values are finite. Immutable once built.
class FeatureMap {
 public:
  FeatureMap(std::uint32_t height, std::uint32_t width, std::uint32_t dim,
             std::vector<float> data);

  static FeatureMap zeros(std::uint32_t height, std::uint32_t width,
                          std::uint32_t dim);

  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t width() const noexcept { return width_; }
  std::uint32_t dim() const noexcept { return dim_; }
  /// Number of spatial positions, h * w.
  std::size_t positions() const noexcept {
    return std::size_t{height_} * width_;
  }

  std::span<const float> data() const noexcept { return data_; }
  /// Vector at flat position `pos` (raster order).
  std::span<const float> vector(std::size_t pos) const noexcept {
    return std::span<const float>(data_).subspan(pos * dim_, dim_);
  }
  std::span<const float> at(std::uint32_t row, std::uint32_t col) const noexcept {
    return vector(std::size_t{row} * width_ + col);
  }

  bool same_shape(const FeatureMap& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           dim_ == other.dim_;
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;

 private:
  std::uint32_t height_;
  std::uint32_t width_;
  std::uint32_t dim_;
  std::vector<float> data_;
};

/// N code vectors of dimension d.
class Codebook {
 public:
  Codebook(std::uint32_t size, std::uint32_t dim, std::vector<float> vectors);

  std::uint32_t size() const noexcept { return size_; }
  std::uint32_t dim() const noexcept { return dim_; }
  std::span<const float> data() const noexcept { return vectors_; }
  std::span<const float> row(std::uint32_t code) const noexcept {
    return std::span<const float>(vectors_).subspan(std::size_t{code} * dim_, dim_);
  }

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  std::uint32_t size_;
  std::uint32_t dim_;
  std::vector<float> vectors_;
};

/// An h x w grid of zero-based codes in raster order.
class TokenGrid {
 public:
  TokenGrid(std::uint32_t height, std::uint32_t width,
            std::vector<std::uint32_t> codes);

  std::uint32_t height() const noexcept { return height_; }
  std::uint32_t width() const noexcept { return width_; }
  std::size_t length() const noexcept { return codes_.size(); }
  std::span<const std::uint32_t> codes() const noexcept { return codes_; }
  std::uint32_t at(std::uint32_t row, std::uint32_t col) const noexcept {
    return codes_[std::size_t{row} * width_ + col];
  }

  /// Throws CodeOutOfRange if any code is >= vocab_size.
  void validate(std::uint64_t vocab_size) const;

  friend bool operator==(const TokenGrid&, const TokenGrid&) = default;

 private:
  std::uint32_t height_;
  std::uint32_t width_;
  std::vector<std::uint32_t> codes_;
};

/// Mean, unbiased covariance (row-major dim x dim) and sample count of a
/// vector population.
struct GaussianStats {
  GaussianStats(std::size_t dim, std::vector<double> mean,
                std::vector<double> covariance, std::size_t count);

  std::size_t dim;
  std::vector<double> mean;
  std::vector<double> covariance;
  std::size_t count;

  double cov(std::size_t i, std::size_t j) const noexcept {
    return covariance[i * dim + j];
  }
};

struct QuantizeOutput {
  TokenGrid tokens;
  /// Row (i, j) is the code vector selected for position (i, j).
  FeatureMap code_vectors;
  /// Mean over positions of the squared distance to the selected vector.
  double quant_error = 0.0;
};

/// A flat list of equal-length vectors, e.g. every position of several maps.
struct VectorSet {
  std::uint32_t dim = 0;
  std::vector<float> values;

  std::size_t count() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
  std::span<const float> row(std::size_t i) const noexcept {
    return std::span<const float>(values).subspan(i * dim, dim);
  }
};

/// Concatenates all positions of `maps` in order. Throws EmptyInput for no
/// maps and DimensionMismatch when dims disagree.
VectorSet pool_vectors(std::span<const FeatureMap> maps);

/// Compares float payloads bit for bit, so -0.0 and 0.0 differ.
bool bitwise_equal(const FeatureMap& a, const FeatureMap& b) noexcept;
bool bitwise_equal(const Codebook& a, const Codebook& b) noexcept;

}  // namespace vqtk
