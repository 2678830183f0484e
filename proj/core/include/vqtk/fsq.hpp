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
#include <span>
#include <string_view>
#include <vector>

#include "vqtk/types.hpp"

namespace vqtk {

/// Per-channel level counts of a finite scalar quantizer. The implied
/// codebook has prod(levels) entries, at most 2^32 so flat codes fit in u32.
class FsqLevels {
 public:
  explicit FsqLevels(std::vector<std::uint32_t> levels);

  /// Parses a comma-separated list such as "8,8,5,5,5".
  static FsqLevels parse(std::string_view text);

  std::span<const std::uint32_t> levels() const noexcept { return levels_; }
  std::uint32_t channels() const noexcept {
    return static_cast<std::uint32_t>(levels_.size());
  }
  std::uint64_t codebook_size() const noexcept { return codebook_size_; }

  friend bool operator==(const FsqLevels&, const FsqLevels&) = default;

 private:
  std::vector<std::uint32_t> levels_;
  std::uint64_t codebook_size_ = 1;
};

/// Digit in [0, levels) selected for a scalar input: the input is bounded with
/// tanh, scaled to the level grid and rounded half away from zero. Odd counts
/// use the integer grid {-h..h} with h = levels / 2; even counts use the
/// half-integer grid with half-width levels / 2 - 0.5.
std::uint32_t fsq_digit(float x, std::uint32_t levels) noexcept;

/// Real value in [-1, 1] of a digit on its channel's grid.
float fsq_level_value(std::uint32_t digit, std::uint32_t levels) noexcept;

/// Quantizes every channel independently. Tokens hold the packed flat codes,
/// code_vectors the per-channel grid values.
QuantizeOutput fsq_quantize(const FeatureMap& map, const FsqLevels& levels,
                            unsigned threads = 1);

/// Mixed-radix packing with channel 0 least significant.
std::uint32_t fsq_pack(std::span<const std::uint32_t> digits,
                       const FsqLevels& levels);

std::vector<std::uint32_t> fsq_unpack(std::uint64_t flat, const FsqLevels& levels);

/// Materializes the implicit codebook: row c holds the grid values of
/// fsq_unpack(c). Refuses level sets above kMaxImpliedRows entries.
inline constexpr std::uint64_t kMaxImpliedRows = std::uint64_t{1} << 24;
Codebook fsq_implied_codebook(const FsqLevels& levels);

}  // namespace vqtk
