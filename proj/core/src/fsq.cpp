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

#include "vqtk/fsq.hpp"

#include <charconv>
#include <cmath>
#include <string>

#include "vqtk/error.hpp"
#include "vqtk/parallel.hpp"

namespace vqtk {

FsqLevels::FsqLevels(std::vector<std::uint32_t> levels)
    : levels_(std::move(levels)) {
  if (levels_.empty()) {
    throw Error(ErrorCode::InvalidArgument, "FSQ levels must be nonempty");
  }
  constexpr std::uint64_t kMax = std::uint64_t{1} << 32;
  for (auto l : levels_) {
    if (l < 2) throw Error(ErrorCode::InvalidArgument, "every FSQ level must be >= 2");
    codebook_size_ *= l;
    if (codebook_size_ > kMax) {
      throw Error(ErrorCode::DimensionOverflow,
                  "product of FSQ levels exceeds 2^32");
    }
  }
}

FsqLevels FsqLevels::parse(std::string_view text) {
  std::vector<std::uint32_t> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    const auto field = text.substr(start, end - start);
    std::uint32_t v = 0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (field.empty() || ec != std::errc{} || ptr != field.data() + field.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "bad FSQ level list '" + std::string(text) + "'");
    }
    out.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return FsqLevels(std::move(out));
}

std::uint32_t fsq_digit(float x, std::uint32_t levels) noexcept {
  const double t = std::tanh(static_cast<double>(x));
  if (levels % 2 == 1) {
    const double half = static_cast<double>(levels / 2);
    return static_cast<std::uint32_t>(std::round(half * t) + half);
  }
  const double half = static_cast<double>(levels) / 2.0 - 0.5;
  const double r = std::round(half * t + 0.5);
  return static_cast<std::uint32_t>(r + static_cast<double>(levels / 2 - 1));
}

float fsq_level_value(std::uint32_t digit, std::uint32_t levels) noexcept {
  if (levels % 2 == 1) {
    const double half = static_cast<double>(levels / 2);
    return static_cast<float>((static_cast<double>(digit) - half) / half);
  }
  const double half = static_cast<double>(levels) / 2.0 - 0.5;
  const double r = static_cast<double>(digit) - static_cast<double>(levels / 2 - 1);
  return static_cast<float>((r - 0.5) / half);
}

std::uint32_t fsq_pack(std::span<const std::uint32_t> digits,
                       const FsqLevels& levels) {
  const auto ls = levels.levels();
  if (digits.size() != ls.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(ls.size()) + " digits");
  }
  std::uint64_t flat = 0;
  std::uint64_t radix = 1;
  for (std::size_t k = 0; k < ls.size(); ++k) {
    if (digits[k] >= ls[k]) {
      throw Error(ErrorCode::CodeOutOfRange,
                  "digit " + std::to_string(digits[k]) + " on channel " +
                      std::to_string(k) + " is outside [0, " +
                      std::to_string(ls[k]) + ")");
    }
    flat += digits[k] * radix;
    radix *= ls[k];
  }
  return static_cast<std::uint32_t>(flat);
}

std::vector<std::uint32_t> fsq_unpack(std::uint64_t flat, const FsqLevels& levels) {
  if (flat >= levels.codebook_size()) {
    throw Error(ErrorCode::CodeOutOfRange,
                "flat code " + std::to_string(flat) + " is outside [0, " +
                    std::to_string(levels.codebook_size()) + ")");
  }
  std::vector<std::uint32_t> digits;
  digits.reserve(levels.channels());
  for (auto l : levels.levels()) {
    digits.push_back(static_cast<std::uint32_t>(flat % l));
    flat /= l;
  }
  return digits;
}

QuantizeOutput fsq_quantize(const FeatureMap& map, const FsqLevels& levels,
                            unsigned threads) {
  if (map.dim() != levels.channels()) {
    throw Error(ErrorCode::DimensionMismatch,
                "feature dim " + std::to_string(map.dim()) + " does not match " +
                    std::to_string(levels.channels()) + " FSQ channels");
  }
  const auto ls = levels.levels();
  const std::size_t n = map.positions();
  const std::size_t d = map.dim();
  std::vector<std::uint32_t> codes(n);
  std::vector<float> values(n * d);
  std::vector<double> dist(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t p = begin; p < end; ++p) {
      const auto x = map.vector(p);
      std::uint64_t flat = 0;
      std::uint64_t radix = 1;
      double err = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const auto digit = fsq_digit(x[k], ls[k]);
        const float q = fsq_level_value(digit, ls[k]);
        values[p * d + k] = q;
        const double diff = static_cast<double>(x[k]) - q;
        err += diff * diff;
        flat += digit * radix;
        radix *= ls[k];
      }
      codes[p] = static_cast<std::uint32_t>(flat);
      dist[p] = err;
    }
  });
  const double err = pairwise_sum(dist) / static_cast<double>(n);
  return QuantizeOutput{TokenGrid(map.height(), map.width(), std::move(codes)),
                        FeatureMap(map.height(), map.width(), map.dim(),
                                   std::move(values)),
                        err};
}

Codebook fsq_implied_codebook(const FsqLevels& levels) {
  const auto rows = levels.codebook_size();
  if (rows > kMaxImpliedRows) {
    throw Error(ErrorCode::DimensionOverflow,
                "implied FSQ codebook of " + std::to_string(rows) +
                    " rows is too large to materialize");
  }
  const auto ls = levels.levels();
  const std::size_t d = ls.size();
  std::vector<float> data(rows * d);
  for (std::uint64_t c = 0; c < rows; ++c) {
    std::uint64_t rest = c;
    for (std::size_t k = 0; k < d; ++k) {
      data[c * d + k] = fsq_level_value(static_cast<std::uint32_t>(rest % ls[k]), ls[k]);
      rest /= ls[k];
    }
  }
  return Codebook(static_cast<std::uint32_t>(rows), static_cast<std::uint32_t>(d),
                  std::move(data));
}

}  // namespace vqtk
