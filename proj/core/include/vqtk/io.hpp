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
#include <filesystem>
#include <span>
#include <vector>

#include "vqtk/types.hpp"

// Binary formats, all fields little-endian:
//
//   FMAP: "FMAP" | version u32 = 1 | h u32 | w u32 | d u32 | h*w*d x f32
//   CBOK: "CBOK" | version u32 = 1 | N u32 | d u32 | N*d x f32
//   TOKG: "TOKG" | version u32 = 1 | h u32 | w u32 | h*w x u32
//
// Payloads are row-major (row, column, channel). Decoders reject bad magic,
// unknown versions, zero or overflowing dimensions, short payloads, trailing
// bytes and non-finite floats; every such Error carries the byte offset.

namespace vqtk {

inline constexpr std::uint32_t kFormatVersion = 1;

std::vector<std::byte> encode_feature_map(const FeatureMap& map);
FeatureMap decode_feature_map(std::span<const std::byte> bytes);

std::vector<std::byte> encode_codebook(const Codebook& book);
Codebook decode_codebook(std::span<const std::byte> bytes);

std::vector<std::byte> encode_token_grid(const TokenGrid& grid);
TokenGrid decode_token_grid(std::span<const std::byte> bytes);

FeatureMap read_feature_map(const std::filesystem::path& path);
void write_feature_map(const FeatureMap& map, const std::filesystem::path& path);

Codebook read_codebook(const std::filesystem::path& path);
void write_codebook(const Codebook& book, const std::filesystem::path& path);

TokenGrid read_token_grid(const std::filesystem::path& path);
void write_token_grid(const TokenGrid& grid, const std::filesystem::path& path);

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes);

namespace detail {

/// Little-endian append-only encoder.
class ByteWriter {
 public:
  void magic(const char (&tag)[5]);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void f32(float v);
  void f64(double v);
  std::vector<std::byte> take() && { return std::move(buf_); }

 private:
  std::vector<std::byte> buf_;
};

/// Little-endian cursor over a byte buffer; throws Truncated on underrun.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  void expect_magic(const char (&tag)[5]);
  void expect_version();
  std::uint32_t u32();
  std::uint64_t u64();
  float f32();
  double f64();
  std::uint64_t offset() const noexcept { return pos_; }
  std::uint64_t remaining() const noexcept { return bytes_.size() - pos_; }
  void expect_end() const;

 private:
  void need(std::size_t n) const;

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail
}  // namespace vqtk
