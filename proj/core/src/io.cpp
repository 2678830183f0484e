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

#include "vqtk/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "vqtk/error.hpp"

namespace vqtk {
namespace detail {

void ByteWriter::magic(const char (&tag)[5]) {
  for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::byte>(tag[i]));
}

void ByteWriter::u32(std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
  }
}

void ByteWriter::u64(std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xFFu));
  }
}

void ByteWriter::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
void ByteWriter::f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

void ByteReader::need(std::size_t n) const {
  if (remaining() < n) {
    throw Error(ErrorCode::Truncated,
                "need " + std::to_string(n) + " bytes, " +
                    std::to_string(remaining()) + " left",
                pos_);
  }
}

void ByteReader::expect_magic(const char (&tag)[5]) {
  need(4);
  if (std::memcmp(bytes_.data() + pos_, tag, 4) != 0) {
    throw Error(ErrorCode::BadMagic, std::string("expected magic ") + tag, pos_);
  }
  pos_ += 4;
}

void ByteReader::expect_version() {
  const auto at = pos_;
  const auto v = u32();
  if (v != kFormatVersion) {
    throw Error(ErrorCode::BadVersion,
                "unsupported version " + std::to_string(v), at);
  }
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
  }
  pos_ += 4;
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
  }
  pos_ += 8;
  return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }
double ByteReader::f64() { return std::bit_cast<double>(u64()); }

void ByteReader::expect_end() const {
  if (remaining() != 0) {
    throw Error(ErrorCode::TrailingData,
                std::to_string(remaining()) + " unexpected trailing bytes",
                pos_);
  }
}

}  // namespace detail

namespace {

using detail::ByteReader;
using detail::ByteWriter;

// Reads a dimension field; zero is rejected with the field's offset.
std::uint32_t read_dim(ByteReader& in, const char* name) {
  const auto at = in.offset();
  const auto v = in.u32();
  if (v == 0) {
    throw Error(ErrorCode::InvalidShape, std::string(name) + " is zero", at);
  }
  return v;
}

// Element count of the payload, checked against overflow and the bytes left.
std::size_t payload_count(ByteReader& in, std::initializer_list<std::uint32_t> dims,
                          std::size_t elem_bytes) {
  std::uint64_t n = 1;
  for (auto d : dims) {
    if (n > std::numeric_limits<std::uint64_t>::max() / d) {
      throw Error(ErrorCode::DimensionOverflow, "element count overflows",
                  in.offset());
    }
    n *= d;
  }
  if (n > std::numeric_limits<std::size_t>::max() / elem_bytes / 2) {
    throw Error(ErrorCode::DimensionOverflow,
                "element count " + std::to_string(n) + " too large", in.offset());
  }
  if (in.remaining() < n * elem_bytes) {
    throw Error(ErrorCode::Truncated,
                "payload declares " + std::to_string(n) + " elements but only " +
                    std::to_string(in.remaining()) + " bytes remain",
                in.offset() + in.remaining());
  }
  return static_cast<std::size_t>(n);
}

std::vector<float> read_floats(ByteReader& in, std::size_t n) {
  std::vector<float> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto at = in.offset();
    out[i] = in.f32();
    if (!std::isfinite(out[i])) {
      throw Error(ErrorCode::NonFinite, "non-finite payload value", at);
    }
  }
  return out;
}

}  // namespace

std::vector<std::byte> encode_feature_map(const FeatureMap& map) {
  ByteWriter out;
  out.magic("FMAP");
  out.u32(kFormatVersion);
  out.u32(map.height());
  out.u32(map.width());
  out.u32(map.dim());
  for (float v : map.data()) out.f32(v);
  return std::move(out).take();
}

FeatureMap decode_feature_map(std::span<const std::byte> bytes) {
  ByteReader in(bytes);
  in.expect_magic("FMAP");
  in.expect_version();
  const auto h = read_dim(in, "height");
  const auto w = read_dim(in, "width");
  const auto d = read_dim(in, "dim");
  const auto n = payload_count(in, {h, w, d}, sizeof(float));
  auto data = read_floats(in, n);
  in.expect_end();
  return FeatureMap(h, w, d, std::move(data));
}

std::vector<std::byte> encode_codebook(const Codebook& book) {
  ByteWriter out;
  out.magic("CBOK");
  out.u32(kFormatVersion);
  out.u32(book.size());
  out.u32(book.dim());
  for (float v : book.data()) out.f32(v);
  return std::move(out).take();
}

Codebook decode_codebook(std::span<const std::byte> bytes) {
  ByteReader in(bytes);
  in.expect_magic("CBOK");
  in.expect_version();
  const auto size = read_dim(in, "codebook size");
  const auto d = read_dim(in, "dim");
  const auto n = payload_count(in, {size, d}, sizeof(float));
  auto data = read_floats(in, n);
  in.expect_end();
  return Codebook(size, d, std::move(data));
}

std::vector<std::byte> encode_token_grid(const TokenGrid& grid) {
  ByteWriter out;
  out.magic("TOKG");
  out.u32(kFormatVersion);
  out.u32(grid.height());
  out.u32(grid.width());
  for (auto c : grid.codes()) out.u32(c);
  return std::move(out).take();
}

TokenGrid decode_token_grid(std::span<const std::byte> bytes) {
  ByteReader in(bytes);
  in.expect_magic("TOKG");
  in.expect_version();
  const auto h = read_dim(in, "height");
  const auto w = read_dim(in, "width");
  const auto n = payload_count(in, {h, w}, sizeof(std::uint32_t));
  std::vector<std::uint32_t> codes(n);
  for (auto& c : codes) c = in.u32();
  in.expect_end();
  return TokenGrid(h, w, std::move(codes));
}

std::vector<std::byte> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 &&
      !in.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(size))) {
    throw Error(ErrorCode::Io, "read failed for " + path.string());
  }
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path,
                      std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

FeatureMap read_feature_map(const std::filesystem::path& path) {
  return decode_feature_map(read_file_bytes(path));
}

void write_feature_map(const FeatureMap& map, const std::filesystem::path& path) {
  write_file_bytes(path, encode_feature_map(map));
}

Codebook read_codebook(const std::filesystem::path& path) {
  return decode_codebook(read_file_bytes(path));
}

void write_codebook(const Codebook& book, const std::filesystem::path& path) {
  write_file_bytes(path, encode_codebook(book));
}

TokenGrid read_token_grid(const std::filesystem::path& path) {
  return decode_token_grid(read_file_bytes(path));
}

void write_token_grid(const TokenGrid& grid, const std::filesystem::path& path) {
  write_file_bytes(path, encode_token_grid(grid));
}

}  // namespace vqtk
