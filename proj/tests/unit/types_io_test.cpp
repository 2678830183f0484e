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

#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>

#include "oracles.hpp"
#include "vqtk/error.hpp"
#include "vqtk/io.hpp"
#include "vqtk/types.hpp"

namespace {

using vqtk::Codebook;
using vqtk::Error;
using vqtk::ErrorCode;
using vqtk::FeatureMap;
using vqtk::TokenGrid;

std::vector<std::byte> header(const char* magic, std::initializer_list<std::uint32_t> fields) {
  std::vector<std::byte> out;
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>(magic[i]));
  for (auto f : fields) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((f >> (8 * b)) & 0xFF));
  }
  return out;
}

void append_f32(std::vector<std::byte>& out, float v) {
  const auto bits = std::bit_cast<std::uint32_t>(v);
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((bits >> (8 * b)) & 0xFF));
}

template <class F>
Error capture(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e;
  }
  ADD_FAILURE() << "expected vqtk::Error";
  return Error(ErrorCode::InvalidArgument, "none");
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("vqtk_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }
  std::filesystem::path dir_;
};

TEST(FeatureMapDecode, HeaderEcho) {
  auto bytes = header("FMAP", {1, 1, 1, 2});
  append_f32(bytes, 0.5f);
  append_f32(bytes, -1.0f);
  const auto m = vqtk::decode_feature_map(bytes);
  EXPECT_EQ(m, FeatureMap(1, 1, 2, {0.5f, -1.0f}));
}

TEST(FeatureMapDecode, BadMagic) {
  auto bytes = header("XXXX", {1, 1, 1, 1});
  append_f32(bytes, 0.0f);
  const auto e = capture([&] { vqtk::decode_feature_map(bytes); });
  EXPECT_EQ(e.code(), ErrorCode::BadMagic);
  EXPECT_EQ(e.offset(), 0u);
}

TEST(FeatureMapDecode, TruncatedPayload) {
  auto bytes = header("FMAP", {1, 1, 2, 2});
  for (float v : {1.0f, 2.0f, 3.0f}) append_f32(bytes, v);
  const auto e = capture([&] { vqtk::decode_feature_map(bytes); });
  EXPECT_EQ(e.code(), ErrorCode::Truncated);
  EXPECT_TRUE(e.offset().has_value());
}

TEST(FeatureMapDecode, NonFiniteReportsOffset) {
  auto bytes = header("FMAP", {1, 1, 1, 3});
  append_f32(bytes, 1.0f);
  append_f32(bytes, std::numeric_limits<float>::quiet_NaN());
  append_f32(bytes, 1.0f);
  const auto e = capture([&] { vqtk::decode_feature_map(bytes); });
  EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  EXPECT_EQ(e.offset(), 20u + 4u);
}

TEST(FeatureMapDecode, DimensionOverflow) {
  const auto bytes = header("FMAP", {1, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu});
  EXPECT_EQ(capture([&] { vqtk::decode_feature_map(bytes); }).code(),
            ErrorCode::DimensionOverflow);
}

TEST(FeatureMapDecode, ZeroDimensionAndVersionAndTrailing) {
  EXPECT_EQ(capture([&] { vqtk::decode_feature_map(header("FMAP", {1, 0, 1, 1})); }).code(),
            ErrorCode::InvalidShape);
  auto v2 = header("FMAP", {2, 1, 1, 1});
  append_f32(v2, 0.0f);
  EXPECT_EQ(capture([&] { vqtk::decode_feature_map(v2); }).code(), ErrorCode::BadVersion);
  auto extra = header("FMAP", {1, 1, 1, 1});
  append_f32(extra, 0.0f);
  extra.push_back(std::byte{0});
  EXPECT_EQ(capture([&] { vqtk::decode_feature_map(extra); }).code(),
            ErrorCode::TrailingData);
}

TEST(FeatureMapEncode, LittleEndianLayout) {
  const auto bytes = vqtk::encode_feature_map(FeatureMap(1, 1, 1, {1.0f}));
  ASSERT_EQ(bytes.size(), 24u);
  EXPECT_EQ(std::memcmp(bytes.data(), "FMAP", 4), 0);
  EXPECT_EQ(bytes[4], std::byte{1});
  // 1.0f = 0x3F800000
  EXPECT_EQ(bytes[20], std::byte{0x00});
  EXPECT_EQ(bytes[23], std::byte{0x3F});
}

TEST(FeatureMap, RejectsInvalidConstruction) {
  EXPECT_EQ(capture([] { FeatureMap(2, 2, 1, {1, 2, 3}); }).code(), ErrorCode::ShapeMismatch);
  EXPECT_EQ(capture([] { FeatureMap(0, 2, 1, {}); }).code(), ErrorCode::InvalidShape);
  EXPECT_EQ(capture([] {
              FeatureMap(1, 1, 1, {std::numeric_limits<float>::infinity()});
            }).code(),
            ErrorCode::NonFinite);
}

TEST_F(TempDir, FeatureMapRoundTrip) {
  const FeatureMap m(2, 2, 1, {1, 2, 3, 4});
  vqtk::write_feature_map(m, dir_ / "a.fmap");
  EXPECT_TRUE(vqtk::bitwise_equal(vqtk::read_feature_map(dir_ / "a.fmap"), m));
}

TEST_F(TempDir, NegativeZeroPreserved) {
  const FeatureMap m(1, 1, 2, {-0.0f, 0.0f});
  vqtk::write_feature_map(m, dir_ / "z.fmap");
  const auto back = vqtk::read_feature_map(dir_ / "z.fmap");
  EXPECT_TRUE(std::signbit(back.data()[0]));
  EXPECT_FALSE(std::signbit(back.data()[1]));
  EXPECT_TRUE(vqtk::bitwise_equal(back, m));
}

TEST_F(TempDir, LargeRandomMapRoundTrip) {
  vqtk_test::Rng rng(11);
  const auto m = vqtk_test::random_map(rng, 16, 16, 32, -1e3, 1e3);
  vqtk::write_feature_map(m, dir_ / "big.fmap");
  EXPECT_TRUE(vqtk::bitwise_equal(vqtk::read_feature_map(dir_ / "big.fmap"), m));
}

TEST_F(TempDir, CodebookAndTokenGridRoundTrip) {
  const Codebook book(3, 2, {0.f, 1.f, -2.5f, 3.f, 1e-30f, -0.0f});
  vqtk::write_codebook(book, dir_ / "b.cbok");
  EXPECT_TRUE(vqtk::bitwise_equal(vqtk::read_codebook(dir_ / "b.cbok"), book));

  const TokenGrid grid(1, 4, {0, 1, 2, 1});
  vqtk::write_token_grid(grid, dir_ / "t.tokg");
  EXPECT_EQ(vqtk::read_token_grid(dir_ / "t.tokg"), grid);
}

TEST_F(TempDir, MissingFileIsIoError) {
  EXPECT_EQ(capture([&] { vqtk::read_feature_map(dir_ / "absent.fmap"); }).code(),
            ErrorCode::Io);
}

TEST(TokenGrid, ValidateAgainstVocab) {
  const TokenGrid grid(1, 3, {0, 2, 3});
  EXPECT_NO_THROW(grid.validate(4));
  EXPECT_EQ(capture([&] { grid.validate(3); }).code(), ErrorCode::CodeOutOfRange);
}

TEST(Codebook, RejectsBadShape) {
  EXPECT_EQ(capture([] { Codebook(0, 2, {}); }).code(), ErrorCode::InvalidShape);
  EXPECT_EQ(capture([] { Codebook(2, 2, {1, 2, 3}); }).code(), ErrorCode::ShapeMismatch);
}

TEST(GaussianStats, Invariants) {
  EXPECT_NO_THROW(vqtk::GaussianStats(2, {0, 0}, {1, 0.5, 0.5, 1}, 2));
  EXPECT_EQ(capture([] { vqtk::GaussianStats(2, {0, 0}, {1, 0.5, 0.4, 1}, 2); }).code(),
            ErrorCode::NotSymmetric);
  EXPECT_EQ(capture([] { vqtk::GaussianStats(1, {0}, {-1}, 2); }).code(),
            ErrorCode::NotPsd);
  EXPECT_EQ(capture([] { vqtk::GaussianStats(1, {0}, {1}, 1); }).code(),
            ErrorCode::InsufficientData);
}

TEST(PoolVectors, ConcatenatesAndChecksDims) {
  const std::vector<FeatureMap> maps{FeatureMap(1, 1, 2, {1, 2}), FeatureMap(1, 2, 2, {3, 4, 5, 6})};
  const auto v = vqtk::pool_vectors(maps);
  EXPECT_EQ(v.count(), 3u);
  EXPECT_EQ(v.values, (std::vector<float>{1, 2, 3, 4, 5, 6}));
  const std::vector<FeatureMap> mixed{FeatureMap(1, 1, 2, {1, 2}), FeatureMap(1, 1, 1, {3})};
  EXPECT_EQ(capture([&] { vqtk::pool_vectors(mixed); }).code(), ErrorCode::DimensionMismatch);
  EXPECT_EQ(capture([] { vqtk::pool_vectors({}); }).code(), ErrorCode::EmptyInput);
}

// Property: every seeded random instance survives encode/decode bitwise, and
// every decoded object satisfies its type invariants.
TEST(SerializationProperty, RandomRoundTrips) {
  vqtk_test::Rng rng(2024);
  std::uniform_int_distribution<std::uint32_t> dim(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const auto m = vqtk_test::random_map(rng, dim(rng), dim(rng), dim(rng), -1e6, 1e6);
    EXPECT_TRUE(vqtk::bitwise_equal(vqtk::decode_feature_map(vqtk::encode_feature_map(m)), m));
    const auto b = vqtk_test::random_book(rng, dim(rng), dim(rng));
    EXPECT_TRUE(vqtk::bitwise_equal(vqtk::decode_codebook(vqtk::encode_codebook(b)), b));
    const auto h = dim(rng), w = dim(rng);
    std::vector<std::uint32_t> codes(std::size_t{h} * w);
    for (auto& c : codes) c = static_cast<std::uint32_t>(rng());
    const TokenGrid g(h, w, codes);
    EXPECT_EQ(vqtk::decode_token_grid(vqtk::encode_token_grid(g)), g);
  }
}

// Property: any single-byte truncation of a valid file is rejected with a
// typed error rather than accepted.
TEST(SerializationProperty, EveryTruncationRejected) {
  const auto bytes = vqtk::encode_codebook(Codebook(2, 3, {1, 2, 3, 4, 5, 6}));
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::span<const std::byte> cut(bytes.data(), n);
    EXPECT_THROW(vqtk::decode_codebook(cut), Error) << "length " << n;
  }
}

}  // namespace
