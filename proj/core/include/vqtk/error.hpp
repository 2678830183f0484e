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
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace vqtk {

enum class ErrorCode {
  // usage
  InvalidArgument,
  // data
  BadMagic,
  BadVersion,
  Truncated,
  TrailingData,
  NonFinite,
  DimensionOverflow,
  InvalidShape,
  DimensionMismatch,
  ShapeMismatch,
  CodeOutOfRange,
  EmptyInput,
  InsufficientData,
  // numeric
  ZeroNorm,
  NotSymmetric,
  NotPsd,
  NotStochastic,
  NonConvergence,
  ZeroProbability,
  // io
  Io,
};

/// Coarse grouping of error codes. The CLI maps each category to a fixed
/// process exit status (see ExitStatus).
enum class ErrorCategory { Usage, Data, Numeric, Io };

ErrorCategory category_of(ErrorCode code) noexcept;
std::string_view to_string(ErrorCode code) noexcept;

/// Exit statuses of the vqtk tool. Stable; documented in the README.
enum ExitStatus : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumeric = 4,
  kExitIo = 5,
};

int exit_status_for(ErrorCategory cat) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);
  /// Errors raised while decoding a file carry the byte offset of the fault.
  Error(ErrorCode code, const std::string& message, std::uint64_t offset);

  ErrorCode code() const noexcept { return code_; }
  ErrorCategory category() const noexcept { return category_of(code_); }
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  ErrorCode code_;
  std::optional<std::uint64_t> offset_;
};

}  // namespace vqtk
