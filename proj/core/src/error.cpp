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

#include "vqtk/error.hpp"

namespace vqtk {

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return ErrorCategory::Usage;
    case ErrorCode::ZeroNorm:
    case ErrorCode::NotSymmetric:
    case ErrorCode::NotPsd:
    case ErrorCode::NotStochastic:
    case ErrorCode::NonConvergence:
    case ErrorCode::ZeroProbability:
      return ErrorCategory::Numeric;
    case ErrorCode::Io:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Data;
  }
}

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadVersion: return "BadVersion";
    case ErrorCode::Truncated: return "Truncated";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::DimensionOverflow: return "DimensionOverflow";
    case ErrorCode::InvalidShape: return "InvalidShape";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::CodeOutOfRange: return "CodeOutOfRange";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ZeroNorm: return "ZeroNorm";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::NotStochastic: return "NotStochastic";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ZeroProbability: return "ZeroProbability";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

int exit_status_for(ErrorCategory cat) noexcept {
  switch (cat) {
    case ErrorCategory::Usage: return kExitUsage;
    case ErrorCategory::Data: return kExitData;
    case ErrorCategory::Numeric: return kExitNumeric;
    case ErrorCategory::Io: return kExitIo;
  }
  return kExitData;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code) {}

Error::Error(ErrorCode code, const std::string& message, std::uint64_t offset)
    : std::runtime_error(std::string(to_string(code)) + ": " + message +
                         " (at byte offset " + std::to_string(offset) + ")"),
      code_(code),
      offset_(offset) {}

}  // namespace vqtk
