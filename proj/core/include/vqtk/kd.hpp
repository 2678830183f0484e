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

#include <string_view>

#include "vqtk/types.hpp"

namespace vqtk {

/// How the cosine between two maps is taken.
enum class CosineMode {
  /// Mean over positions of the per-position cosine.
  PerPosition,
  /// One cosine between the two maps flattened to single vectors.
  Flat,
};

CosineMode parse_cosine_mode(std::string_view text);

/// Vectors with norm at or below this are rejected with ZeroNorm.
inline constexpr double kMinCosineNorm = 1e-12;

/// Feature-reconstruction loss: negative cosine similarity between a
/// reconstruction and a teacher map. In [-1, 1]; -1 when they are parallel.
double kd_loss(const FeatureMap& recon, const FeatureMap& teacher,
               CosineMode mode = CosineMode::PerPosition);

/// Gradient of kd_loss with respect to `recon`. Orthogonal to recon at each
/// position (per-position mode) since the cosine ignores recon's scale.
FeatureMap kd_loss_gradient(const FeatureMap& recon, const FeatureMap& teacher,
                            CosineMode mode = CosineMode::PerPosition);

}  // namespace vqtk
