// Copyright 2026 The r2tk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "r2tk/fusion.hpp"
#include "r2tk/tensor.hpp"

namespace r2tk {

struct BdmmConfig {
  /// Threshold multiplier on each image's mean importance. Must be > 0.
  double lambda = 1.0;

  void validate() const;
};

/// Batch mask ratio plus per-image masked/kept patch indices (both sorted).
struct MaskPlan {
  double r_batch = 0.0;
  std::vector<std::vector<std::size_t>> masked;
  std::vector<std::vector<std::size_t>> kept;

  std::size_t mask_count() const { return masked.empty() ? 0 : masked.front().size(); }
};

/// Mean over images of the fraction of patches whose importance is strictly
/// below lambda times that image's mean importance.
double batch_mask_ratio(std::span<const PatchImportanceMap> maps, const BdmmConfig& config);

/// Per image, masks the floor(r_batch·N) lowest-importance patches (lower
/// index first on ties), never more than N−1.
MaskPlan select_mask(std::span<const PatchImportanceMap> maps, double r_batch);

struct MaskedPatches {
  Tensor patches;                  ///< N'×(P²·C), kept rows in original order
  std::vector<std::size_t> kept;   ///< original patch indices of those rows
};

MaskedPatches apply_mask(const Tensor& patches, std::span<const std::size_t> masked);

}  // namespace r2tk
