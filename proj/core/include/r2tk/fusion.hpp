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
#include <vector>

#include "r2tk/tensor.hpp"
#include "r2tk/vit.hpp"

namespace r2tk {

/// Per-patch importance for one image: the fused attention column means with
/// the class-token entry removed. Not renormalized.
struct PatchImportanceMap {
  std::vector<float> values;
  std::size_t image_id = 0;

  std::size_t size() const { return values.size(); }
};

/// Elementwise mean of every layer's and head's attention map.
Tensor fuse(const ForwardTrace& trace);
/// Mean of the rows of a square matrix (all rows, class row included).
Tensor row_average(const Tensor& fused);
/// Drops entry 0. Requires length ≥ 2.
PatchImportanceMap strip_class(const Tensor& averaged, std::size_t image_id = 0);

/// fuse → row_average → strip_class.
PatchImportanceMap patch_importance(const ForwardTrace& trace, std::size_t image_id = 0);

}  // namespace r2tk
