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

#include "r2tk/bdmm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "r2tk/errors.hpp"

namespace r2tk {

void BdmmConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("bdmm.lambda must be a finite value > 0");
  }
}

double batch_mask_ratio(std::span<const PatchImportanceMap> maps, const BdmmConfig& config) {
  config.validate();
  if (maps.empty()) throw DimensionError("batch_mask_ratio: empty batch");
  const std::size_t n = maps.front().size();
  if (n == 0) throw DimensionError("batch_mask_ratio: empty importance map");

  double ratio_sum = 0.0;
  for (const PatchImportanceMap& map : maps) {
    if (map.size() != n) {
      throw DimensionError("batch_mask_ratio: map lengths differ (" + std::to_string(n) +
                           " vs " + std::to_string(map.size()) + ")");
    }
    double mean = 0.0;
    for (float v : map.values) mean += v;
    mean /= static_cast<double>(n);
    const double threshold = mean * config.lambda;
    std::size_t below = 0;
    for (float v : map.values) {
      if (static_cast<double>(v) < threshold) ++below;
    }
    ratio_sum += static_cast<double>(below) / static_cast<double>(n);
  }
  return ratio_sum / static_cast<double>(maps.size());
}

MaskPlan select_mask(std::span<const PatchImportanceMap> maps, double r_batch) {
  if (!(r_batch >= 0.0 && r_batch < 1.0)) {
    throw ConfigError("select_mask: r_batch must lie in [0, 1), got " + std::to_string(r_batch));
  }
  MaskPlan plan;
  plan.r_batch = r_batch;
  for (const PatchImportanceMap& map : maps) {
    const std::size_t n = map.size();
    if (n == 0) throw DimensionError("select_mask: empty importance map");
    const auto count = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(r_batch * static_cast<double>(n))), n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return map.values[a] < map.values[b];
    });
    std::vector<std::size_t> masked(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));
    std::sort(masked.begin(), masked.end());

    std::vector<std::size_t> kept;
    kept.reserve(n - count);
    for (std::size_t i = 0, m = 0; i < n; ++i) {
      if (m < masked.size() && masked[m] == i) {
        ++m;
      } else {
        kept.push_back(i);
      }
    }
    plan.masked.push_back(std::move(masked));
    plan.kept.push_back(std::move(kept));
  }
  return plan;
}

MaskedPatches apply_mask(const Tensor& patches, std::span<const std::size_t> masked) {
  require_matrix(patches, "apply_mask");
  const std::size_t n = patches.rows(), w = patches.cols();
  std::vector<bool> drop(n, false);
  for (std::size_t idx : masked) {
    if (idx >= n) {
      throw DimensionError("apply_mask: index " + std::to_string(idx) + " out of range for " +
                           std::to_string(n) + " patches");
    }
    drop[idx] = true;
  }
  MaskedPatches out;
  for (std::size_t i = 0; i < n; ++i)
    if (!drop[i]) out.kept.push_back(i);
  if (out.kept.empty()) throw DimensionError("apply_mask: every patch is masked");

  out.patches = Tensor::matrix(out.kept.size(), w);
  for (std::size_t r = 0; r < out.kept.size(); ++r) {
    std::copy_n(patches.data().begin() + out.kept[r] * w, w, out.patches.data().begin() + r * w);
  }
  return out;
}

}  // namespace r2tk
