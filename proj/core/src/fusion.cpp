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

#include "r2tk/fusion.hpp"

#include "r2tk/errors.hpp"

namespace r2tk {

Tensor fuse(const ForwardTrace& trace) {
  const Tensor* first = nullptr;
  std::size_t count = 0;
  for (const auto& layer : trace.attn) {
    for (const Tensor& map : layer) {
      if (!first) {
        first = &map;
        require_matrix(map, "fuse");
      }
      require_same_shape(*first, map, "fuse");
      ++count;
    }
  }
  if (count == 0) throw DimensionError("fuse: trace holds no attention maps");

  std::vector<double> acc(first->size(), 0.0);
  for (const auto& layer : trace.attn)
    for (const Tensor& map : layer)
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += map[i];

  Tensor out(first->shape());
  for (std::size_t i = 0; i < acc.size(); ++i) {
    out[i] = static_cast<float>(acc[i] / static_cast<double>(count));
  }
  return out;
}

Tensor row_average(const Tensor& fused) {
  require_matrix(fused, "row_average");
  const std::size_t r = fused.rows(), c = fused.cols();
  if (r != c) throw DimensionError("row_average: non-square input " + shape_to_string(fused.shape()));
  Tensor out = Tensor::matrix(1, c);
  for (std::size_t j = 0; j < c; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += fused.at(i, j);
    out[j] = static_cast<float>(s / static_cast<double>(r));
  }
  return out;
}

PatchImportanceMap strip_class(const Tensor& averaged, std::size_t image_id) {
  if (averaged.size() < 2) {
    throw DimensionError("strip_class: need the class entry plus at least one patch");
  }
  PatchImportanceMap map;
  map.image_id = image_id;
  map.values.assign(averaged.data().begin() + 1, averaged.data().end());
  return map;
}

PatchImportanceMap patch_importance(const ForwardTrace& trace, std::size_t image_id) {
  return strip_class(row_average(fuse(trace)), image_id);
}

}  // namespace r2tk
