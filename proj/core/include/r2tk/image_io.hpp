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

#include <filesystem>

#include "r2tk/tensor.hpp"

namespace r2tk {

/// Binary PGM (P5, C=1) or PPM (P6, C=3) with maxval 255. Returns H×W×C
/// with values byte/255.
Tensor read_image(const std::filesystem::path& path);

/// Writes P5 for C=1 and P6 for C=3; values are clamped to [0,1] and rounded
/// half-up to bytes.
void write_image(const std::filesystem::path& path, const Tensor& image);

}  // namespace r2tk
