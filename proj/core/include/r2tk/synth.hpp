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
#include <cstdint>
#include <string>
#include <vector>

#include "r2tk/tensor.hpp"

namespace r2tk {

enum class PatchRole : std::uint8_t { kForeground, kCue, kBackground };

std::string to_string(PatchRole role);
PatchRole patch_role_from_string(const std::string& name);

/// Synthetic fine-grained dataset. Each image holds one class glyph (a
/// contiguous block of glyph_patches×glyph_patches patches whose detail
/// pattern is scaled by glyph_contrast), cue_count copies of a motif that
/// identifies the class group (label % 2), and noise background elsewhere.
struct SynthSpec {
  std::size_t num_classes = 4;
  std::size_t images_per_class = 40;
  std::size_t image_h = 16;
  std::size_t image_w = 16;
  std::size_t channels = 1;
  std::size_t patch = 4;
  std::size_t glyph_patches = 2;
  double glyph_contrast = 0.5;
  std::size_t cue_count = 3;
  double noise_std = 0.08;
  std::uint64_t seed = 7;

  std::size_t grid_h() const { return image_h / patch; }
  std::size_t grid_w() const { return image_w / patch; }
  std::size_t num_patches() const { return grid_h() * grid_w(); }
  std::size_t foreground_count() const { return glyph_patches * glyph_patches; }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const SynthSpec&, const SynthSpec&) = default;
};

struct Sample {
  std::size_t id = 0;
  Tensor image;  ///< H×W×C, values k/255
  int label = 0;
  std::vector<PatchRole> patch_roles;
};

struct Dataset {
  std::vector<Sample> train;
  std::vector<Sample> test;

  std::size_t size() const { return train.size() + test.size(); }
};

/// Deterministic in the spec. Sample j of each class goes to the test split
/// when j % 5 == 4 (80/20 round-robin per class).
Dataset generate(const SynthSpec& spec);

/// Test split membership of the j-th image of a class.
inline bool is_test_index(std::size_t index_in_class) { return index_in_class % 5 == 4; }

}  // namespace r2tk
