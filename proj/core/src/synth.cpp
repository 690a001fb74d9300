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

#include "r2tk/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "r2tk/errors.hpp"

namespace r2tk {

std::string to_string(PatchRole role) {
  switch (role) {
    case PatchRole::kForeground:
      return "foreground";
    case PatchRole::kCue:
      return "cue";
    case PatchRole::kBackground:
      return "background";
  }
  return "background";
}

PatchRole patch_role_from_string(const std::string& name) {
  if (name == "foreground") return PatchRole::kForeground;
  if (name == "cue") return PatchRole::kCue;
  if (name == "background") return PatchRole::kBackground;
  throw FormatError("unknown patch role '" + name + "'");
}

void SynthSpec::validate() const {
  if (num_classes < 2) throw ConfigError("data.num_classes must be >= 2");
  if (images_per_class == 0) throw ConfigError("data.images_per_class must be positive");
  if (patch == 0) throw ConfigError("data.patch must be positive");
  if (image_h == 0 || image_h % patch != 0) {
    throw ConfigError("data.image_h must be a positive multiple of data.patch");
  }
  if (image_w == 0 || image_w % patch != 0) {
    throw ConfigError("data.image_w must be a positive multiple of data.patch");
  }
  if (channels != 1 && channels != 3) throw ConfigError("data.channels must be 1 or 3");
  if (glyph_patches == 0 || glyph_patches > grid_h() || glyph_patches > grid_w()) {
    throw ConfigError("data.glyph_patches must fit inside the patch grid");
  }
  if (cue_count + foreground_count() >= num_patches()) {
    throw ConfigError("data.cue_count plus glyph patches must leave at least one background patch");
  }
  if (!(glyph_contrast >= 0.0) || !std::isfinite(glyph_contrast)) {
    throw ConfigError("data.glyph_contrast must be >= 0");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("data.noise_std must be >= 0");
  }
}

namespace {

constexpr double kBackgroundLevel = 0.3;
constexpr double kGlyphLevel = 0.75;
constexpr double kCueAmplitude = 0.35;
constexpr std::size_t kGlyphCells = 4;  // detail grid is kGlyphCells × kGlyphCells

float quantize(double v) {
  const double clamped = std::clamp(v, 0.0, 1.0);
  return static_cast<float>(std::floor(clamped * 255.0 + 0.5)) / 255.0f;
}

// Class detail codes: one bit per glyph cell, drawn once per dataset seed and
// forced distinct between classes.
std::vector<std::vector<int>> class_codes(const SynthSpec& spec) {
  std::mt19937_64 rng(spec.seed ^ 0xC0DEC0DEull);
  std::bernoulli_distribution bit(0.5);
  std::vector<std::vector<int>> codes;
  while (codes.size() < spec.num_classes) {
    std::vector<int> code(kGlyphCells * kGlyphCells);
    for (int& b : code) b = bit(rng) ? 1 : 0;
    if (std::find(codes.begin(), codes.end(), code) == codes.end()) codes.push_back(code);
  }
  return codes;
}

Sample make_sample(const SynthSpec& spec, std::size_t id, int label,
                   const std::vector<int>& code) {
  std::mt19937_64 rng(spec.seed ^ (0x9E3779B97F4A7C15ull * (id + 1)));
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t gh = spec.grid_h(), gw = spec.grid_w(), p = spec.patch;
  const std::size_t g = spec.glyph_patches;

  std::vector<PatchRole> roles(spec.num_patches(), PatchRole::kBackground);
  std::uniform_int_distribution<std::size_t> row_dist(0, gh - g), col_dist(0, gw - g);
  const std::size_t gr = row_dist(rng), gc = col_dist(rng);
  for (std::size_t r = gr; r < gr + g; ++r)
    for (std::size_t c = gc; c < gc + g; ++c) roles[r * gw + c] = PatchRole::kForeground;

  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < roles.size(); ++i)
    if (roles[i] == PatchRole::kBackground) free.push_back(i);
  std::shuffle(free.begin(), free.end(), rng);
  for (std::size_t k = 0; k < spec.cue_count; ++k) roles[free[k]] = PatchRole::kCue;

  const int group = label % 2;
  const std::size_t glyph_px = g * p;
  const std::size_t cell_px = std::max<std::size_t>(1, glyph_px / kGlyphCells);

  std::vector<double> base(spec.image_h * spec.image_w, kBackgroundLevel);
  for (std::size_t y = 0; y < spec.image_h; ++y) {
    for (std::size_t x = 0; x < spec.image_w; ++x) {
      const std::size_t patch_idx = (y / p) * gw + (x / p);
      double v = kBackgroundLevel;
      switch (roles[patch_idx]) {
        case PatchRole::kForeground: {
          const std::size_t ly = y - gr * p, lx = x - gc * p;
          const std::size_t cy = std::min(ly / cell_px, kGlyphCells - 1);
          const std::size_t cx = std::min(lx / cell_px, kGlyphCells - 1);
          const int b = code[cy * kGlyphCells + cx];
          v = kGlyphLevel + spec.glyph_contrast * (b ? 0.5 : -0.5);
          break;
        }
        case PatchRole::kCue: {
          // Shared checker motif; the group-specific stripe rides on top
          // with the same contrast scale as the glyph detail.
          const bool checker = ((x % p) + (y % p)) % 2 == 1;
          const std::size_t phase = group == 0 ? (y % p) : (x % p);
          v = kBackgroundLevel + (checker ? kCueAmplitude : 0.0) +
              spec.glyph_contrast * (phase % 2 ? 0.25 : -0.25);
          break;
        }
        case PatchRole::kBackground:
          break;
      }
      base[y * spec.image_w + x] = v;
    }
  }

  Sample s;
  s.id = id;
  s.label = label;
  s.patch_roles = std::move(roles);
  s.image = Tensor({spec.image_h, spec.image_w, spec.channels});
  for (std::size_t i = 0; i < base.size(); ++i) {
    for (std::size_t c = 0; c < spec.channels; ++c) {
      s.image[i * spec.channels + c] = quantize(base[i] + spec.noise_std * noise(rng));
    }
  }
  return s;
}

}  // namespace

Dataset generate(const SynthSpec& spec) {
  spec.validate();
  const auto codes = class_codes(spec);
  Dataset ds;
  // Ids advance round by round across classes.
  std::size_t id = 0;
  for (std::size_t j = 0; j < spec.images_per_class; ++j) {
    for (std::size_t c = 0; c < spec.num_classes; ++c) {
      Sample s = make_sample(spec, id++, static_cast<int>(c), codes[c]);
      (is_test_index(j) ? ds.test : ds.train).push_back(std::move(s));
    }
  }
  return ds;
}

}  // namespace r2tk
