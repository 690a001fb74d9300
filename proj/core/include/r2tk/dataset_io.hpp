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
#include <string>

#include "r2tk/synth.hpp"

namespace r2tk {

/// Writes one PGM/PPM per sample plus manifest.json (spec echo, files,
/// labels, splits, patch roles) into `dir`.
void write_dataset(const std::filesystem::path& dir, const SynthSpec& spec, const Dataset& dataset);

struct LoadedDataset {
  SynthSpec spec;
  Dataset dataset;
};

/// Reads a directory produced by write_dataset.
LoadedDataset read_dataset(const std::filesystem::path& dir);

inline constexpr const char* kManifestName = "manifest.json";

}  // namespace r2tk
