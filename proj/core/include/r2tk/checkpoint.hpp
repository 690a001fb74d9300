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

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "r2tk/tensor.hpp"
#include "r2tk/vit.hpp"

namespace r2tk {

/// Binary layout (little-endian):
///   "R2TK" | u16 version | u32 tensor count |
///   per tensor: u16 name length | name | u8 rank | u32 dims[rank] | f32 payload
inline constexpr char kCheckpointMagic[4] = {'R', '2', 'T', 'K'};
inline constexpr std::uint16_t kCheckpointVersion = 1;

using NamedTensors = std::vector<std::pair<std::string, Tensor>>;

std::vector<unsigned char> encode_checkpoint(const NamedTensors& tensors);
/// Throws BadMagicError, VersionMismatchError or TruncatedFileError.
NamedTensors decode_checkpoint(const std::vector<unsigned char>& bytes);

void save_checkpoint(const Params& params, const std::filesystem::path& path);
Params load_checkpoint(const std::filesystem::path& path);

/// Rebuilds Params from named tensors (layer count inferred from names).
Params params_from_named(NamedTensors tensors);
NamedTensors named_from_params(const Params& params);

/// True when every tensor has the shape init_params(config) would produce.
bool params_match_config(const Params& params, const ModelConfig& config);

}  // namespace r2tk
