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
#include <optional>
#include <string>

#include "r2tk/synth.hpp"
#include "r2tk/trainer.hpp"
#include "r2tk/vit.hpp"

namespace r2tk {

struct RunPaths {
  std::string data_dir;  ///< empty: generate the dataset in memory from `data`
  std::string out_dir = "run";
  std::string checkpoint;  ///< empty: <out_dir>/model.r2tk
};

/// Everything a command needs, loaded from one JSON document. Every field has
/// a default and unknown keys are rejected.
struct RunConfig {
  ModelConfig model;
  TrainConfig train;
  SynthSpec data;
  RunPaths paths;

  void validate() const;
  std::filesystem::path checkpoint_path() const;
};

RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace r2tk
