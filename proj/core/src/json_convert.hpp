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

// Internal JSON mapping shared by config and dataset manifests.

#include <set>
#include <string>

#include "json.hpp"
#include "r2tk/config.hpp"
#include "r2tk/errors.hpp"

namespace r2tk::detail {

using nlohmann::json;

/// Reads optional keys from an object, rejecting any key it was not asked
/// about once finish() runs.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string section);

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = object_.find(key);
    if (it == object_.end() || it->is_null()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(section_ + "." + key + " has the wrong type");
    }
  }

  const json* child(const char* key);
  void finish() const;

 private:
  const json& object_;
  std::string section_;
  std::set<std::string> seen_;
};

json to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const json& j, const std::string& section);

}  // namespace r2tk::detail
