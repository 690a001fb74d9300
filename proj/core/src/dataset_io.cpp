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

#include "r2tk/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json_convert.hpp"
#include "r2tk/image_io.hpp"

namespace r2tk {

using detail::json;

namespace {

std::string image_name(const Sample& s, std::size_t channels) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "img_%05zu.%s", s.id, channels == 1 ? "pgm" : "ppm");
  return buf;
}

}  // namespace

void write_dataset(const std::filesystem::path& dir, const SynthSpec& spec, const Dataset& dataset) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create dataset directory " + dir.string() + ": " + ec.message());

  json samples = json::array();
  auto emit = [&](const Sample& s, const char* split) {
    const std::string file = image_name(s, spec.channels);
    write_image(dir / file, s.image);
    json roles = json::array();
    for (PatchRole r : s.patch_roles) roles.push_back(to_string(r));
    samples.push_back({{"id", s.id}, {"file", file}, {"label", s.label}, {"split", split},
                       {"patch_roles", roles}});
  };
  for (const Sample& s : dataset.train) emit(s, "train");
  for (const Sample& s : dataset.test) emit(s, "test");

  json manifest = {{"format", "r2tk-dataset"},
                   {"version", 1},
                   {"spec", detail::to_json(spec)},
                   {"samples", samples}};
  std::ofstream out(dir / kManifestName);
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("failed writing manifest in " + dir.string());
}

LoadedDataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / kManifestName);
  if (!in) throw IoError("cannot open manifest in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw FormatError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!manifest.is_object() || manifest.value("format", "") != "r2tk-dataset") {
    throw FormatError("manifest in " + dir.string() + " is not an r2tk dataset");
  }
  LoadedDataset out;
  out.spec = detail::synth_spec_from_json(manifest.at("spec"), "spec");
  try {
    for (const json& js : manifest.at("samples")) {
      Sample s;
      s.id = js.at("id").get<std::size_t>();
      s.label = js.at("label").get<int>();
      for (const json& r : js.at("patch_roles")) {
        s.patch_roles.push_back(patch_role_from_string(r.get<std::string>()));
      }
      s.image = read_image(dir / js.at("file").get<std::string>());
      const std::string split = js.at("split").get<std::string>();
      if (split == "train") {
        out.dataset.train.push_back(std::move(s));
      } else if (split == "test") {
        out.dataset.test.push_back(std::move(s));
      } else {
        throw FormatError("unknown split '" + split + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed manifest entry: ") + e.what());
  }
  return out;
}

}  // namespace r2tk
