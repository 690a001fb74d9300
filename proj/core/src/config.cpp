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

#include "r2tk/config.hpp"

#include <fstream>
#include <sstream>

#include "json_convert.hpp"

namespace r2tk {

namespace detail {

ObjectReader::ObjectReader(const json& object, std::string section)
    : object_(object), section_(std::move(section)) {
  if (!object_.is_object()) throw ConfigError(section_ + " must be a JSON object");
}

const json* ObjectReader::child(const char* key) {
  seen_.insert(key);
  auto it = object_.find(key);
  if (it == object_.end() || it->is_null()) return nullptr;
  return &*it;
}

void ObjectReader::finish() const {
  for (const auto& [key, value] : object_.items()) {
    if (!seen_.count(key)) {
      throw ConfigError("unknown key " + (section_.empty() ? key : section_ + "." + key));
    }
  }
}

json to_json(const SynthSpec& s) {
  return json{{"num_classes", s.num_classes},   {"images_per_class", s.images_per_class},
              {"image_h", s.image_h},           {"image_w", s.image_w},
              {"channels", s.channels},         {"patch", s.patch},
              {"glyph_patches", s.glyph_patches}, {"glyph_contrast", s.glyph_contrast},
              {"cue_count", s.cue_count},       {"noise_std", s.noise_std},
              {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const json& j, const std::string& section) {
  SynthSpec s;
  ObjectReader r(j, section);
  r.get("num_classes", s.num_classes);
  r.get("images_per_class", s.images_per_class);
  r.get("image_h", s.image_h);
  r.get("image_w", s.image_w);
  r.get("channels", s.channels);
  r.get("patch", s.patch);
  r.get("glyph_patches", s.glyph_patches);
  r.get("glyph_contrast", s.glyph_contrast);
  r.get("cue_count", s.cue_count);
  r.get("noise_std", s.noise_std);
  r.get("seed", s.seed);
  r.finish();
  return s;
}

}  // namespace detail

using detail::json;
using detail::ObjectReader;

void RunConfig::validate() const {
  model.validate();
  train.validate();
  data.validate();
  if (data.image_h != model.image_h) throw ConfigError("data.image_h must equal model.image_h");
  if (data.image_w != model.image_w) throw ConfigError("data.image_w must equal model.image_w");
  if (data.patch != model.patch) throw ConfigError("data.patch must equal model.patch");
  if (data.channels != model.channels) throw ConfigError("data.channels must equal model.channels");
  if (data.num_classes != model.num_classes) {
    throw ConfigError("data.num_classes must equal model.num_classes");
  }
}

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!paths.checkpoint.empty()) return paths.checkpoint;
  return std::filesystem::path(paths.out_dir) / "model.r2tk";
}

RunConfig run_config_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  ObjectReader top(root, "");

  if (const json* m = top.child("model")) {
    ObjectReader r(*m, "model");
    r.get("image_h", c.model.image_h);
    r.get("image_w", c.model.image_w);
    r.get("channels", c.model.channels);
    r.get("patch", c.model.patch);
    r.get("embed_dim", c.model.embed_dim);
    r.get("layers", c.model.layers);
    r.get("heads", c.model.heads);
    r.get("mlp_dim", c.model.mlp_dim);
    r.get("num_classes", c.model.num_classes);
    std::string init = to_string(c.model.init);
    r.get("init", init);
    c.model.init = init_scheme_from_string(init);
    r.finish();
  }
  if (const json* t = top.child("train")) {
    ObjectReader r(*t, "train");
    r.get("batch_size", c.train.batch_size);
    r.get("lr", c.train.lr);
    r.get("momentum", c.train.momentum);
    r.get("total_steps", c.train.total_steps);
    r.get("seed", c.train.seed);
    r.get("bdmm_enabled", c.train.bdmm_enabled);
    r.get("bdmm_warmup_steps", c.train.bdmm_warmup_steps);
    double fixed = -1.0;
    r.get("fixed_ratio", fixed);
    if (fixed >= 0.0) c.train.fixed_ratio = fixed;
    r.get("eval_batch", c.train.eval_batch);
    std::string probe = to_string(c.train.probe_input);
    r.get("probe_input", probe);
    c.train.probe_input = probe_input_from_string(probe);
    r.finish();
  }
  if (const json* i = top.child("ib")) {
    ObjectReader r(*i, "ib");
    r.get("alpha", c.train.ib.alpha);
    r.get("beta", c.train.ib.beta);
    std::string policy = to_string(c.train.ib.bandwidth);
    r.get("bandwidth_policy", policy);
    c.train.ib.bandwidth = bandwidth_policy_from_string(policy);
    r.get("sigma", c.train.ib.sigma);
    r.get("freeze_bandwidth", c.train.ib.freeze_bandwidth);
    r.finish();
  }
  if (const json* b = top.child("bdmm")) {
    ObjectReader r(*b, "bdmm");
    r.get("lambda", c.train.bdmm.lambda);
    r.finish();
  }
  if (const json* d = top.child("data")) c.data = detail::synth_spec_from_json(*d, "data");
  if (const json* p = top.child("paths")) {
    ObjectReader r(*p, "paths");
    r.get("data_dir", c.paths.data_dir);
    r.get("out_dir", c.paths.out_dir);
    r.get("checkpoint", c.paths.checkpoint);
    r.finish();
  }
  top.finish();
  return c;
}

std::string run_config_to_json(const RunConfig& c) {
  json j;
  j["model"] = {{"image_h", c.model.image_h}, {"image_w", c.model.image_w},
                {"channels", c.model.channels}, {"patch", c.model.patch},
                {"embed_dim", c.model.embed_dim}, {"layers", c.model.layers},
                {"heads", c.model.heads}, {"mlp_dim", c.model.mlp_dim},
                {"num_classes", c.model.num_classes}, {"init", to_string(c.model.init)}};
  j["train"] = {{"batch_size", c.train.batch_size},
                {"lr", c.train.lr},
                {"momentum", c.train.momentum},
                {"total_steps", c.train.total_steps},
                {"seed", c.train.seed},
                {"bdmm_enabled", c.train.bdmm_enabled},
                {"bdmm_warmup_steps", c.train.bdmm_warmup_steps},
                {"fixed_ratio", c.train.fixed_ratio ? json(*c.train.fixed_ratio) : json(nullptr)},
                {"eval_batch", c.train.eval_batch},
                {"probe_input", to_string(c.train.probe_input)}};
  j["ib"] = {{"alpha", c.train.ib.alpha},
             {"beta", c.train.ib.beta},
             {"bandwidth_policy", to_string(c.train.ib.bandwidth)},
             {"sigma", c.train.ib.sigma},
             {"freeze_bandwidth", c.train.ib.freeze_bandwidth}};
  j["bdmm"] = {{"lambda", c.train.bdmm.lambda}};
  j["data"] = detail::to_json(c.data);
  j["paths"] = {{"data_dir", c.paths.data_dir},
                {"out_dir", c.paths.out_dir},
                {"checkpoint", c.paths.checkpoint}};
  return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return run_config_from_json(ss.str());
}

}  // namespace r2tk
