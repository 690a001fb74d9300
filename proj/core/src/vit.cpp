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

#include "r2tk/vit.hpp"

#include <cmath>
#include <cstring>
#include <random>

#include "r2tk/errors.hpp"

namespace r2tk {

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::kFanIn ? "fan_in" : "vit";
}

InitScheme init_scheme_from_string(const std::string& name) {
  if (name == "fan_in") return InitScheme::kFanIn;
  if (name == "vit") return InitScheme::kVit;
  throw ConfigError("model.init must be 'fan_in' or 'vit'; got '" + name + "'");
}

void ModelConfig::validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model.") + name + " must be positive");
  };
  positive(image_h, "image_h");
  positive(image_w, "image_w");
  positive(channels, "channels");
  positive(patch, "patch");
  positive(embed_dim, "embed_dim");
  positive(layers, "layers");
  positive(heads, "heads");
  positive(mlp_dim, "mlp_dim");
  positive(num_classes, "num_classes");
  if (image_h % patch != 0) throw ConfigError("model.image_h must be divisible by model.patch");
  if (image_w % patch != 0) throw ConfigError("model.image_w must be divisible by model.patch");
  if (embed_dim % heads != 0) throw ConfigError("model.embed_dim must be divisible by model.heads");
}

// ---------------------------------------------------------------------------
// Params

namespace {

template <typename P, typename T>
std::vector<std::pair<std::string, T*>> named_impl(P& p) {
  std::vector<std::pair<std::string, T*>> out;
  out.emplace_back("patch_weight", &p.patch_weight);
  out.emplace_back("patch_bias", &p.patch_bias);
  out.emplace_back("cls_token", &p.cls_token);
  out.emplace_back("pos_embed", &p.pos_embed);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.emplace_back(pre + "ln1_gain", &L.ln1_gain);
    out.emplace_back(pre + "ln1_bias", &L.ln1_bias);
    out.emplace_back(pre + "q_weight", &L.q_weight);
    out.emplace_back(pre + "q_bias", &L.q_bias);
    out.emplace_back(pre + "k_weight", &L.k_weight);
    out.emplace_back(pre + "k_bias", &L.k_bias);
    out.emplace_back(pre + "v_weight", &L.v_weight);
    out.emplace_back(pre + "v_bias", &L.v_bias);
    out.emplace_back(pre + "o_weight", &L.o_weight);
    out.emplace_back(pre + "o_bias", &L.o_bias);
    out.emplace_back(pre + "ln2_gain", &L.ln2_gain);
    out.emplace_back(pre + "ln2_bias", &L.ln2_bias);
    out.emplace_back(pre + "mlp1_weight", &L.mlp1_weight);
    out.emplace_back(pre + "mlp1_bias", &L.mlp1_bias);
    out.emplace_back(pre + "mlp2_weight", &L.mlp2_weight);
    out.emplace_back(pre + "mlp2_bias", &L.mlp2_bias);
  }
  out.emplace_back("norm_gain", &p.norm_gain);
  out.emplace_back("norm_bias", &p.norm_bias);
  out.emplace_back("head_weight", &p.head_weight);
  out.emplace_back("head_bias", &p.head_bias);
  return out;
}

}  // namespace

std::vector<std::pair<std::string, Tensor*>> Params::named() {
  return named_impl<Params, Tensor>(*this);
}

std::vector<std::pair<std::string, const Tensor*>> Params::named() const {
  return named_impl<const Params, const Tensor>(*this);
}

std::size_t Params::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : named()) n += t->size();
  return n;
}

bool Params::all_finite() const {
  for (const auto& [name, t] : named())
    if (!t->all_finite()) return false;
  return true;
}

std::uint64_t Params::checksum() const {
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& [name, t] : named()) {
    for (float v : t->data()) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      for (int b = 0; b < 4; ++b) {
        h ^= (bits >> (8 * b)) & 0xffu;
        h *= 1099511628211ull;
      }
    }
  }
  return h;
}

std::size_t parameter_count(const ModelConfig& c) {
  const std::size_t d = c.embed_dim, n = c.num_patches();
  const std::size_t per_layer = 2 * d            // ln1
                                + 4 * (d * d + d)  // q k v o
                                + 2 * d            // ln2
                                + c.mlp_dim * d + c.mlp_dim + d * c.mlp_dim + d;
  return d * c.patch_dim() + d + d + (n + 1) * d + c.layers * per_layer + 2 * d +
         c.num_classes * d + c.num_classes;
}

Params init_params(const ModelConfig& c, std::uint64_t seed) {
  c.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kEmbedStd = 0.02;
  auto trunc_std = [&](std::size_t rows, std::size_t cols, double std) {
    Tensor t = Tensor::matrix(rows, cols);
    for (float& v : t.data()) {
      double z;
      do {
        z = normal(rng);
      } while (std::abs(z) > 2.0);
      v = static_cast<float>(std * z);
    }
    return t;
  };
  auto embedding = [&](std::size_t rows, std::size_t cols) {
    return trunc_std(rows, cols, kEmbedStd);
  };
  // Weights are out × in, so fan-in is the column count.
  auto trunc = [&](std::size_t rows, std::size_t cols) {
    const double std = c.init == InitScheme::kFanIn
                           ? 1.0 / std::sqrt(static_cast<double>(cols))
                           : kEmbedStd;
    return trunc_std(rows, cols, std);
  };
  auto zeros = [](std::size_t cols) { return Tensor::matrix(1, cols, 0.0f); };
  auto ones = [](std::size_t cols) { return Tensor::matrix(1, cols, 1.0f); };

  const std::size_t d = c.embed_dim;
  Params p;
  p.patch_weight = trunc(d, c.patch_dim());
  p.patch_bias = zeros(d);
  p.cls_token = zeros(d);
  p.pos_embed = embedding(c.num_patches() + 1, d);
  for (std::size_t l = 0; l < c.layers; ++l) {
    LayerParams L;
    L.ln1_gain = ones(d);
    L.ln1_bias = zeros(d);
    L.q_weight = trunc(d, d);
    L.q_bias = zeros(d);
    L.k_weight = trunc(d, d);
    L.k_bias = zeros(d);
    L.v_weight = trunc(d, d);
    L.v_bias = zeros(d);
    L.o_weight = trunc(d, d);
    L.o_bias = zeros(d);
    L.ln2_gain = ones(d);
    L.ln2_bias = zeros(d);
    L.mlp1_weight = trunc(c.mlp_dim, d);
    L.mlp1_bias = zeros(c.mlp_dim);
    L.mlp2_weight = trunc(d, c.mlp_dim);
    L.mlp2_bias = zeros(d);
    p.layers.push_back(std::move(L));
  }
  p.norm_gain = ones(d);
  p.norm_bias = zeros(d);
  p.head_weight = trunc(c.num_classes, d);
  p.head_bias = zeros(c.num_classes);
  return p;
}

std::vector<Var> ParamVars::leaves() const {
  std::vector<Var> out{patch_weight, patch_bias, cls_token, pos_embed};
  for (const Layer& L : layers) {
    out.insert(out.end(), {L.ln1_gain, L.ln1_bias, L.q_weight, L.q_bias, L.k_weight,
                           L.k_bias, L.v_weight, L.v_bias, L.o_weight, L.o_bias,
                           L.ln2_gain, L.ln2_bias, L.mlp1_weight, L.mlp1_bias,
                           L.mlp2_weight, L.mlp2_bias});
  }
  out.insert(out.end(), {norm_gain, norm_bias, head_weight, head_bias});
  return out;
}

ParamVars bind_params(Tape& tape, const Params& p, bool trainable) {
  auto leaf = [&](const Tensor& t) { return trainable ? tape.variable(t) : tape.constant(t); };
  ParamVars v;
  v.patch_weight = leaf(p.patch_weight);
  v.patch_bias = leaf(p.patch_bias);
  v.cls_token = leaf(p.cls_token);
  v.pos_embed = leaf(p.pos_embed);
  for (const LayerParams& L : p.layers) {
    v.layers.push_back(ParamVars::Layer{
        leaf(L.ln1_gain), leaf(L.ln1_bias), leaf(L.q_weight), leaf(L.q_bias),
        leaf(L.k_weight), leaf(L.k_bias), leaf(L.v_weight), leaf(L.v_bias),
        leaf(L.o_weight), leaf(L.o_bias), leaf(L.ln2_gain), leaf(L.ln2_bias),
        leaf(L.mlp1_weight), leaf(L.mlp1_bias), leaf(L.mlp2_weight), leaf(L.mlp2_bias)});
  }
  v.norm_gain = leaf(p.norm_gain);
  v.norm_bias = leaf(p.norm_bias);
  v.head_weight = leaf(p.head_weight);
  v.head_bias = leaf(p.head_bias);
  return v;
}

// ---------------------------------------------------------------------------
// Patches and embedding

Tensor patchify(const Tensor& image, const ModelConfig& c) {
  if (image.rank() != 3 || image.dim(0) != c.image_h || image.dim(1) != c.image_w ||
      image.dim(2) != c.channels) {
    throw DimensionError("patchify: image shape " + shape_to_string(image.shape()) +
                         " does not match config " +
                         shape_to_string({c.image_h, c.image_w, c.channels}));
  }
  const std::size_t p = c.patch, ch = c.channels, gw = c.grid_w();
  Tensor out = Tensor::matrix(c.num_patches(), c.patch_dim());
  for (std::size_t i = 0; i < c.num_patches(); ++i) {
    const std::size_t y0 = (i / gw) * p, x0 = (i % gw) * p;
    std::size_t col = 0;
    for (std::size_t y = 0; y < p; ++y)
      for (std::size_t x = 0; x < p; ++x)
        for (std::size_t k = 0; k < ch; ++k)
          out.at(i, col++) = image[((y0 + y) * c.image_w + (x0 + x)) * ch + k];
  }
  return out;
}

Tensor unpatchify(const Tensor& patches, const ModelConfig& c) {
  if (patches.rank() != 2 || patches.rows() != c.num_patches() ||
      patches.cols() != c.patch_dim()) {
    throw DimensionError("unpatchify: patch matrix " + shape_to_string(patches.shape()) +
                         " does not match config");
  }
  const std::size_t p = c.patch, ch = c.channels, gw = c.grid_w();
  Tensor image({c.image_h, c.image_w, c.channels});
  for (std::size_t i = 0; i < c.num_patches(); ++i) {
    const std::size_t y0 = (i / gw) * p, x0 = (i % gw) * p;
    std::size_t col = 0;
    for (std::size_t y = 0; y < p; ++y)
      for (std::size_t x = 0; x < p; ++x)
        for (std::size_t k = 0; k < ch; ++k)
          image[((y0 + y) * c.image_w + (x0 + x)) * ch + k] = patches.at(i, col++);
  }
  return image;
}

Var embed(Var patches, const ParamVars& params, std::span<const std::size_t> kept) {
  const std::size_t total = params.pos_embed.value().rows() - 1;
  const std::size_t present = patches.value().rows();
  std::vector<std::size_t> pos_rows;
  pos_rows.reserve(present + 1);
  pos_rows.push_back(0);
  if (kept.empty()) {
    if (present != total) {
      throw DimensionError("embed: " + std::to_string(present) + " patches but " +
                           std::to_string(total) + " positions");
    }
    for (std::size_t i = 0; i < present; ++i) pos_rows.push_back(i + 1);
  } else {
    if (kept.size() != present) {
      throw DimensionError("embed: kept list length does not match patch rows");
    }
    for (std::size_t k : kept) {
      if (k >= total) throw DimensionError("embed: kept index out of range");
      pos_rows.push_back(k + 1);
    }
  }
  Var tokens = linear(patches, params.patch_weight, params.patch_bias);
  const std::vector<Var> parts{params.cls_token, tokens};
  Var seq = concat_rows(parts);
  return add(seq, gather_rows(params.pos_embed, pos_rows));
}

// ---------------------------------------------------------------------------
// Encoder

EncodeOutput encode(Var x0, const ParamVars& params, const ModelConfig& c,
                    bool collect_trace) {
  const std::size_t seq = x0.value().rows();
  if (seq < 2) throw DimensionError("encode: sequence needs a class token and at least one patch");
  if (x0.value().cols() != c.embed_dim) {
    throw DimensionError("encode: token width " + std::to_string(x0.value().cols()) +
                         " != embed_dim " + std::to_string(c.embed_dim));
  }
  const std::size_t dh = c.head_dim();
  const float attn_scale = 1.0f / std::sqrt(static_cast<float>(dh));
  const std::size_t cls_row[] = {0};

  EncodeOutput out;
  if (collect_trace) out.trace.attn.resize(params.layers.size());

  Var x = x0;
  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& L = params.layers[l];
    Var h = layer_norm(x, L.ln1_gain, L.ln1_bias);
    Var q = linear(h, L.q_weight, L.q_bias);
    Var k = linear(h, L.k_weight, L.k_bias);
    Var v = linear(h, L.v_weight, L.v_bias);
    std::vector<Var> heads;
    heads.reserve(c.heads);
    for (std::size_t hd = 0; hd < c.heads; ++hd) {
      const std::size_t b = hd * dh, e = b + dh;
      Var scores = scale(matmul_nt(slice_cols(q, b, e), slice_cols(k, b, e)), attn_scale);
      Var weights = softmax_rows(scores);
      if (collect_trace) out.trace.attn[l].push_back(weights.value());
      heads.push_back(matmul(weights, slice_cols(v, b, e)));
    }
    x = add(x, linear(concat_cols(heads), L.o_weight, L.o_bias));
    Var m = layer_norm(x, L.ln2_gain, L.ln2_bias);
    m = linear(gelu(linear(m, L.mlp1_weight, L.mlp1_bias)), L.mlp2_weight, L.mlp2_bias);
    x = add(x, m);
    Var cls = gather_rows(x, cls_row);
    out.cls_by_layer.push_back(cls);
    if (collect_trace) out.trace.cls_by_layer.push_back(cls.value());
  }
  Var cls = gather_rows(x, cls_row);
  out.logits = linear(layer_norm(cls, params.norm_gain, params.norm_bias), params.head_weight,
                      params.head_bias);
  if (collect_trace) out.trace.logits = out.logits.value();
  return out;
}

ForwardTrace forward_image(const Tensor& image, const Params& params, const ModelConfig& c) {
  Tape tape;
  ParamVars pv = bind_params(tape, params, false);
  Var x0 = embed(tape.constant(patchify(image, c)), pv);
  return encode(x0, pv, c, true).trace;
}

}  // namespace r2tk
