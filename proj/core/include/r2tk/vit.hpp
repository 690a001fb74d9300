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
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "r2tk/autodiff.hpp"
#include "r2tk/tensor.hpp"

namespace r2tk {

/// Weight initialization. kFanIn: truncated normal with std 1/√fan_in for
/// projection weights. kVit: std 0.02 for every weight. Embeddings use std
/// 0.02 under both.
enum class InitScheme { kFanIn, kVit };

std::string to_string(InitScheme scheme);
InitScheme init_scheme_from_string(const std::string& name);

struct ModelConfig {
  std::size_t image_h = 16;
  std::size_t image_w = 16;
  std::size_t channels = 1;
  std::size_t patch = 4;
  std::size_t embed_dim = 32;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t mlp_dim = 64;
  std::size_t num_classes = 4;
  InitScheme init = InitScheme::kFanIn;

  std::size_t num_patches() const { return (image_h / patch) * (image_w / patch); }
  std::size_t grid_w() const { return image_w / patch; }
  std::size_t patch_dim() const { return patch * patch * channels; }
  std::size_t head_dim() const { return embed_dim / heads; }

  /// Throws ConfigError naming the offending field.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct LayerParams {
  Tensor ln1_gain, ln1_bias;
  Tensor q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, o_weight, o_bias;
  Tensor ln2_gain, ln2_bias;
  Tensor mlp1_weight, mlp1_bias, mlp2_weight, mlp2_bias;
};

/// Model parameters. Weights follow the (out × in) convention: y = x·Wᵀ + b.
struct Params {
  Tensor patch_weight;  ///< D × (P²·C)
  Tensor patch_bias;    ///< 1 × D
  Tensor cls_token;     ///< 1 × D
  Tensor pos_embed;     ///< (N+1) × D
  std::vector<LayerParams> layers;
  Tensor norm_gain, norm_bias;
  Tensor head_weight;   ///< classes × D
  Tensor head_bias;     ///< 1 × classes

  /// Stable (name, tensor) listing used by the optimizer and checkpoints.
  std::vector<std::pair<std::string, Tensor*>> named();
  std::vector<std::pair<std::string, const Tensor*>> named() const;

  std::size_t parameter_count() const;
  bool all_finite() const;
  /// FNV-1a over the raw float bytes of every tensor, in named() order.
  std::uint64_t checksum() const;
};

std::size_t parameter_count(const ModelConfig& config);

/// Truncated-normal (cut at 2σ) weights and embeddings per config.init;
/// zero biases and class token; unit layer-norm gains.
Params init_params(const ModelConfig& config, std::uint64_t seed);

/// Params registered as gradient-tracking leaves of one tape.
struct ParamVars {
  Var patch_weight, patch_bias, cls_token, pos_embed;
  struct Layer {
    Var ln1_gain, ln1_bias;
    Var q_weight, q_bias, k_weight, k_bias, v_weight, v_bias, o_weight, o_bias;
    Var ln2_gain, ln2_bias;
    Var mlp1_weight, mlp1_bias, mlp2_weight, mlp2_bias;
  };
  std::vector<Layer> layers;
  Var norm_gain, norm_bias, head_weight, head_bias;

  /// Leaves in the same order as Params::named().
  std::vector<Var> leaves() const;
};

/// `trainable` = false binds constants, for inference-only tapes.
ParamVars bind_params(Tape& tape, const Params& params, bool trainable = true);

/// Per-layer, per-head attention maps and class-token snapshots.
struct ForwardTrace {
  std::vector<std::vector<Tensor>> attn;  ///< attn[l][k]: S×S row-stochastic
  std::vector<Tensor> cls_by_layer;       ///< 1×D after each block
  Tensor logits;                          ///< 1×classes

  std::size_t layer_count() const { return attn.size(); }
};

/// H×W×C image → N×(P²·C); patches in row-major grid order, each flattened
/// row-major over (y, x, channel).
Tensor patchify(const Tensor& image, const ModelConfig& config);
Tensor unpatchify(const Tensor& patches, const ModelConfig& config);

/// [cls ‖ patches·Wᵀ + b] + pos. With `kept` non-empty, only those patch
/// rows are present in `patches` and positional rows {0} ∪ {k+1} are used.
Var embed(Var patches, const ParamVars& params, std::span<const std::size_t> kept = {});

struct EncodeOutput {
  Var logits;                     ///< 1×classes
  std::vector<Var> cls_by_layer;  ///< 1×D after each block (pre final norm)
  ForwardTrace trace;             ///< populated when requested
};

/// Pre-norm transformer encoder plus classification head on the normalized
/// class token.
EncodeOutput encode(Var x0, const ParamVars& params, const ModelConfig& config,
                    bool collect_trace);

/// Inference-only forward of one image, full sequence.
ForwardTrace forward_image(const Tensor& image, const Params& params,
                           const ModelConfig& config);

}  // namespace r2tk
