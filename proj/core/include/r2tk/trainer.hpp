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
#include <functional>
#include <optional>
#include <random>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "r2tk/bdmm.hpp"
#include "r2tk/renyi.hpp"
#include "r2tk/synth.hpp"
#include "r2tk/vit.hpp"

namespace r2tk {

/// What stands in for X in the information-plane probe.
enum class ProbeInput { kPixels, kEmbedding };

std::string to_string(ProbeInput input);
ProbeInput probe_input_from_string(const std::string& name);

struct TrainConfig {
  std::size_t batch_size = 24;
  double lr = 1e-2;
  double momentum = 0.9;
  std::size_t total_steps = 500;
  std::uint64_t seed = 0;
  bool bdmm_enabled = true;
  /// Steps run single-pass before masking starts.
  std::size_t bdmm_warmup_steps = 0;
  /// Replaces the batch-adaptive ratio with a constant one when set.
  std::optional<double> fixed_ratio;
  /// Samples per probe / mask-export batch.
  std::size_t eval_batch = 64;
  ProbeInput probe_input = ProbeInput::kPixels;
  IbConfig ib;
  BdmmConfig bdmm;

  void validate() const;
};

struct StepReport {
  std::size_t step = 0;
  double loss_total = 0.0;
  double loss_ce_full = 0.0;
  double loss_ce_masked = 0.0;
  double entropy_full = 0.0;
  double entropy_masked = 0.0;
  double r_batch = 0.0;
  double accuracy = 0.0;
};

inline constexpr const char* kStepCsvHeader =
    "step,loss_total,loss_ce_full,loss_ce_masked,entropy_full,entropy_masked,r_batch,acc";

std::string to_csv_row(const StepReport& report);

/// Patch matrices and labels for one optimization step.
struct Batch {
  std::vector<Tensor> patches;  ///< N×(P²·C) each
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

Batch make_batch(std::span<const Sample> samples, std::span<const std::size_t> indices,
                 const ModelConfig& model);

/// base_lr · ½ · (1 + cos(π·step/total_steps))
double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr);

/// Loss, gradients and diagnostics of the (possibly two-pass) objective
/// ½[CE_full + CE_masked] + β·½[H_full + H_masked], or CE + β·H single-pass.
struct StepGradients {
  double loss_total = 0.0;
  double ce_full = 0.0;
  double ce_masked = 0.0;
  double entropy_full = 0.0;
  double entropy_masked = 0.0;
  std::size_t correct = 0;
  bool two_pass = false;
  MaskPlan plan;
  std::vector<PatchImportanceMap> importance;
  std::vector<Tensor> grads;  ///< in Params::named() order
};

/// Called with (pass index, params) right before each encoder pass.
using PassObserver = std::function<void(int, const Params&)>;

/// `plan_override` replaces mask selection (used to hold the mask fixed).
StepGradients compute_step_gradients(const Params& params, const ModelConfig& model,
                                     const TrainConfig& config, const Batch& batch,
                                     bool two_pass, const MaskPlan* plan_override = nullptr,
                                     const PassObserver& observer = {});

/// SGD-with-momentum state (one velocity buffer per parameter tensor).
struct SgdState {
  std::vector<Tensor> velocity;
};

/// One full training step at index `step`: forward(s), loss, backward,
/// momentum update with the cosine-decayed learning rate.
StepReport train_step(const Batch& batch, Params& params, SgdState& state,
                      const ModelConfig& model, const TrainConfig& config, std::size_t step,
                      const PassObserver& observer = {});

/// Epoch-shuffled sampler that always yields full batches.
class BatchSampler {
 public:
  BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed);
  std::vector<std::size_t> next();

 private:
  void reshuffle();

  std::size_t batch_size_;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  std::mt19937_64 rng_;
};

struct TrainResult {
  Params params;
  std::vector<StepReport> reports;
};

/// Initializes params from config.seed and runs total_steps steps.
TrainResult train(const ModelConfig& model, const TrainConfig& config,
                  std::span<const Sample> train_set,
                  const std::function<void(const StepReport&)>& on_step = {});

struct Prediction {
  int label = 0;
  Tensor logits;
};

/// Single unmasked forward; masking never runs at inference.
Prediction predict(const Tensor& image, const Params& params, const ModelConfig& model);
double accuracy(std::span<const Sample> samples, const Params& params, const ModelConfig& model);

struct LayerInformation {
  std::size_t layer = 0;
  double i_xt = 0.0;
  double i_ty = 0.0;
};

/// Per-layer I(X;T_l) and I(T_l;Y) over one evaluation batch; T_l is the
/// class token after block l, X the raw pixels (or the embedded sequence),
/// Y a same-label kernel. Values are clamped at 0.
std::vector<LayerInformation> probe_mi(std::span<const Sample> eval_batch, const Params& params,
                                       const ModelConfig& model, const IbConfig& ib,
                                       ProbeInput input = ProbeInput::kPixels);

struct MaskRecord {
  std::size_t image_id = 0;
  double r_batch = 0.0;
  std::vector<std::size_t> masked;
  std::vector<PatchRole> masked_roles;
};

/// Pass 1 + fusion + mask ratio (or the fixed ratio) + selection over the
/// samples in consecutive batches of `batch_size`.
std::vector<MaskRecord> export_masks(std::span<const Sample> samples, const Params& params,
                                     const ModelConfig& model, const TrainConfig& config,
                                     std::size_t batch_size);

}  // namespace r2tk
