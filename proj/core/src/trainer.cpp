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

#include "r2tk/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>

#include "r2tk/errors.hpp"
#include "r2tk/fusion.hpp"

namespace r2tk {

std::string to_string(ProbeInput input) {
  return input == ProbeInput::kPixels ? "pixels" : "embedding";
}

ProbeInput probe_input_from_string(const std::string& name) {
  if (name == "pixels") return ProbeInput::kPixels;
  if (name == "embedding") return ProbeInput::kEmbedding;
  throw ConfigError("train.probe_input must be 'pixels' or 'embedding'; got '" + name + "'");
}

void TrainConfig::validate() const {
  ib.validate();
  bdmm.validate();
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (ib.beta > 0.0 && batch_size < 2) {
    throw ConfigError("train.batch_size must be >= 2 while the IB term is enabled (ib.beta > 0)");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("train.momentum must lie in [0, 1)");
  if (total_steps == 0) throw ConfigError("train.total_steps must be positive");
  if (fixed_ratio && !(*fixed_ratio >= 0.0 && *fixed_ratio < 1.0)) {
    throw ConfigError("train.fixed_ratio must lie in [0, 1)");
  }
  if (eval_batch < 2) throw ConfigError("train.eval_batch must be >= 2");
}

std::string to_csv_row(const StepReport& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", r.step, r.loss_total,
                r.loss_ce_full, r.loss_ce_masked, r.entropy_full, r.entropy_masked, r.r_batch,
                r.accuracy);
  return buf;
}

Batch make_batch(std::span<const Sample> samples, std::span<const std::size_t> indices,
                 const ModelConfig& model) {
  Batch b;
  for (std::size_t i : indices) {
    if (i >= samples.size()) throw DimensionError("make_batch: sample index out of range");
    b.patches.push_back(patchify(samples[i].image, model));
    b.labels.push_back(samples[i].label);
  }
  return b;
}

double cosine_lr(std::size_t step, std::size_t total_steps, double base_lr) {
  if (total_steps == 0 || step > total_steps) {
    throw ConfigError("cosine_lr: step must lie in [0, total_steps]");
  }
  const double progress = static_cast<double>(step) / static_cast<double>(total_steps);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

namespace {

struct PassResult {
  Var logits;  // B×classes
  Var tokens;  // B×D
  std::vector<ForwardTrace> traces;
};

// Entropy of the batch tokens. Differentiable when β > 0; otherwise only the
// value is recorded for reporting.
struct EntropyTerm {
  std::optional<Var> var;
  double value = 0.0;
};

EntropyTerm entropy_term(Var tokens, const IbConfig& ib) {
  EntropyTerm out;
  if (tokens.value().rows() < 2) {
    if (ib.beta > 0.0) {
      throw ConfigError("the entropy term needs a batch of at least 2; "
                        "disable the IB term or raise the batch size");
    }
    return out;
  }
  if (ib.beta > 0.0) {
    out.var = feature_entropy(tokens, ib);
    out.value = out.var->value().item();
  } else {
    out.value = estimate_entropy(gram_gaussian(tokens.value(), ib), ib.alpha).value;
  }
  return out;
}

std::size_t argmax_row(const Tensor& m, std::size_t row) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols(); ++j)
    if (m.at(row, j) > m.at(row, best)) best = j;
  return best;
}

}  // namespace

StepGradients compute_step_gradients(const Params& params, const ModelConfig& model,
                                     const TrainConfig& config, const Batch& batch,
                                     bool two_pass, const MaskPlan* plan_override,
                                     const PassObserver& observer) {
  if (batch.size() == 0) throw DimensionError("compute_step_gradients: empty batch");
  Tape tape;
  const ParamVars pv = bind_params(tape, params, true);
  const IbConfig& ib = config.ib;
  const auto beta = static_cast<float>(ib.beta);

  auto run_pass = [&](bool trace, const MaskPlan* plan) {
    PassResult r;
    std::vector<Var> logits, tokens;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      Var x0;
      if (plan) {
        MaskedPatches mp = apply_mask(batch.patches[i], plan->masked[i]);
        x0 = embed(tape.constant(std::move(mp.patches)), pv, mp.kept);
      } else {
        x0 = embed(tape.constant(batch.patches[i]), pv);
      }
      EncodeOutput enc = encode(x0, pv, model, trace);
      logits.push_back(enc.logits);
      tokens.push_back(enc.cls_by_layer.back());
      if (trace) r.traces.push_back(std::move(enc.trace));
    }
    r.logits = concat_rows(logits);
    r.tokens = concat_rows(tokens);
    return r;
  };

  StepGradients out;
  out.two_pass = two_pass;

  if (observer) observer(1, params);
  PassResult full = run_pass(two_pass, nullptr);
  Var ce_full = cross_entropy_from_logits(full.logits, batch.labels);
  EntropyTerm h_full = entropy_term(full.tokens, ib);
  out.ce_full = ce_full.value().item();
  out.entropy_full = h_full.value;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (static_cast<int>(argmax_row(full.logits.value(), i)) == batch.labels[i]) ++out.correct;
  }

  Var total;
  if (!two_pass) {
    total = h_full.var ? add(ce_full, scale(*h_full.var, beta)) : ce_full;
  } else {
    // Selection signal only: traces hold detached copies of the weights.
    for (std::size_t i = 0; i < batch.size(); ++i) {
      out.importance.push_back(patch_importance(full.traces[i], i));
    }
    if (plan_override) {
      out.plan = *plan_override;
    } else {
      const double r = config.fixed_ratio ? *config.fixed_ratio
                                          : batch_mask_ratio(out.importance, config.bdmm);
      out.plan = select_mask(out.importance, r);
    }
    if (observer) observer(2, params);
    PassResult masked = run_pass(false, &out.plan);
    Var ce_masked = cross_entropy_from_logits(masked.logits, batch.labels);
    EntropyTerm h_masked = entropy_term(masked.tokens, ib);
    out.ce_masked = ce_masked.value().item();
    out.entropy_masked = h_masked.value;

    total = scale(add(ce_full, ce_masked), 0.5f);
    if (h_full.var && h_masked.var) {
      total = add(total, scale(add(*h_full.var, *h_masked.var), 0.5f * beta));
    }
  }

  out.loss_total = total.value().item();
  if (!std::isfinite(out.loss_total)) throw NumericError("non-finite loss");
  tape.backward(total);
  for (const Var& leaf : pv.leaves()) out.grads.push_back(leaf.grad());
  return out;
}

StepReport train_step(const Batch& batch, Params& params, SgdState& state,
                      const ModelConfig& model, const TrainConfig& config, std::size_t step,
                      const PassObserver& observer) {
  const bool two_pass = config.bdmm_enabled && step >= config.bdmm_warmup_steps;
  StepGradients g = compute_step_gradients(params, model, config, batch, two_pass, nullptr, observer);

  auto named = params.named();
  if (state.velocity.empty()) {
    for (const auto& [name, t] : named) state.velocity.emplace_back(t->shape(), 0.0f);
  }
  const auto lr = static_cast<float>(cosine_lr(step, config.total_steps, config.lr));
  const auto mu = static_cast<float>(config.momentum);
  for (std::size_t i = 0; i < named.size(); ++i) {
    auto p = named[i].second->data();
    auto v = state.velocity[i].data();
    auto d = g.grads[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      v[k] = mu * v[k] + d[k];
      p[k] -= lr * v[k];
    }
  }
  if (!params.all_finite()) {
    throw NumericError("parameters became non-finite at step " + std::to_string(step));
  }

  StepReport r;
  r.step = step;
  r.loss_total = g.loss_total;
  r.loss_ce_full = g.ce_full;
  r.loss_ce_masked = g.ce_masked;
  r.entropy_full = g.entropy_full;
  r.entropy_masked = g.entropy_masked;
  r.r_batch = g.two_pass ? g.plan.r_batch : 0.0;
  r.accuracy = static_cast<double>(g.correct) / static_cast<double>(batch.size());
  return r;
}

BatchSampler::BatchSampler(std::size_t dataset_size, std::size_t batch_size, std::uint64_t seed)
    : batch_size_(batch_size), order_(dataset_size), rng_(seed) {
  if (dataset_size == 0 || batch_size == 0) {
    throw ConfigError("BatchSampler: dataset and batch must be non-empty");
  }
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  reshuffle();
}

void BatchSampler::reshuffle() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  cursor_ = 0;
}

std::vector<std::size_t> BatchSampler::next() {
  std::vector<std::size_t> out;
  out.reserve(batch_size_);
  while (out.size() < batch_size_) {
    if (cursor_ == order_.size()) reshuffle();
    out.push_back(order_[cursor_++]);
  }
  return out;
}

TrainResult train(const ModelConfig& model, const TrainConfig& config,
                  std::span<const Sample> train_set,
                  const std::function<void(const StepReport&)>& on_step) {
  model.validate();
  config.validate();
  TrainResult result;
  result.params = init_params(model, config.seed);
  SgdState state;
  BatchSampler sampler(train_set.size(), config.batch_size, config.seed ^ 0x5A5A5A5AA5A5A5A5ull);
  for (std::size_t step = 0; step < config.total_steps; ++step) {
    const auto idx = sampler.next();
    const Batch batch = make_batch(train_set, idx, model);
    StepReport r = train_step(batch, result.params, state, model, config, step);
    if (on_step) on_step(r);
    result.reports.push_back(r);
  }
  return result;
}

Prediction predict(const Tensor& image, const Params& params, const ModelConfig& model) {
  ForwardTrace trace = forward_image(image, params, model);
  Prediction p;
  p.label = static_cast<int>(argmax_row(trace.logits, 0));
  p.logits = std::move(trace.logits);
  return p;
}

double accuracy(std::span<const Sample> samples, const Params& params, const ModelConfig& model) {
  if (samples.empty()) return 0.0;
  std::size_t correct = 0;
  for (const Sample& s : samples) {
    if (predict(s.image, params, model).label == s.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(samples.size());
}

std::vector<LayerInformation> probe_mi(std::span<const Sample> eval_batch, const Params& params,
                                       const ModelConfig& model, const IbConfig& ib,
                                       ProbeInput input) {
  const std::size_t n = eval_batch.size();
  if (n < 2) throw ConfigError("probe_mi: the evaluation batch needs at least 2 samples");

  std::vector<ForwardTrace> traces;
  traces.reserve(n);
  for (const Sample& s : eval_batch) traces.push_back(forward_image(s.image, params, model));

  Tensor x_features;
  if (input == ProbeInput::kPixels) {
    const std::size_t width = eval_batch[0].image.size();
    x_features = Tensor::matrix(n, width);
    for (std::size_t i = 0; i < n; ++i) {
      if (eval_batch[i].image.size() != width) throw DimensionError("probe_mi: image sizes differ");
      std::copy(eval_batch[i].image.data().begin(), eval_batch[i].image.data().end(),
                x_features.data().begin() + i * width);
    }
  } else {
    Tape tape;
    const ParamVars pv = bind_params(tape, params, false);
    std::vector<Tensor> rows;
    for (const Sample& s : eval_batch) {
      rows.push_back(embed(tape.constant(patchify(s.image, model)), pv).value());
    }
    const std::size_t width = rows[0].size();
    x_features = Tensor::matrix(n, width);
    for (std::size_t i = 0; i < n; ++i) {
      std::copy(rows[i].data().begin(), rows[i].data().end(), x_features.data().begin() + i * width);
    }
  }
  const Tensor kx = gram_gaussian(x_features, ib);
  std::vector<int> labels;
  for (const Sample& s : eval_batch) labels.push_back(s.label);
  const Tensor ky = label_gram(labels);

  std::vector<LayerInformation> out;
  for (std::size_t l = 0; l < model.layers; ++l) {
    Tensor tokens = Tensor::matrix(n, model.embed_dim);
    for (std::size_t i = 0; i < n; ++i) {
      const Tensor& cls = traces[i].cls_by_layer[l];
      std::copy(cls.data().begin(), cls.data().end(), tokens.data().begin() + i * model.embed_dim);
    }
    const Tensor kt = gram_gaussian(tokens, ib);
    LayerInformation info;
    info.layer = l + 1;
    info.i_xt = std::max(0.0, mutual_information(kx, kt, ib.alpha));
    info.i_ty = std::max(0.0, mutual_information(kt, ky, ib.alpha));
    out.push_back(info);
  }
  return out;
}

std::vector<MaskRecord> export_masks(std::span<const Sample> samples, const Params& params,
                                     const ModelConfig& model, const TrainConfig& config,
                                     std::size_t batch_size) {
  if (batch_size == 0) throw ConfigError("export_masks: batch size must be positive");
  std::vector<MaskRecord> out;
  for (std::size_t start = 0; start < samples.size(); start += batch_size) {
    const std::size_t end = std::min(samples.size(), start + batch_size);
    std::vector<PatchImportanceMap> maps;
    for (std::size_t i = start; i < end; ++i) {
      maps.push_back(patch_importance(forward_image(samples[i].image, params, model), samples[i].id));
    }
    const double r = config.fixed_ratio ? *config.fixed_ratio : batch_mask_ratio(maps, config.bdmm);
    const MaskPlan plan = select_mask(maps, r);
    for (std::size_t k = 0; k < maps.size(); ++k) {
      MaskRecord rec;
      rec.image_id = samples[start + k].id;
      rec.r_batch = r;
      rec.masked = plan.masked[k];
      for (std::size_t idx : rec.masked) rec.masked_roles.push_back(samples[start + k].patch_roles.at(idx));
      out.push_back(std::move(rec));
    }
  }
  return out;
}

}  // namespace r2tk
