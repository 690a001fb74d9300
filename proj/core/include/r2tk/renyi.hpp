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
#include <span>
#include <string>
#include <vector>

#include "r2tk/autodiff.hpp"
#include "r2tk/tensor.hpp"

namespace r2tk {

enum class BandwidthPolicy { kFixed, kMeanPairwise, kMedianPairwise };

std::string to_string(BandwidthPolicy policy);
BandwidthPolicy bandwidth_policy_from_string(const std::string& name);

struct IbConfig {
  double alpha = 1.01;
  double beta = 0.005;
  BandwidthPolicy bandwidth = BandwidthPolicy::kMeanPairwise;
  double sigma = 1.0;  ///< used by kFixed only
  /// Treat a distance-based σ as a constant in backward. When false the
  /// gradient includes dσ/dfeatures.
  bool freeze_bandwidth = false;

  void validate() const;
};

struct Bandwidth {
  double sigma = 1.0;
  /// Distance-based policy found no spread (all samples identical); σ = 1.
  bool fallback = false;
};

/// Kernel width for a batch of row features under the configured policy.
Bandwidth resolve_bandwidth(const Tensor& features, const IbConfig& config);

/// K[m][n] = exp(−‖t_m − t_n‖² / (2σ²)), evaluated in double.
Tensor gram_gaussian(const Tensor& features, double sigma);
Tensor gram_gaussian(const Tensor& features, const IbConfig& config,
                     Bandwidth* resolved = nullptr);
/// Differentiable in the features; σ is a constant.
Var gram_gaussian(Var features, double sigma);
/// Differentiable in the features and in σ (shape {1}).
Var gram_gaussian(Var features, Var sigma);

/// Mean or median pairwise Euclidean distance as a differentiable scalar.
/// Falls back to a constant 1 when every sample coincides.
Var pairwise_bandwidth(Var features, BandwidthPolicy policy);

/// K[m][n] = 1 when labels agree, else 0.
Tensor label_gram(std::span<const int> labels);

/// Normalized Gram matrix, its spectrum and H_α in bits, all in double.
struct EntropyEstimate {
  std::size_t n = 0;
  std::vector<double> gram;         ///< A = K / tr(K), n×n row-major
  std::vector<double> eigenvalues;  ///< ascending, negatives clamped to 0
  double value = 0.0;
};

/// Eigenvalues below this are left out of the power sum.
inline constexpr double kEigenFloor = 1e-12;

EntropyEstimate estimate_entropy(std::span<const double> gram, std::size_t n, double alpha);
EntropyEstimate estimate_entropy(const Tensor& gram, double alpha);

/// H_α of a Gram matrix, differentiable through the trace normalization and
/// the spectrum. Shape {1}.
Var renyi_entropy(Var gram, double alpha);

/// H(A) + H(B) − H(A∘B / tr(A∘B)) on trace-normalized inputs. Not clamped.
double mutual_information(const Tensor& gram_a, const Tensor& gram_b, double alpha);
double mutual_information(std::span<const double> gram_a, std::span<const double> gram_b,
                          std::size_t n, double alpha);

/// H_α of a batch of feature rows through a Gaussian Gram matrix. σ follows
/// the configured policy and is differentiated through unless frozen.
Var feature_entropy(Var features, const IbConfig& config);

struct IbLoss {
  Var total;
  Var cross_entropy;
  Var entropy;
};

/// CE(logits, labels) + β·H_α(tokens). Needs at least two samples.
IbLoss ib_loss(Var logits, std::span<const int> labels, Var class_tokens, const IbConfig& config);

}  // namespace r2tk
