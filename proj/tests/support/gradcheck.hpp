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

// Central finite-difference gradient checker for scalar tape functions.

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "r2tk/autodiff.hpp"
#include "r2tk/tensor.hpp"

namespace r2tk::testing {

/// Builds a scalar (shape {1}) output from the given input Vars.
using ScalarFn = std::function<Var(std::span<const Var>)>;

struct GradCheck {
  double max_rel_error = 0.0;  ///< max_i |a_i − n_i| / max(1, |n_i|)
  double max_abs_error = 0.0;
  std::size_t checked = 0;
};

inline double evaluate(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.constant(t));
  return fn(vars).value().item();
}

inline std::vector<Tensor> analytic_grads(const ScalarFn& fn, const std::vector<Tensor>& inputs) {
  Tape tape;
  std::vector<Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.variable(t));
  tape.backward(fn(vars));
  std::vector<Tensor> grads;
  for (const Var& v : vars) grads.push_back(v.grad());
  return grads;
}

/// Compares the tape gradient with (f(x+ε) − f(x−ε)) / 2ε entry by entry.
/// `only` restricts the check to a subset of inputs when non-empty.
inline GradCheck check_gradients(const ScalarFn& fn, std::vector<Tensor> inputs,
                                 double eps = 1e-3, std::vector<std::size_t> only = {}) {
  const std::vector<Tensor> grads = analytic_grads(fn, inputs);
  GradCheck out;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    if (!only.empty() && std::find(only.begin(), only.end(), k) == only.end()) continue;
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const float saved = inputs[k][i];
      inputs[k][i] = static_cast<float>(saved + eps);
      const double up = evaluate(fn, inputs);
      inputs[k][i] = static_cast<float>(saved - eps);
      const double down = evaluate(fn, inputs);
      inputs[k][i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double err = std::abs(numeric - grads[k][i]);
      out.max_abs_error = std::max(out.max_abs_error, err);
      out.max_rel_error = std::max(out.max_rel_error, err / std::max(1.0, std::abs(numeric)));
      ++out.checked;
    }
  }
  return out;
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> n(0.0, scale);
  for (float& v : t.data()) v = static_cast<float>(n(rng));
  return t;
}

/// Σ out ⊙ weights: turns a tensor-valued op into a scalar with a
/// non-degenerate gradient.
inline Var project(Var out, const Tensor& weights) {
  Tape& tape = out.tape();
  return sum(mul(out, tape.constant(weights)));
}

}  // namespace r2tk::testing
