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
#include <functional>
#include <span>
#include <vector>

#include "r2tk/tensor.hpp"

namespace r2tk {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the
/// Tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  /// Accumulated gradient; a zero tensor of matching shape if none flowed.
  Tensor grad() const;
  bool requires_grad() const;
  const Shape& shape() const { return value().shape(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Records operations in topological order for one reverse sweep. Built per
/// training step and discarded afterwards.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  Var variable(Tensor value);

  /// Records an op output. `backward` receives the output gradient and must
  /// route it into the inputs with accumulate(). Omitted when no input
  /// requires a gradient.
  Var record(Tensor value, std::span<const Var> inputs, BackwardFn backward);

  /// Reverse sweep seeded with 1 (scalar outputs) or with `seed`.
  void backward(Var output);
  void backward(Var output, const Tensor& seed);

  void accumulate(Var target, const Tensor& grad);
  /// Zero-initialized gradient buffer for in-place accumulation, or nullptr
  /// when `target` does not require a gradient.
  Tensor* grad_buffer(Var target);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  Tensor grad(std::size_t id) const;
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  std::size_t size() const { return nodes_.size(); }
  /// Number of backward rules executed by the last reverse sweep.
  std::size_t backward_visits() const { return visits_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    bool has_grad = false;
    BackwardFn backward;
  };

  void check_owned(Var v) const;

  std::vector<Node> nodes_;
  std::size_t visits_ = 0;
  bool swept_ = false;
};

// ---------------------------------------------------------------------------
// Differentiable operations. All take matrix-shaped (rank-2) Vars unless noted;
// rank-1 values behave as 1×n rows.

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_nt(Var a, Var b);
/// x · weightᵀ + bias, bias a 1×out row broadcast over rows.
Var linear(Var x, Var weight, Var bias);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, float factor);
/// Adds a 1×n row to every row of an m×n matrix.
Var add_row(Var a, Var row);

Var softmax_rows(Var x);
Var layer_norm(Var x, Var gain, Var bias, float eps = 1e-6f);
Var gelu(Var x);

Var gather_rows(Var x, std::span<const std::size_t> indices);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var x, std::size_t begin, std::size_t end);
Var concat_cols(std::span<const Var> parts);
/// Column-wise mean over rows: m×n → 1×n.
Var mean_rows(Var x);
/// Sum of all entries → shape {1}.
Var sum(Var x);

/// Mean over rows of −log softmax(logits)[label]. Shape {1}.
Var cross_entropy_from_logits(Var logits, std::span<const int> labels);

struct SymEigOutput {
  Var values;     ///< shape {n}, ascending; differentiable
  Tensor vectors; ///< n×n, column j pairs with values[j]; not differentiable
};

/// Symmetric eigendecomposition (Jacobi, 64-bit internally). Backward covers
/// spectral functions only: dA = V·diag(dL/dλ)·Vᵀ.
SymEigOutput sym_eig(Var a);

}  // namespace r2tk
