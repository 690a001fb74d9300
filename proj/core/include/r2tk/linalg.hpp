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
#include <vector>

namespace r2tk {

struct JacobiOptions {
  int max_sweeps = 100;
  /// Convergence when the off-diagonal Frobenius norm drops below
  /// tolerance times the Frobenius norm of the input.
  double tolerance = 1e-10;
  std::size_t max_dim = 512;
};

/// Eigendecomposition of a real symmetric matrix. `vectors` is n×n row-major
/// with eigenvector j stored in column j; values are ascending.
struct SymEigen {
  std::size_t n = 0;
  std::vector<double> values;
  std::vector<double> vectors;
  int sweeps = 0;

  double vector_entry(std::size_t row, std::size_t j) const { return vectors[row * n + j]; }
};

/// Cyclic Jacobi eigensolver. The input is symmetrized as (A+Aᵀ)/2 first.
/// Throws DimensionError for bad sizes and NumericError on non-convergence
/// or non-finite input.
SymEigen jacobi_eigen(std::span<const double> a, std::size_t n,
                      const JacobiOptions& options = {});

/// V·diag(w)·Vᵀ, the gradient of a spectral function whose derivative with
/// respect to each eigenvalue is w.
std::vector<double> spectral_gradient(const SymEigen& eig, std::span<const double> w);

}  // namespace r2tk
