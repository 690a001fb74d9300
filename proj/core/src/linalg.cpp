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

#include "r2tk/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "r2tk/errors.hpp"

namespace r2tk {

namespace {

double off_diagonal_norm(const std::vector<double>& a, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) sum += a[i * n + j] * a[i * n + j];
  return std::sqrt(sum);
}

}  // namespace

SymEigen jacobi_eigen(std::span<const double> input, std::size_t n,
                      const JacobiOptions& options) {
  if (n == 0 || input.size() != n * n) {
    throw DimensionError("jacobi_eigen: expected a square matrix of " +
                         std::to_string(n) + "x" + std::to_string(n) + ", got " +
                         std::to_string(input.size()) + " values");
  }
  if (n > options.max_dim) {
    throw DimensionError("jacobi_eigen: dimension " + std::to_string(n) +
                         " exceeds cap " + std::to_string(options.max_dim));
  }

  std::vector<double> a(n * n);
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double v = 0.5 * (input[i * n + j] + input[j * n + i]);
      if (!std::isfinite(v)) throw NumericError("jacobi_eigen: non-finite input");
      a[i * n + j] = v;
      frob += v * v;
    }
  }
  frob = std::sqrt(frob);

  std::vector<double> v(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) v[i * n + i] = 1.0;

  const double threshold = options.tolerance * frob;
  int sweep = 0;
  while (off_diagonal_norm(a, n) > threshold) {
    if (sweep == options.max_sweeps) {
      throw NumericError("jacobi_eigen: no convergence after " +
                         std::to_string(options.max_sweeps) + " sweeps");
    }
    ++sweep;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;

        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k * n + p];
          const double vkq = v[k * n + q];
          v[k * n + p] = c * vkp - s * vkq;
          v[k * n + q] = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return a[i * n + i] < a[j * n + j];
  });

  SymEigen out;
  out.n = n;
  out.sweeps = sweep;
  out.values.resize(n);
  out.vectors.resize(n * n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t src = order[j];
    out.values[j] = a[src * n + src];
    for (std::size_t k = 0; k < n; ++k) out.vectors[k * n + j] = v[k * n + src];
  }
  return out;
}

std::vector<double> spectral_gradient(const SymEigen& eig, std::span<const double> w) {
  const std::size_t n = eig.n;
  if (w.size() != n) throw DimensionError("spectral_gradient: weight length mismatch");
  std::vector<double> g(n * n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    if (w[m] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) {
      const double vi = eig.vector_entry(i, m) * w[m];
      for (std::size_t j = 0; j < n; ++j) g[i * n + j] += vi * eig.vector_entry(j, m);
    }
  }
  return g;
}

}  // namespace r2tk
