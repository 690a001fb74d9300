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

#include "r2tk/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "r2tk/errors.hpp"
#include "r2tk/linalg.hpp"

namespace r2tk {

// ---------------------------------------------------------------------------
// Var / Tape

const Tensor& Var::value() const { return tape_->value(id_); }
Tensor Var::grad() const { return tape_->grad(id_); }
bool Var::requires_grad() const { return tape_->requires_grad(id_); }

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, false, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Tensor value) {
  nodes_.push_back(Node{std::move(value), {}, true, false, {}});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owned(Var v) const {
  if (v.tape_ != this || v.id_ >= nodes_.size()) {
    throw std::logic_error("Var does not belong to this tape");
  }
}

Var Tape::record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  bool needs = false;
  for (const Var& in : inputs) {
    check_owned(in);
    needs = needs || nodes_[in.id_].requires_grad;
  }
  if (!value.all_finite()) {
    throw NumericError("non-finite value produced by op with output shape " +
                       shape_to_string(value.shape()));
  }
  nodes_.push_back(Node{std::move(value), {}, needs, false,
                        needs ? std::move(backward) : BackwardFn{}});
  return Var(this, nodes_.size() - 1);
}

Tensor Tape::grad(std::size_t id) const {
  const Node& n = nodes_[id];
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0f);
}

Tensor* Tape::grad_buffer(Var target) {
  check_owned(target);
  Node& n = nodes_[target.id_];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0f);
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::accumulate(Var target, const Tensor& grad) {
  Tensor* buf = grad_buffer(target);
  if (!buf) return;
  if (buf->size() != grad.size()) {
    throw DimensionError("gradient shape " + shape_to_string(grad.shape()) +
                         " does not match value shape " +
                         shape_to_string(buf->shape()));
  }
  auto dst = buf->data();
  auto src = grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var output) {
  check_owned(output);
  if (nodes_[output.id_].value.size() != 1) {
    throw DimensionError("backward() without a seed needs a scalar output, got " +
                         shape_to_string(nodes_[output.id_].value.shape()));
  }
  backward(output, Tensor(nodes_[output.id_].value.shape(), 1.0f));
}

void Tape::backward(Var output, const Tensor& seed) {
  check_owned(output);
  if (swept_) throw std::logic_error("Tape::backward called twice on one tape");
  swept_ = true;
  require_same_shape(nodes_[output.id_].value, seed, "backward seed");
  accumulate(output, seed);
  visits_ = 0;
  for (std::size_t i = output.id_ + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || !n.has_grad) continue;
    // Copy: the rule may grow other nodes' buffers but never this one's.
    const Tensor g = n.grad;
    n.backward(*this, g);
    ++visits_;
  }
}

// ---------------------------------------------------------------------------
// Kernels

namespace {

// C = op(A)·op(B) with op(A): m×k, op(B): k×n; accumulation in double.
void gemm(bool ta, bool tb, std::size_t m, std::size_t n, std::size_t k,
          const float* a, const float* b, float* c, bool accumulate) {
  std::vector<double> acc(n);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = ta ? a[p * m + i] : a[i * k + p];
      if (aip == 0.0) continue;
      if (tb) {
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * b[j * k + p];
      } else {
        const float* brow = b + p * n;
        for (std::size_t j = 0; j < n; ++j) acc[j] += aip * brow[j];
      }
    }
    float* crow = c + i * n;
    for (std::size_t j = 0; j < n; ++j) {
      crow[j] = accumulate ? crow[j] + static_cast<float>(acc[j])
                           : static_cast<float>(acc[j]);
    }
  }
}

std::string op_shapes(const char* op, const Tensor& a, const Tensor& b) {
  return std::string(op) + ": incompatible shapes " + shape_to_string(a.shape()) +
         " and " + shape_to_string(b.shape());
}

std::vector<Var> inputs_of(std::initializer_list<Var> vs) { return std::vector<Var>(vs); }

}  // namespace

// ---------------------------------------------------------------------------
// Linear algebra ops

Var matmul(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows(), k = A.cols(), n = B.cols();
  if (B.rows() != k) throw DimensionError(op_shapes("matmul", A, B));
  Tensor C = Tensor::matrix(m, n);
  gemm(false, false, m, n, k, A.data().data(), B.data().data(), C.data().data(), false);
  return a.tape().record(std::move(C), inputs_of({a, b}),
                         [a, b, m, n, k](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      gemm(false, true, m, k, n, g.data().data(), b.value().data().data(),
           ga->data().data(), true);
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      gemm(true, false, k, n, m, a.value().data().data(), g.data().data(),
           gb->data().data(), true);
    }
  });
}

Var matmul_nt(Var a, Var b) {
  const Tensor& A = a.value();
  const Tensor& B = b.value();
  const std::size_t m = A.rows(), k = A.cols(), n = B.rows();
  if (B.cols() != k) throw DimensionError(op_shapes("matmul_nt", A, B));
  Tensor C = Tensor::matrix(m, n);
  gemm(false, true, m, n, k, A.data().data(), B.data().data(), C.data().data(), false);
  return a.tape().record(std::move(C), inputs_of({a, b}),
                         [a, b, m, n, k](Tape& t, const Tensor& g) {
    // C = A Bᵀ: dA = G B, dB = Gᵀ A
    if (Tensor* ga = t.grad_buffer(a)) {
      gemm(false, false, m, k, n, g.data().data(), b.value().data().data(),
           ga->data().data(), true);
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      gemm(true, false, n, k, m, g.data().data(), a.value().data().data(),
           gb->data().data(), true);
    }
  });
}

Var linear(Var x, Var weight, Var bias) {
  const Tensor& W = weight.value();
  const Tensor& b = bias.value();
  if (b.size() != W.rows()) {
    throw DimensionError(op_shapes("linear bias", W, b));
  }
  return add_row(matmul_nt(x, weight), bias);
}

// ---------------------------------------------------------------------------
// Elementwise ops

Var add(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
  return a.tape().record(std::move(out), inputs_of({a, b}),
                         [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bv[i];
  return a.tape().record(std::move(out), inputs_of({a, b}),
                         [a, b](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (Tensor* gb = t.grad_buffer(b)) {
      auto d = gb->data();
      auto s = g.data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= s[i];
    }
  });
}

Var mul(Var a, Var b) {
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bv = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bv[i];
  return a.tape().record(std::move(out), inputs_of({a, b}),
                         [a, b](Tape& t, const Tensor& g) {
    auto s = g.data();
    if (Tensor* ga = t.grad_buffer(a)) {
      auto d = ga->data();
      auto bv = b.value().data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i] * bv[i];
    }
    if (Tensor* gb = t.grad_buffer(b)) {
      auto d = gb->data();
      auto av = a.value().data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += s[i] * av[i];
    }
  });
}

Var scale(Var a, float factor) {
  Tensor out = a.value();
  for (float& v : out.data()) v *= factor;
  return a.tape().record(std::move(out), inputs_of({a}),
                         [a, factor](Tape& t, const Tensor& g) {
    if (Tensor* ga = t.grad_buffer(a)) {
      auto d = ga->data();
      auto s = g.data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += factor * s[i];
    }
  });
}

Var add_row(Var a, Var row) {
  const Tensor& A = a.value();
  const std::size_t m = A.rows(), n = A.cols();
  if (row.value().size() != n) throw DimensionError(op_shapes("add_row", A, row.value()));
  Tensor out = A;
  auto r = row.value().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out.at(i, j) += r[j];
  return a.tape().record(std::move(out), inputs_of({a, row}),
                         [a, row, m, n](Tape& t, const Tensor& g) {
    t.accumulate(a, g);
    if (Tensor* gr = t.grad_buffer(row)) {
      auto d = gr->data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) d[j] += g.at(i, j);
    }
  });
}

// ---------------------------------------------------------------------------
// Nonlinearities

Var softmax_rows(Var x) {
  const Tensor& X = x.value();
  require_matrix(X, "softmax_rows");
  const std::size_t m = X.rows(), n = X.cols();
  Tensor Y = Tensor::matrix(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    float mx = X.at(i, 0);
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, X.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += std::exp(static_cast<double>(X.at(i, j)) - mx);
    for (std::size_t j = 0; j < n; ++j) {
      Y.at(i, j) = static_cast<float>(std::exp(static_cast<double>(X.at(i, j)) - mx) / total);
    }
  }
  Tensor saved = Y;
  return x.tape().record(std::move(Y), inputs_of({x}),
                         [x, y = std::move(saved), m, n](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < n; ++j) dot += static_cast<double>(g.at(i, j)) * y.at(i, j);
      for (std::size_t j = 0; j < n; ++j) {
        gx->at(i, j) += static_cast<float>(y.at(i, j) * (g.at(i, j) - dot));
      }
    }
  });
}

Var layer_norm(Var x, Var gain, Var bias, float eps) {
  const Tensor& X = x.value();
  require_matrix(X, "layer_norm");
  const std::size_t m = X.rows(), n = X.cols();
  if (gain.value().size() != n || bias.value().size() != n) {
    throw DimensionError(op_shapes("layer_norm gain", X, gain.value()));
  }
  Tensor normed = Tensor::matrix(m, n);
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += X.at(i, j);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = X.at(i, j) - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < n; ++j) {
      normed.at(i, j) = static_cast<float>((X.at(i, j) - mean) * inv_std[i]);
    }
  }
  Tensor Y = normed;
  auto gv = gain.value().data();
  auto bv = bias.value().data();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) Y.at(i, j) = Y.at(i, j) * gv[j] + bv[j];

  return x.tape().record(
      std::move(Y), inputs_of({x, gain, bias}),
      [x, gain, bias, m, n, xhat = std::move(normed), inv_std = std::move(inv_std)](
          Tape& t, const Tensor& g) {
        auto gv = gain.value().data();
        if (Tensor* gx = t.grad_buffer(x)) {
          std::vector<double> dy(n);
          for (std::size_t i = 0; i < m; ++i) {
            double mean_dy = 0.0, mean_dy_xhat = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
              dy[j] = static_cast<double>(g.at(i, j)) * gv[j];
              mean_dy += dy[j];
              mean_dy_xhat += dy[j] * xhat.at(i, j);
            }
            mean_dy /= static_cast<double>(n);
            mean_dy_xhat /= static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
              gx->at(i, j) += static_cast<float>(
                  inv_std[i] * (dy[j] - mean_dy - xhat.at(i, j) * mean_dy_xhat));
            }
          }
        }
        if (Tensor* gg = t.grad_buffer(gain)) {
          auto d = gg->data();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) d[j] += g.at(i, j) * xhat.at(i, j);
        }
        if (Tensor* gb = t.grad_buffer(bias)) {
          auto d = gb->data();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) d[j] += g.at(i, j);
        }
      });
}

Var gelu(Var x) {
  // Exact form: x·Φ(x).
  Tensor Y = x.value();
  for (float& v : Y.data()) {
    const double d = v;
    v = static_cast<float>(0.5 * d * (1.0 + std::erf(d / std::numbers::sqrt2)));
  }
  return x.tape().record(std::move(Y), inputs_of({x}), [x](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    auto xv = x.value().data();
    auto d = gx->data();
    auto s = g.data();
    const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double v = xv[i];
      const double cdf = 0.5 * (1.0 + std::erf(v / std::numbers::sqrt2));
      const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
      d[i] += static_cast<float>(s[i] * (cdf + v * pdf));
    }
  });
}

// ---------------------------------------------------------------------------
// Structural ops

Var gather_rows(Var x, std::span<const std::size_t> indices) {
  const Tensor& X = x.value();
  require_matrix(X, "gather_rows");
  const std::size_t n = X.cols();
  Tensor out = Tensor::matrix(indices.size(), n);
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= X.rows()) {
      throw DimensionError("gather_rows: index " + std::to_string(indices[r]) +
                           " out of range for " + shape_to_string(X.shape()));
    }
    std::copy_n(X.data().begin() + indices[r] * n, n, out.data().begin() + r * n);
  }
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return x.tape().record(std::move(out), inputs_of({x}),
                         [x, idx = std::move(idx), n](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < n; ++j) gx->at(idx[r], j) += g.at(r, j);
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no inputs");
  const std::size_t n = parts[0].value().cols();
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().cols() != n) {
      throw DimensionError(op_shapes("concat_rows", parts[0].value(), p.value()));
    }
    total += p.value().rows();
  }
  Tensor out = Tensor::matrix(total, n);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    std::copy(p.value().data().begin(), p.value().data().end(),
              out.data().begin() + offset * n);
    offset += p.value().rows();
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), ins, [ins, n](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : ins) {
      const std::size_t rows = p.value().rows();
      if (Tensor* gp = t.grad_buffer(p)) {
        auto d = gp->data();
        for (std::size_t i = 0; i < rows * n; ++i) d[i] += g[offset * n + i];
      }
      offset += rows;
    }
  });
}

Var slice_cols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& X = x.value();
  require_matrix(X, "slice_cols");
  if (begin >= end || end > X.cols()) {
    throw DimensionError("slice_cols: bad range [" + std::to_string(begin) + "," +
                         std::to_string(end) + ") for " + shape_to_string(X.shape()));
  }
  const std::size_t m = X.rows(), w = end - begin;
  Tensor out = Tensor::matrix(m, w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out.at(i, j) = X.at(i, begin + j);
  return x.tape().record(std::move(out), inputs_of({x}),
                         [x, begin, m, w](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) gx->at(i, begin + j) += g.at(i, j);
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t m = parts[0].value().rows();
  std::size_t total = 0;
  for (const Var& p : parts) {
    if (p.value().rows() != m) {
      throw DimensionError(op_shapes("concat_cols", parts[0].value(), p.value()));
    }
    total += p.value().cols();
  }
  Tensor out = Tensor::matrix(m, total);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const std::size_t w = p.value().cols();
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) out.at(i, offset + j) = p.value().at(i, j);
    offset += w;
  }
  std::vector<Var> ins(parts.begin(), parts.end());
  return parts[0].tape().record(std::move(out), ins, [ins, m](Tape& t, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : ins) {
      const std::size_t w = p.value().cols();
      if (Tensor* gp = t.grad_buffer(p)) {
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < w; ++j) gp->at(i, j) += g.at(i, offset + j);
      }
      offset += w;
    }
  });
}

Var mean_rows(Var x) {
  const Tensor& X = x.value();
  const std::size_t m = X.rows(), n = X.cols();
  Tensor out = Tensor::matrix(1, n);
  for (std::size_t j = 0; j < n; ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i) s += X.at(i, j);
    out[j] = static_cast<float>(s / static_cast<double>(m));
  }
  return x.tape().record(std::move(out), inputs_of({x}), [x, m, n](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    const float inv = 1.0f / static_cast<float>(m);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) gx->at(i, j) += g[j] * inv;
  });
}

Var sum(Var x) {
  double s = 0.0;
  for (float v : x.value().data()) s += v;
  return x.tape().record(Tensor::scalar(static_cast<float>(s)), inputs_of({x}),
                         [x](Tape& t, const Tensor& g) {
    Tensor* gx = t.grad_buffer(x);
    const float gs = g[0];
    for (float& v : gx->data()) v += gs;
  });
}

Var cross_entropy_from_logits(Var logits, std::span<const int> labels) {
  const Tensor& Z = logits.value();
  require_matrix(Z, "cross_entropy_from_logits");
  const std::size_t b = Z.rows(), c = Z.cols();
  if (labels.size() != b) {
    throw DimensionError("cross_entropy_from_logits: " + std::to_string(labels.size()) +
                         " labels for " + std::to_string(b) + " rows");
  }
  Tensor probs = Tensor::matrix(b, c);
  double loss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= c) {
      throw DimensionError("cross_entropy_from_logits: label " + std::to_string(labels[i]) +
                           " out of range for " + std::to_string(c) + " classes");
    }
    double mx = Z.at(i, 0);
    for (std::size_t j = 1; j < c; ++j) mx = std::max<double>(mx, Z.at(i, j));
    double total = 0.0;
    for (std::size_t j = 0; j < c; ++j) total += std::exp(Z.at(i, j) - mx);
    const double log_total = std::log(total);
    for (std::size_t j = 0; j < c; ++j) {
      probs.at(i, j) = static_cast<float>(std::exp(Z.at(i, j) - mx - log_total));
    }
    loss -= Z.at(i, static_cast<std::size_t>(labels[i])) - mx - log_total;
  }
  loss /= static_cast<double>(b);
  std::vector<int> lab(labels.begin(), labels.end());
  return logits.tape().record(
      Tensor::scalar(static_cast<float>(loss)), inputs_of({logits}),
      [logits, probs = std::move(probs), lab = std::move(lab), b, c](Tape& t, const Tensor& g) {
        Tensor* gz = t.grad_buffer(logits);
        const double s = g[0] / static_cast<double>(b);
        for (std::size_t i = 0; i < b; ++i) {
          for (std::size_t j = 0; j < c; ++j) {
            const double target = static_cast<int>(j) == lab[i] ? 1.0 : 0.0;
            gz->at(i, j) += static_cast<float>(s * (probs.at(i, j) - target));
          }
        }
      });
}

SymEigOutput sym_eig(Var a) {
  const Tensor& A = a.value();
  require_matrix(A, "sym_eig");
  const std::size_t n = A.rows();
  if (A.cols() != n) throw DimensionError("sym_eig: non-square input " + shape_to_string(A.shape()));
  std::vector<double> buf(A.data().begin(), A.data().end());
  SymEigen eig = jacobi_eigen(buf, n);

  Tensor values({n});
  Tensor vectors = Tensor::matrix(n, n);
  for (std::size_t j = 0; j < n; ++j) values[j] = static_cast<float>(eig.values[j]);
  for (std::size_t i = 0; i < n * n; ++i) vectors[i] = static_cast<float>(eig.vectors[i]);

  Var lam = a.tape().record(std::move(values), inputs_of({a}),
                            [a, eig = std::move(eig), n](Tape& t, const Tensor& g) {
    std::vector<double> w(g.data().begin(), g.data().end());
    const std::vector<double> ga = spectral_gradient(eig, w);
    Tensor* gx = t.grad_buffer(a);
    for (std::size_t i = 0; i < n * n; ++i) (*gx)[i] += static_cast<float>(ga[i]);
  });
  return SymEigOutput{lam, std::move(vectors)};
}

}  // namespace r2tk
