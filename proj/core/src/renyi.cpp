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

#include "r2tk/renyi.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "r2tk/errors.hpp"
#include "r2tk/linalg.hpp"

namespace r2tk {

std::string to_string(BandwidthPolicy policy) {
  switch (policy) {
    case BandwidthPolicy::kFixed:
      return "fixed";
    case BandwidthPolicy::kMeanPairwise:
      return "mean";
    case BandwidthPolicy::kMedianPairwise:
      return "median";
  }
  return "mean";
}

BandwidthPolicy bandwidth_policy_from_string(const std::string& name) {
  if (name == "fixed") return BandwidthPolicy::kFixed;
  if (name == "mean") return BandwidthPolicy::kMeanPairwise;
  if (name == "median") return BandwidthPolicy::kMedianPairwise;
  throw ConfigError("ib.bandwidth_policy must be one of fixed, mean, median; got '" + name + "'");
}

void IbConfig::validate() const {
  if (!(alpha > 0.0) || alpha == 1.0 || !std::isfinite(alpha)) {
    throw ConfigError("ib.alpha must be > 0 and != 1");
  }
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw ConfigError("ib.beta must be >= 0");
  if (bandwidth == BandwidthPolicy::kFixed && !(sigma > 0.0)) {
    throw ConfigError("ib.sigma must be > 0 with the fixed bandwidth policy");
  }
}

namespace {

std::vector<double> pairwise_sq_distances(const Tensor& f) {
  require_matrix(f, "gram");
  const std::size_t n = f.rows(), d = f.cols();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        const double diff = static_cast<double>(f.at(a, k)) - f.at(b, k);
        s += diff * diff;
      }
      out[a * n + b] = out[b * n + a] = s;
    }
  }
  return out;
}

double log2_power_sum(std::span<const double> eigenvalues, double alpha) {
  double s = 0.0;
  for (double l : eigenvalues)
    if (l >= kEigenFloor) s += std::pow(l, alpha);
  return std::log2(s);
}

}  // namespace

Bandwidth resolve_bandwidth(const Tensor& features, const IbConfig& config) {
  if (config.bandwidth == BandwidthPolicy::kFixed) return {config.sigma, false};
  const std::size_t n = features.rows();
  if (n < 2) throw DimensionError("resolve_bandwidth: need at least two samples");
  const std::vector<double> d2 = pairwise_sq_distances(features);
  std::vector<double> dist;
  dist.reserve(n * (n - 1) / 2);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) dist.push_back(std::sqrt(d2[a * n + b]));

  double sigma = 0.0;
  if (config.bandwidth == BandwidthPolicy::kMeanPairwise) {
    for (double v : dist) sigma += v;
    sigma /= static_cast<double>(dist.size());
  } else {
    std::sort(dist.begin(), dist.end());
    const std::size_t mid = dist.size() / 2;
    sigma = dist.size() % 2 ? dist[mid] : 0.5 * (dist[mid - 1] + dist[mid]);
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return {1.0, true};
  return {sigma, false};
}

Tensor gram_gaussian(const Tensor& features, double sigma) {
  if (!(sigma > 0.0)) throw NumericError("gram_gaussian: sigma must be > 0");
  const std::size_t n = features.rows();
  if (n < 2) throw DimensionError("gram_gaussian: need at least two samples");
  const std::vector<double> d2 = pairwise_sq_distances(features);
  const double denom = 2.0 * sigma * sigma;
  Tensor k = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n * n; ++i) k[i] = static_cast<float>(std::exp(-d2[i] / denom));
  return k;
}

Tensor gram_gaussian(const Tensor& features, const IbConfig& config, Bandwidth* resolved) {
  const Bandwidth bw = resolve_bandwidth(features, config);
  if (resolved) *resolved = bw;
  return gram_gaussian(features, bw.sigma);
}

Var gram_gaussian(Var features, double sigma) {
  Tensor k = gram_gaussian(features.value(), sigma);
  Tensor saved = k;
  return features.tape().record(
      std::move(k), std::vector<Var>{features},
      [features, kmat = std::move(saved), sigma](Tape& t, const Tensor& g) {
        const Tensor& f = features.value();
        const std::size_t n = f.rows(), d = f.cols();
        const double inv_s2 = 1.0 / (sigma * sigma);
        Tensor* gf = t.grad_buffer(features);
        for (std::size_t m = 0; m < n; ++m) {
          for (std::size_t j = 0; j < n; ++j) {
            if (j == m) continue;
            const double w = (static_cast<double>(g.at(m, j)) + g.at(j, m)) * kmat.at(m, j) * inv_s2;
            for (std::size_t c = 0; c < d; ++c) {
              gf->at(m, c) += static_cast<float>(w * (static_cast<double>(f.at(j, c)) - f.at(m, c)));
            }
          }
        }
      });
}

Var gram_gaussian(Var features, Var sigma) {
  const double sig = sigma.value().item();
  Tensor k = gram_gaussian(features.value(), sig);
  Tensor saved = k;
  return features.tape().record(
      std::move(k), std::vector<Var>{features, sigma},
      [features, sigma, kmat = std::move(saved), sig](Tape& t, const Tensor& g) {
        const Tensor& f = features.value();
        const std::size_t n = f.rows(), d = f.cols();
        const double inv_s2 = 1.0 / (sig * sig);
        Tensor* gf = t.grad_buffer(features);
        double g_sigma = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
          for (std::size_t j = 0; j < n; ++j) {
            if (j == m) continue;
            double d2 = 0.0;
            for (std::size_t c = 0; c < d; ++c) {
              const double diff = static_cast<double>(f.at(m, c)) - f.at(j, c);
              d2 += diff * diff;
            }
            // ∂K/∂σ = K·d²/σ³
            g_sigma += static_cast<double>(g.at(m, j)) * kmat.at(m, j) * d2 * inv_s2 / sig;
            if (gf) {
              const double w = (static_cast<double>(g.at(m, j)) + g.at(j, m)) * kmat.at(m, j) * inv_s2;
              for (std::size_t c = 0; c < d; ++c) {
                gf->at(m, c) += static_cast<float>(w * (static_cast<double>(f.at(j, c)) - f.at(m, c)));
              }
            }
          }
        }
        if (Tensor* gs = t.grad_buffer(sigma)) (*gs)[0] += static_cast<float>(g_sigma);
      });
}

Var pairwise_bandwidth(Var features, BandwidthPolicy policy) {
  const Tensor& f = features.value();
  require_matrix(f, "pairwise_bandwidth");
  const std::size_t n = f.rows(), d = f.cols();
  if (n < 2) throw DimensionError("pairwise_bandwidth: need at least two samples");
  if (policy == BandwidthPolicy::kFixed) {
    throw ConfigError("pairwise_bandwidth: the fixed policy has no distance-based width");
  }
  const std::vector<double> d2 = pairwise_sq_distances(f);
  struct Pair {
    std::size_t a, b;
    double dist;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b) pairs.push_back({a, b, std::sqrt(d2[a * n + b])});

  // Each contributing pair with its weight in σ.
  std::vector<std::pair<Pair, double>> terms;
  double sigma = 0.0;
  if (policy == BandwidthPolicy::kMeanPairwise) {
    const double w = 1.0 / static_cast<double>(pairs.size());
    for (const Pair& p : pairs) {
      sigma += w * p.dist;
      terms.emplace_back(p, w);
    }
  } else {
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
    const std::size_t mid = pairs.size() / 2;
    if (pairs.size() % 2) {
      sigma = pairs[mid].dist;
      terms.emplace_back(pairs[mid], 1.0);
    } else {
      sigma = 0.5 * (pairs[mid - 1].dist + pairs[mid].dist);
      terms.emplace_back(pairs[mid - 1], 0.5);
      terms.emplace_back(pairs[mid], 0.5);
    }
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) return features.tape().constant(Tensor::scalar(1.0f));

  return features.tape().record(
      Tensor::scalar(static_cast<float>(sigma)), std::vector<Var>{features},
      [features, terms = std::move(terms), d](Tape& t, const Tensor& g) {
        const Tensor& f = features.value();
        Tensor* gf = t.grad_buffer(features);
        for (const auto& [p, w] : terms) {
          if (p.dist == 0.0) continue;
          const double s = g[0] * w / p.dist;
          for (std::size_t c = 0; c < d; ++c) {
            const double diff = static_cast<double>(f.at(p.a, c)) - f.at(p.b, c);
            gf->at(p.a, c) += static_cast<float>(s * diff);
            gf->at(p.b, c) -= static_cast<float>(s * diff);
          }
        }
      });
}

Tensor label_gram(std::span<const int> labels) {
  const std::size_t n = labels.size();
  Tensor k = Tensor::matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) k.at(i, j) = labels[i] == labels[j] ? 1.0f : 0.0f;
  return k;
}

EntropyEstimate estimate_entropy(std::span<const double> gram, std::size_t n, double alpha) {
  if (gram.size() != n * n) throw DimensionError("estimate_entropy: gram is not n×n");
  if (!(alpha > 0.0) || alpha == 1.0) throw ConfigError("estimate_entropy: alpha must be > 0 and != 1");
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gram[i * n + i];
  if (!(trace > 0.0) || !std::isfinite(trace)) {
    throw NumericError("estimate_entropy: Gram trace must be positive and finite");
  }
  EntropyEstimate est;
  est.n = n;
  est.gram.resize(n * n);
  for (std::size_t i = 0; i < n * n; ++i) {
    if (!std::isfinite(gram[i])) throw NumericError("estimate_entropy: non-finite Gram entry");
    est.gram[i] = gram[i] / trace;
  }
  SymEigen eig = jacobi_eigen(est.gram, n);
  est.eigenvalues = std::move(eig.values);
  for (double& l : est.eigenvalues) l = std::max(l, 0.0);
  est.value = log2_power_sum(est.eigenvalues, alpha) / (1.0 - alpha);
  return est;
}

EntropyEstimate estimate_entropy(const Tensor& gram, double alpha) {
  require_matrix(gram, "estimate_entropy");
  if (gram.rows() != gram.cols()) {
    throw DimensionError("estimate_entropy: non-square gram " + shape_to_string(gram.shape()));
  }
  std::vector<double> g(gram.data().begin(), gram.data().end());
  return estimate_entropy(g, gram.rows(), alpha);
}

Var renyi_entropy(Var gram, double alpha) {
  const Tensor& K = gram.value();
  require_matrix(K, "renyi_entropy");
  const std::size_t n = K.rows();
  if (K.cols() != n) throw DimensionError("renyi_entropy: non-square gram " + shape_to_string(K.shape()));
  std::vector<double> k(K.data().begin(), K.data().end());
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += k[i * n + i];
  if (!(trace > 0.0)) throw NumericError("renyi_entropy: Gram trace must be positive");
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n * n; ++i) a[i] = k[i] / trace;

  SymEigen eig = jacobi_eigen(a, n);
  double power_sum = 0.0;
  for (double l : eig.values)
    if (l >= kEigenFloor) power_sum += std::pow(l, alpha);
  const double c = 1.0 / (1.0 - alpha);
  const double value = c * std::log2(power_sum);

  return gram.tape().record(
      Tensor::scalar(static_cast<float>(value)), std::vector<Var>{gram},
      [gram, eig = std::move(eig), a = std::move(a), trace, power_sum, c, alpha, n](
          Tape& t, const Tensor& g) {
        // dH/dλ = c·α·λ^(α−1) / (S·ln 2)
        std::vector<double> w(n, 0.0);
        for (std::size_t m = 0; m < n; ++m) {
          const double l = eig.values[m];
          if (l >= kEigenFloor) {
            w[m] = g[0] * c * alpha * std::pow(l, alpha - 1.0) / (power_sum * std::numbers::ln2);
          }
        }
        const std::vector<double> ga = spectral_gradient(eig, w);
        // A = K / tr(K)
        double ga_dot_a = 0.0;
        for (std::size_t i = 0; i < n * n; ++i) ga_dot_a += ga[i] * a[i];
        Tensor* gk = t.grad_buffer(gram);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < n; ++j) {
            double v = ga[i * n + j] / trace;
            if (i == j) v -= ga_dot_a / trace;
            gk->at(i, j) += static_cast<float>(v);
          }
        }
      });
}

double mutual_information(std::span<const double> gram_a, std::span<const double> gram_b,
                          std::size_t n, double alpha) {
  if (gram_a.size() != n * n || gram_b.size() != n * n) {
    throw DimensionError("mutual_information: Gram matrices must both be " + std::to_string(n) +
                         "x" + std::to_string(n));
  }
  const EntropyEstimate ha = estimate_entropy(gram_a, n, alpha);
  const EntropyEstimate hb = estimate_entropy(gram_b, n, alpha);
  std::vector<double> joint(n * n);
  for (std::size_t i = 0; i < n * n; ++i) joint[i] = ha.gram[i] * hb.gram[i];
  const EntropyEstimate hab = estimate_entropy(joint, n, alpha);
  return ha.value + hb.value - hab.value;
}

double mutual_information(const Tensor& gram_a, const Tensor& gram_b, double alpha) {
  require_matrix(gram_a, "mutual_information");
  require_same_shape(gram_a, gram_b, "mutual_information");
  if (gram_a.rows() != gram_a.cols()) throw DimensionError("mutual_information: non-square gram");
  std::vector<double> a(gram_a.data().begin(), gram_a.data().end());
  std::vector<double> b(gram_b.data().begin(), gram_b.data().end());
  return mutual_information(a, b, gram_a.rows(), alpha);
}

Var feature_entropy(Var features, const IbConfig& config) {
  if (config.bandwidth == BandwidthPolicy::kFixed || config.freeze_bandwidth) {
    const Bandwidth bw = resolve_bandwidth(features.value(), config);
    return renyi_entropy(gram_gaussian(features, bw.sigma), config.alpha);
  }
  Var sigma = pairwise_bandwidth(features, config.bandwidth);
  return renyi_entropy(gram_gaussian(features, sigma), config.alpha);
}

IbLoss ib_loss(Var logits, std::span<const int> labels, Var class_tokens, const IbConfig& config) {
  config.validate();
  if (class_tokens.value().rows() < 2) {
    throw ConfigError("ib_loss: the entropy term needs a batch of at least 2; "
                      "disable the IB term or raise the batch size");
  }
  IbLoss out;
  out.cross_entropy = cross_entropy_from_logits(logits, labels);
  out.entropy = feature_entropy(class_tokens, config);
  out.total = add(out.cross_entropy, scale(out.entropy, static_cast<float>(config.beta)));
  return out;
}

}  // namespace r2tk
