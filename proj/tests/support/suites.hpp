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

// Property suites shared by the unit tests and the acceptance runner. Each
// returns a SuiteResult instead of asserting so both harnesses can report it.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "r2tk/autodiff.hpp"
#include "r2tk/bdmm.hpp"
#include "r2tk/fusion.hpp"
#include "r2tk/renyi.hpp"
#include "r2tk/vit.hpp"

namespace r2tk::testing {

struct SuiteResult {
  bool pass = true;
  std::size_t checks = 0;
  double worst = 0.0;  ///< largest error seen, in the suite's own metric
  std::string failure;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (!ok && pass) {
      pass = false;
      failure = what;
    }
  }
  void within(double err, double tol, const std::string& what) {
    worst = std::max(worst, err);
    if (!(err <= tol)) {
      std::ostringstream s;
      s << what << ": error " << err << " > " << tol;
      expect(false, s.str());
    } else {
      expect(true, what);
    }
  }
};

// ---------------------------------------------------------------------------
// Entropy

/// H(J/N) = 0 and H(I/N) = log₂N through the double-precision estimator.
inline SuiteResult entropy_analytic_suite() {
  SuiteResult r;
  for (std::size_t n : {2u, 4u, 8u, 64u}) {
    std::vector<double> ones(n * n, 1.0), eye(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) eye[i * n + i] = 1.0;
    for (double alpha : {1.001, 1.01, 2.0}) {
      std::ostringstream tag;
      tag << "N=" << n << " alpha=" << alpha;
      r.within(std::abs(estimate_entropy(ones, n, alpha).value), 1e-9, "H(J/N) " + tag.str());
      r.within(std::abs(estimate_entropy(eye, n, alpha).value - std::log2(double(n))), 1e-9,
               "H(I/N) " + tag.str());
    }
  }
  return r;
}

inline std::vector<double> flatten(const MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i * m.cols() + j] = m(i, j);
  return out;
}

/// Entropy and MI against the Eigen-based reference on random PSD matrices.
inline SuiteResult entropy_oracle_suite(std::size_t count = 20, std::uint64_t seed = 2024) {
  SuiteResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> size(2, 16);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t n = size(rng);
    const MatrixXd a = random_psd(n, rng);
    const MatrixXd b = random_psd(n, rng);
    for (double alpha : {1.01, 2.0}) {
      std::ostringstream tag;
      tag << "matrix " << k << " N=" << n << " alpha=" << alpha;
      r.within(std::abs(estimate_entropy(flatten(a), n, alpha).value - brute_renyi(a, alpha)), 1e-6,
               "entropy " + tag.str());
      r.within(std::abs(mutual_information(flatten(a), flatten(b), n, alpha) - brute_mi(a, b, alpha)),
               1e-6, "mutual information " + tag.str());
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Gradients

using GradCase = std::pair<ScalarFn, std::vector<Tensor>>;
using GradCaseMaker = GradCase (*)(std::mt19937_64&);

inline Tensor symmetric(Tensor a) {
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < i; ++j) a.at(i, j) = a.at(j, i);
  return a;
}

/// Reshapes a rank-1 Var to a 1×n row (differentiably).
inline Var as_row(Var v) {
  const std::size_t n = v.value().size();
  return v.tape().record(v.value().reshaped({1, n}), std::span(&v, 1),
                         [v, n](Tape& t, const Tensor& g) { t.accumulate(v, g.reshaped({n})); });
}

/// One maker per differentiable op; each draws its own shapes and weights.
inline std::vector<std::pair<const char*, GradCaseMaker>> op_gradient_cases() {
  return {
      {"matmul",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 2}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(matmul(v[0], v[1]), w); },
                         {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}};
       }},
      {"matmul_nt",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 5}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(matmul_nt(v[0], v[1]), w); },
                         {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng)}};
       }},
      {"linear",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 5}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(linear(v[0], v[1], v[2]), w); },
                         {random_tensor({3, 4}, rng), random_tensor({5, 4}, rng),
                          random_tensor({1, 5}, rng)}};
       }},
      {"add",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({2, 3}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(add(v[0], v[1]), w); },
                         {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}};
       }},
      {"sub",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({2, 3}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(sub(v[0], v[1]), w); },
                         {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}};
       }},
      {"mul",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({2, 3}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(mul(v[0], v[1]), w); },
                         {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}};
       }},
      {"scale",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({2, 3}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(scale(v[0], -1.75f), w); },
                         {random_tensor({2, 3}, rng)}};
       }},
      {"add_row",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({4, 3}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(add_row(v[0], v[1]), w); },
                         {random_tensor({4, 3}, rng), random_tensor({1, 3}, rng)}};
       }},
      {"softmax_rows",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({2, 5}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(softmax_rows(v[0]), w); },
                         {random_tensor({2, 5}, rng)}};
       }},
      {"layer_norm",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 6}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(layer_norm(v[0], v[1], v[2]), w); },
                         {random_tensor({3, 6}, rng), random_tensor({1, 6}, rng),
                          random_tensor({1, 6}, rng)}};
       }},
      {"gelu",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 4}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(gelu(v[0]), w); },
                         {random_tensor({3, 4}, rng, 2.0)}};
       }},
      {"gather_rows",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({4, 3}, rng);
         return GradCase{[w](std::span<const Var> v) {
                           const std::size_t idx[] = {2, 0, 2, 4};
                           return project(gather_rows(v[0], idx), w);
                         },
                         {random_tensor({5, 3}, rng)}};
       }},
      {"concat_rows",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 4}, rng);
         return GradCase{[w](std::span<const Var> v) {
                           const Var parts[] = {v[0], v[1]};
                           return project(concat_rows(parts), w);
                         },
                         {random_tensor({1, 4}, rng), random_tensor({2, 4}, rng)}};
       }},
      {"slice_cols+concat_cols",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({3, 5}, rng);
         return GradCase{[w](std::span<const Var> v) {
                           const Var parts[] = {slice_cols(v[0], 3, 6), slice_cols(v[0], 0, 2)};
                           return project(concat_cols(parts), w);
                         },
                         {random_tensor({3, 6}, rng)}};
       }},
      {"mean_rows",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({1, 4}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(mean_rows(v[0]), w); },
                         {random_tensor({5, 4}, rng)}};
       }},
      {"sum",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) { return sum(mul(v[0], v[0])); },
                         {random_tensor({3, 3}, rng)}};
       }},
      {"cross_entropy_from_logits",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           const int labels[] = {0, 3, 1};
                           return cross_entropy_from_logits(v[0], labels);
                         },
                         {random_tensor({3, 4}, rng, 2.0)}};
       }},
      {"sym_eig",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({1, 5}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(as_row(sym_eig(v[0]).values), w); },
                         {symmetric(random_tensor({5, 5}, rng))}};
       }},
      {"gram_gaussian (fixed sigma)",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({4, 4}, rng);
         return GradCase{[w](std::span<const Var> v) { return project(gram_gaussian(v[0], 1.5), w); },
                         {random_tensor({4, 3}, rng)}};
       }},
      {"gram_gaussian (variable sigma)",
       [](std::mt19937_64& rng) {
         Tensor w = random_tensor({4, 4}, rng);
         Tensor sigma = Tensor::scalar(1.2f + 0.5f * std::abs(random_tensor({1}, rng)[0]));
         return GradCase{[w](std::span<const Var> v) { return project(gram_gaussian(v[0], v[1]), w); },
                         {random_tensor({4, 3}, rng), sigma}};
       }},
      {"pairwise_bandwidth (mean)",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           return pairwise_bandwidth(v[0], BandwidthPolicy::kMeanPairwise);
                         },
                         {random_tensor({5, 3}, rng)}};
       }},
      {"pairwise_bandwidth (median)",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           return pairwise_bandwidth(v[0], BandwidthPolicy::kMedianPairwise);
                         },
                         {random_tensor({5, 3}, rng)}};
       }},
  };
}

/// Spectral-path cases, held to the looser tolerance.
inline std::vector<std::pair<const char*, GradCaseMaker>> spectral_gradient_cases() {
  return {
      {"renyi_entropy",
       [](std::mt19937_64& rng) {
         // A well-conditioned PSD input: B·Bᵀ + I/2.
         Tensor b = random_tensor({5, 5}, rng);
         Tensor k = Tensor::matrix(5, 5);
         for (std::size_t i = 0; i < 5; ++i)
           for (std::size_t j = 0; j < 5; ++j) {
             double s = i == j ? 0.5 : 0.0;
             for (std::size_t c = 0; c < 5; ++c) s += double(b.at(i, c)) * b.at(j, c);
             k.at(i, j) = static_cast<float>(s);
           }
         return GradCase{[](std::span<const Var> v) { return renyi_entropy(v[0], 1.01); }, {k}};
       }},
      {"ib_loss",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           const int labels[] = {0, 2, 1, 2};
                           IbConfig ib;
                           ib.beta = 0.5;  // large enough that the entropy path dominates some entries
                           return ib_loss(v[0], labels, v[1], ib).total;
                         },
                         {random_tensor({4, 3}, rng), random_tensor({4, 8}, rng)}};
       }},
      {"ib_loss (beta 0.005)",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           const int labels[] = {1, 1, 0, 2};
                           return ib_loss(v[0], labels, v[1], IbConfig{}).total;
                         },
                         {random_tensor({4, 3}, rng), random_tensor({4, 8}, rng)}};
       }},
      {"feature_entropy (median)",
       [](std::mt19937_64& rng) {
         return GradCase{[](std::span<const Var> v) {
                           IbConfig ib;
                           ib.bandwidth = BandwidthPolicy::kMedianPairwise;
                           return feature_entropy(v[0], ib);
                         },
                         {random_tensor({4, 8}, rng)}};
       }},
  };
}

inline SuiteResult gradient_suite(int seeds = 5) {
  SuiteResult r;
  auto run = [&](const auto& cases, double tol) {
    for (const auto& [name, make] : cases) {
      for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(7000 + 31 * s);
        auto [fn, inputs] = make(rng);
        const GradCheck g = check_gradients(fn, inputs);
        std::ostringstream tag;
        tag << name << " seed " << s;
        r.expect(g.checked > 0, tag.str() + " checked nothing");
        r.within(g.max_rel_error, tol, tag.str());
      }
    }
  };
  run(op_gradient_cases(), 1e-3);
  run(spectral_gradient_cases(), 1e-2);
  return r;
}

// ---------------------------------------------------------------------------
// Masking

inline PatchImportanceMap map_of(std::vector<float> v, std::size_t id = 0) {
  PatchImportanceMap m;
  m.values = std::move(v);
  m.image_id = id;
  return m;
}

/// The hand traces of the ratio and selection rules.
inline SuiteResult bdmm_hand_traces() {
  SuiteResult r;
  const BdmmConfig unit;
  {
    const PatchImportanceMap m[] = {map_of({0.1f, 0.2f, 0.3f, 0.4f})};
    r.within(std::abs(batch_mask_ratio(m, unit) - 0.5), 1e-9, "single image ratio");
    const MaskPlan p = select_mask(m, 0.5);
    r.expect(p.masked[0] == std::vector<std::size_t>{0, 1}, "lowest two masked");
  }
  {
    const PatchImportanceMap m[] = {map_of({0.25f, 0.25f, 0.25f, 0.25f})};
    r.within(std::abs(batch_mask_ratio(m, unit)), 1e-9, "constant map ratio");
  }
  {
    // r₁ = 2/4, r₂ = 1/4
    const PatchImportanceMap m[] = {map_of({0.1f, 0.2f, 0.3f, 0.4f}), map_of({0.1f, 0.3f, 0.3f, 0.3f})};
    r.within(std::abs(batch_mask_ratio(m, unit) - 0.375), 1e-9, "two image ratio");
  }
  {
    const PatchImportanceMap m[] = {map_of({0.1f, 0.2f, 0.3f, 0.4f}), map_of({0.9f, 0.1f, 0.5f, 0.2f})};
    const MaskPlan p = select_mask(m, 0.0);
    r.expect(p.masked[0].empty() && p.masked[1].empty(), "r=0 masks nothing");
  }
  {
    const PatchImportanceMap m[] = {map_of({0.2f, 0.2f, 0.9f, 0.9f})};
    r.expect(select_mask(m, 0.25).masked[0] == std::vector<std::size_t>{0}, "tie broken by index");
  }
  return r;
}

/// Scaling invariance, λ-monotonicity, uniform maps and equal counts over
/// random batches.
inline SuiteResult bdmm_property_suite(std::size_t batches = 200, std::uint64_t seed = 99) {
  SuiteResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> bsize(1, 12), nsize(1, 40);
  std::uniform_real_distribution<double> u(0.0, 1.0), factor(0.05, 20.0);
  for (std::size_t k = 0; k < batches; ++k) {
    const std::size_t b = bsize(rng), n = nsize(rng);
    std::vector<PatchImportanceMap> maps;
    for (std::size_t i = 0; i < b; ++i) {
      std::vector<float> v(n);
      for (float& x : v) x = static_cast<float>(u(rng) < 0.2 ? 0.05 : u(rng));  // some ties
      maps.push_back(map_of(std::move(v), i));
    }
    const std::string tag = "batch " + std::to_string(k);
    const double base = batch_mask_ratio(maps, BdmmConfig{});
    r.expect(base >= 0.0 && base < 1.0, tag + " ratio in [0,1)");

    std::vector<PatchImportanceMap> scaled = maps;
    std::uniform_int_distribution<std::size_t> which(0, b - 1);
    const float c = static_cast<float>(factor(rng));
    for (float& x : scaled[which(rng)].values) x *= c;
    r.within(std::abs(batch_mask_ratio(scaled, BdmmConfig{}) - base), 1e-9, tag + " scaling invariance");

    double prev = -1.0;
    for (double lambda : {0.25, 0.5, 0.9, 1.0, 1.1, 1.5, 2.0, 4.0}) {
      const double rl = batch_mask_ratio(maps, BdmmConfig{lambda});
      r.expect(rl >= prev, tag + " monotone in lambda");
      prev = rl;
    }

    std::vector<PatchImportanceMap> uniform;
    for (std::size_t i = 0; i < b; ++i) uniform.push_back(map_of(std::vector<float>(n, 1.0f / n)));
    r.within(batch_mask_ratio(uniform, BdmmConfig{}), 1e-9, tag + " uniform maps");

    const MaskPlan plan = select_mask(maps, base);
    const std::size_t expected = std::min<std::size_t>(
        static_cast<std::size_t>(std::floor(base * static_cast<double>(n))), n - 1);
    for (std::size_t i = 0; i < b; ++i) {
      r.expect(plan.masked[i].size() == expected, tag + " equal masked counts");
      r.expect(plan.masked[i].size() + plan.kept[i].size() == n && !plan.kept[i].empty(),
               tag + " masked/kept partition");
    }
    r.expect(select_mask(maps, base).masked == plan.masked, tag + " deterministic selection");
  }
  return r;
}

// ---------------------------------------------------------------------------
// Fusion

/// L·K maps of size S×S, each row a softmax of Gaussian logits.
inline ForwardTrace random_trace(std::size_t layers, std::size_t heads, std::size_t s,
                                 std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 2.0);
  ForwardTrace tr;
  tr.attn.resize(layers);
  for (auto& layer : tr.attn) {
    for (std::size_t k = 0; k < heads; ++k) {
      Tensor m = Tensor::matrix(s, s);
      for (std::size_t i = 0; i < s; ++i) {
        std::vector<double> e(s);
        double total = 0.0;
        for (double& x : e) total += (x = std::exp(g(rng)));
        for (std::size_t j = 0; j < s; ++j) m.at(i, j) = static_cast<float>(e[j] / total);
      }
      layer.push_back(std::move(m));
    }
  }
  return tr;
}

inline SuiteResult fusion_property_suite(std::size_t traces = 100, std::uint64_t seed = 11) {
  SuiteResult r;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> lk(1, 4), nsize(1, 24);
  for (std::size_t t = 0; t < traces; ++t) {
    const std::size_t n = nsize(rng), s = n + 1;
    const ForwardTrace tr = random_trace(lk(rng), lk(rng), s, rng);
    const std::string tag = "trace " + std::to_string(t);

    const Tensor w = fuse(tr);
    for (std::size_t i = 0; i < s; ++i) {
      double row = 0.0;
      for (std::size_t j = 0; j < s; ++j) row += w.at(i, j);
      r.within(std::abs(row - 1.0), 1e-5, tag + " fused row sum");
    }

    const Tensor v = row_average(w);
    const PatchImportanceMap vp = strip_class(v);
    double total = 0.0, patch_total = 0.0;
    for (float x : v.data()) total += x;
    for (float x : vp.values) {
      patch_total += x;
      r.expect(x >= 0.0f, tag + " nonnegative importance");
    }
    r.within(std::abs(total - 1.0), 1e-5, tag + " averaged vector sums to 1");
    r.within(std::abs(patch_total - (total - v[0])), 1e-5, tag + " stripped sum identity");
    r.expect(vp.size() == n, tag + " map length");

    // Relabel patches 1..N with a random permutation, consistently in every map.
    std::vector<std::size_t> perm(s);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin() + 1, perm.end(), rng);
    ForwardTrace permuted = tr;
    for (std::size_t l = 0; l < tr.attn.size(); ++l)
      for (std::size_t k = 0; k < tr.attn[l].size(); ++k)
        for (std::size_t i = 0; i < s; ++i)
          for (std::size_t j = 0; j < s; ++j)
            permuted.attn[l][k].at(perm[i], perm[j]) = tr.attn[l][k].at(i, j);
    const PatchImportanceMap pp = patch_importance(permuted);
    for (std::size_t i = 1; i < s; ++i) {
      r.within(std::abs(pp.values[perm[i] - 1] - vp.values[i - 1]), 1e-5, tag + " permutation equivariance");
    }
  }
  return r;
}

}  // namespace r2tk::testing
