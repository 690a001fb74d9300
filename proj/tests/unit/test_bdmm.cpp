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

#include <random>

#include "doctest.h"
#include "r2tk/bdmm.hpp"
#include "r2tk/errors.hpp"
#include "suites.hpp"

using namespace r2tk;
using namespace r2tk::testing;

TEST_CASE("hand traces of the ratio and the selection rule") {
  const SuiteResult r = bdmm_hand_traces();
  INFO(r.failure);
  CHECK(r.pass);
}

TEST_CASE("ratio errors and config") {
  CHECK_THROWS_AS(batch_mask_ratio({}, BdmmConfig{}), DimensionError);
  const PatchImportanceMap mixed[] = {map_of({0.1f, 0.2f}), map_of({0.1f, 0.2f, 0.3f})};
  CHECK_THROWS_AS(batch_mask_ratio(mixed, BdmmConfig{}), DimensionError);
  const PatchImportanceMap one[] = {map_of({0.1f, 0.2f})};
  CHECK_THROWS_AS(batch_mask_ratio(one, BdmmConfig{0.0}), ConfigError);
  CHECK_THROWS_AS(batch_mask_ratio(one, BdmmConfig{-1.0}), ConfigError);
  CHECK_THROWS_AS(select_mask(one, 1.0), ConfigError);
  CHECK_THROWS_AS(select_mask(one, -0.1), ConfigError);
}

TEST_CASE("strict inequality: entries equal to the threshold are kept") {
  // mean = 0.5; with λ = 1 only 0.25 is strictly below.
  const PatchImportanceMap m[] = {map_of({0.25f, 0.5f, 0.5f, 0.75f})};
  CHECK(batch_mask_ratio(m, BdmmConfig{}) == doctest::Approx(0.25));
  // λ = 2 puts the threshold at 1.0, above every entry.
  CHECK(batch_mask_ratio(m, BdmmConfig{2.0}) == doctest::Approx(1.0));
}

TEST_CASE("mask count is floored and clamped so one patch survives") {
  const PatchImportanceMap m[] = {map_of({0.4f, 0.1f, 0.3f})};
  CHECK(select_mask(m, 0.66).masked[0] == std::vector<std::size_t>{1});  // floor(1.98) = 1
  const PatchImportanceMap lone[] = {map_of({0.4f})};
  const MaskPlan p = select_mask(lone, 0.9);
  CHECK(p.masked[0].empty());
  CHECK(p.kept[0] == std::vector<std::size_t>{0});
  // A ratio of 0.99 on two patches floors to 1 mask; kept stays non-empty.
  const PatchImportanceMap two[] = {map_of({0.4f, 0.1f})};
  CHECK(select_mask(two, 0.99).kept[0] == std::vector<std::size_t>{0});
}

TEST_CASE("masked lists are sorted and kept is the complement") {
  const PatchImportanceMap m[] = {map_of({0.9f, 0.1f, 0.5f, 0.05f, 0.7f, 0.2f})};
  const MaskPlan p = select_mask(m, 0.5);
  CHECK(p.masked[0] == std::vector<std::size_t>{1, 3, 5});
  CHECK(p.kept[0] == std::vector<std::size_t>{0, 2, 4});
  CHECK(p.mask_count() == 3);
}

TEST_CASE("apply mask keeps rows in order and scatters back exactly") {
  const Tensor x = Tensor::from_rows({{1, 2}, {3, 4}, {5, 6}, {7, 8}});
  const MaskedPatches none = apply_mask(x, {});
  CHECK(none.patches == x);
  const std::size_t masked[] = {0, 1};
  const MaskedPatches m = apply_mask(x, masked);
  CHECK(m.kept == std::vector<std::size_t>{2, 3});
  CHECK(m.patches == Tensor::from_rows({{5, 6}, {7, 8}}));

  std::mt19937_64 rng(21);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  Tensor big = Tensor::matrix(16, 5);
  for (float& v : big.data()) v = u(rng);
  const std::size_t drop[] = {1, 4, 9, 15};
  const MaskedPatches out = apply_mask(big, drop);
  Tensor scattered = Tensor::matrix(16, 5);
  for (std::size_t r = 0; r < out.kept.size(); ++r)
    for (std::size_t c = 0; c < 5; ++c) scattered.at(out.kept[r], c) = out.patches.at(r, c);
  for (std::size_t k : out.kept)
    for (std::size_t c = 0; c < 5; ++c) CHECK(scattered.at(k, c) == big.at(k, c));

  const std::size_t all[] = {0, 1, 2, 3};
  CHECK_THROWS_AS(apply_mask(x, all), DimensionError);
  const std::size_t bad[] = {4};
  CHECK_THROWS_AS(apply_mask(x, bad), DimensionError);
}

TEST_CASE("properties over 200 random batches") {
  const SuiteResult r = bdmm_property_suite();
  INFO(r.failure);
  CHECK(r.pass);
}
