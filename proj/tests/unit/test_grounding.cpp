// Copyright 2026 The RegFormer Authors.
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

#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "regformer/grounding.hpp"
#include "support.hpp"

using namespace regformer;
using namespace regformer::testing;

namespace {

RegFormerParams identity_params(std::size_t d) {
  InitOptions opt;
  opt.grounding = GroundingInit::kNearIdentity;
  opt.identity_jitter = 0.0;
  return init_params(ModelDims::with_defaults(d, d), 0, {}, opt);
}

ImportanceField random_alpha(std::size_t n, Rng& rng) {
  return patch_importance(random_vector(n, rng), 0.5);
}

}  // namespace

TEST_CASE("similarity with identity projections and an aligned patch") {
  const std::size_t d = 4;
  const RegFormerParams p = identity_params(d);
  TextEmbeddingBank bank;
  bank.human = {1, 0, 0, 0};
  bank.objects = Tensor2D::from_rows({{0, 1, 0, 0}});
  bank.actions = Tensor2D::from_rows({{0, 0, 1, 0}});
  Tensor2D patches(4, d);
  patches(2, 0) = 1.0;
  patches(0, 1) = 2.0;
  patches(1, 2) = 1.0;
  patches(3, 3) = 1.0;
  const FeatureMap fm(2, 2, patches);
  const SimilarityField s = patch_similarity(fm, bank, p);
  CHECK(s.human == std::vector<double>{0.0, 0.0, 1.0, 0.0});
  CHECK(s.objects(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  bank.human = {3, 0, 0, 0};
  CHECK(patch_similarity(fm, bank, p).human == s.human);
}

TEST_CASE("similarity equals a per-patch cosine loop") {
  Rng rng(31);
  const RegFormerParams p = random_params(ModelDims{6, 5, 4, 6}, 1);
  const FeatureMap fm = random_fm(3, 3, 6, rng);
  const TextEmbeddingBank bank = random_bank(5, 2, 2, rng);
  const SimilarityField s = patch_similarity(fm, bank, p);
  const auto th = oracle_vecmat(bank.human, p.proj_text_h);
  for (std::size_t q = 0; q < 9; ++q) {
    CHECK(std::abs(s.human[q] - oracle_cosine(oracle_vecmat(fm.patch(q), p.proj_patch_h), th)) <= 1e-12);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto to = oracle_vecmat(bank.objects.row(k), p.proj_text_o);
      CHECK(std::abs(s.objects(k, q) - oracle_cosine(oracle_vecmat(fm.patch(q), p.proj_patch_o), to)) <= 1e-12);
    }
  }
  CHECK_ERROR_CATEGORY(patch_similarity(random_fm(2, 2, 5, rng), bank, p), ErrorCategory::kShape);
  CHECK_ERROR_CATEGORY(patch_similarity(fm, random_bank(4, 2, 2, rng), p), ErrorCategory::kShape);
}

TEST_CASE("importance examples") {
  const ImportanceField u = patch_importance(std::vector<double>(12, 0.4), 0.05);
  for (double a : u.alpha) CHECK(a == doctest::Approx(1.0 / 12.0).epsilon(1e-15));

  Rng rng(32);
  RegionMask one;
  one.bits.assign(9, 0);
  one.bits[5] = 1;
  const ImportanceField h = patch_importance(random_vector(9, rng), 0.05, &one);
  for (std::size_t q = 0; q < 9; ++q) CHECK(h.alpha[q] == (q == 5 ? 1.0 : 0.0));

  const ImportanceField f = patch_importance(std::vector<double>{0.8, 0.2, 0.2, 0.2}, 0.05);
  const double expected = std::exp(16.0) / (std::exp(16.0) + 3.0 * std::exp(4.0));
  CHECK(f.alpha[0] == doctest::Approx(expected).epsilon(1e-14));

  RegionMask empty;
  empty.bits.assign(4, 0);
  CHECK_ERROR_CATEGORY(patch_importance(std::vector<double>(4, 0.0), 0.05, &empty), ErrorCategory::kEmptyMask);
  CHECK_ERROR_CATEGORY(patch_importance(std::vector<double>(4, 0.0), 0.0), ErrorCategory::kArgument);
}

TEST_CASE("box_to_mask examples") {
  const RegionMask full = box_to_mask(Box::full(), 5, 7);
  CHECK(full.count() == 35);

  const RegionMask br = box_to_mask(Box{0.5, 0.5, 1.0, 1.0}, 4, 4);
  std::vector<std::size_t> on;
  for (std::size_t q = 0; q < 16; ++q) {
    if (br.contains(q)) on.push_back(q);
  }
  CHECK(on == std::vector<std::size_t>{10, 11, 14, 15});

  // Strictly inside cell (1, 2) of a 4x4 grid but away from its center.
  const RegionMask tiny = box_to_mask(Box{0.51, 0.26, 0.55, 0.30}, 4, 4);
  CHECK(tiny.count() == 1);
  CHECK(tiny.contains(1 * 4 + 2));

  // Box center equidistant from patches 0 and 1: lowest index wins.
  const RegionMask tie = box_to_mask(Box{0.49, 0.2, 0.51, 0.3}, 2, 2);
  CHECK(tie.count() == 1);
  CHECK(tie.contains(0));

  CHECK_ERROR_CATEGORY(box_to_mask(Box{0.5, 0.1, 0.5, 0.2}, 4, 4), ErrorCategory::kArgument);
  CHECK_ERROR_CATEGORY(box_to_mask(Box{0.1, 0.3, 0.5, 0.2}, 4, 4), ErrorCategory::kArgument);
  CHECK_ERROR_CATEGORY(box_to_mask(Box{-0.1, 0.1, 0.5, 0.2}, 4, 4), ErrorCategory::kArgument);
}

TEST_CASE("masks from nested boxes are nested and deterministic") {
  Rng rng(33);
  for (int t = 0; t < 300; ++t) {
    const Box outer = random_box(rng, 0.02);
    const double fx = rng.uniform(0.0, 0.5);
    const double fy = rng.uniform(0.0, 0.5);
    const Box inner{outer.x1 + fx * outer.width() * 0.5, outer.y1 + fy * outer.height() * 0.5,
                    outer.x2 - fx * outer.width() * 0.5, outer.y2 - fy * outer.height() * 0.5};
    const std::size_t g = 2 + rng.below(8);
    const RegionMask a = box_to_mask(outer, g, g);
    const RegionMask b = box_to_mask(inner, g, g);
    CHECK(a.bits == box_to_mask(outer, g, g).bits);
    CHECK(a.count() >= 1);
    // Nesting holds whenever the inner box has a center of its own.
    bool inner_direct = false;
    for (std::size_t q = 0; q < g * g; ++q) {
      const auto [cx, cy] = std::pair((q % g + 0.5) / g, (q / g + 0.5) / g);
      inner_direct |= inner.contains(cx, cy);
    }
    if (inner_direct) {
      for (std::size_t q = 0; q < g * g; ++q) {
        if (b.contains(q)) CHECK(a.contains(q));
      }
    }
  }
}

TEST_CASE("full mask reduces to the unmasked importance") {
  Rng rng(34);
  for (int t = 0; t < 200; ++t) {
    const std::size_t h = 1 + rng.below(6), w = 1 + rng.below(6);
    const std::vector<double> field = random_vector(h * w, rng);
    const RegionMask m = box_to_mask(Box::full(), h, w);
    const double tau = rng.uniform(0.02, 1.0);
    CHECK(max_abs_diff(patch_importance(field, tau, &m).alpha, patch_importance(field, tau).alpha) <= 1e-12);
  }
}

TEST_CASE("shrinking a mask never lowers a surviving weight") {
  Rng rng(35);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + rng.below(20);
    const std::vector<double> field = random_vector(n, rng);
    RegionMask big;
    big.bits.assign(n, 0);
    for (auto& b : big.bits) b = rng.uniform() < 0.7;
    big.bits[0] = 1;
    RegionMask small = big;
    for (std::size_t q = 1; q < n; ++q) {
      if (rng.uniform() < 0.5) small.bits[q] = 0;
    }
    const auto a = patch_importance(field, 0.1, &big).alpha;
    const auto b = patch_importance(field, 0.1, &small).alpha;
    double sum = 0.0;
    for (std::size_t q = 0; q < n; ++q) {
      sum += b[q];
      if (small.contains(q)) CHECK(b[q] >= a[q] - 1e-15);
      else CHECK(b[q] == 0.0);
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("grounded query examples") {
  Rng rng(36);
  const std::size_t d = 5;
  const FeatureMap fm = random_fm(3, 2, d, rng);
  const RegFormerParams p = random_params(ModelDims::with_defaults(d, 4), 2);
  ImportanceField delta{std::vector<double>(6, 0.0)};
  delta.alpha[4] = 1.0;
  const auto pooled = pool_patches(delta, fm);
  CHECK(std::vector<double>(fm.patch(4).begin(), fm.patch(4).end()) == pooled);

  const ImportanceField uni{std::vector<double>(6, 1.0 / 6.0)};
  const auto mean = pool_patches(uni, fm);
  for (std::size_t i = 0; i < d; ++i) {
    double s = 0;
    for (std::size_t q = 0; q < 6; ++q) s += fm.patches(q, i);
    CHECK(mean[i] == doctest::Approx(s / 6.0).epsilon(1e-13));
  }

  const ImportanceField ah = random_alpha(6, rng), ao = random_alpha(6, rng);
  const auto q = grounded_query(ah, ao, fm, p);
  std::vector<double> qh(d, 0.0), qo(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t r = 0; r < 6; ++r) {
      qh[i] += ah.alpha[r] * fm.patches(r, i);
      qo[i] += ao.alpha[r] * fm.patches(r, i);
    }
  }
  std::vector<double> cat(qh);
  cat.insert(cat.end(), qo.begin(), qo.end());
  CHECK(max_abs_diff(q, oracle_vecmat(cat, p.proj_query)) <= 1e-12);
  CHECK(max_abs_diff(q, combine_query_halves(query_half(pool_patches(ah, fm), p.proj_query, QueryHalf::kHuman),
                                             query_half(pool_patches(ao, fm), p.proj_query, QueryHalf::kObject))) <= 1e-14);
}

TEST_CASE("pooled features stay in the convex hull") {
  Rng rng(37);
  for (int t = 0; t < 100; ++t) {
    const FeatureMap fm = random_fm(1 + rng.below(5), 1 + rng.below(5), 4, rng);
    const ImportanceField a = random_alpha(fm.patch_count(), rng);
    const auto q = pool_patches(a, fm);
    for (std::size_t i = 0; i < 4; ++i) {
      double lo = INFINITY, hi = -INFINITY;
      for (std::size_t r = 0; r < fm.patch_count(); ++r) {
        lo = std::min(lo, fm.patches(r, i));
        hi = std::max(hi, fm.patches(r, i));
      }
      CHECK(q[i] >= lo - 1e-12);
      CHECK(q[i] <= hi + 1e-12);
    }
  }
}
