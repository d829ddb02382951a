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

#include "regformer/grounding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/kernels.hpp"

namespace regformer {

std::size_t RegionMask::count() const noexcept {
  return static_cast<std::size_t>(std::count_if(bits.begin(), bits.end(), [](auto b) { return b != 0; }));
}

GroundingProjection project_grounding(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                      const RegFormerParams& params) {
  require(fm.dim() == params.dims.d_v, ErrorCategory::kShape,
          "feature map dim " + std::to_string(fm.dim()) + " != model d_v " +
              std::to_string(params.dims.d_v));
  require(bank.dim() == params.dims.d_t, ErrorCategory::kShape,
          "bank dim " + std::to_string(bank.dim()) + " != model d_t " +
              std::to_string(params.dims.d_t));
  GroundingProjection proj;
  proj.patch_h = matmul(fm.patches, params.proj_patch_h);
  proj.patch_o = matmul(fm.patches, params.proj_patch_o);
  proj.text_h = vecmat(bank.human, params.proj_text_h);
  proj.text_o = matmul(bank.objects, params.proj_text_o);
  return proj;
}

SimilarityField similarity_from_projection(const GroundingProjection& proj) {
  const std::size_t n = proj.patch_h.rows();
  SimilarityField field;
  field.human.resize(n);
  for (std::size_t p = 0; p < n; ++p) field.human[p] = safe_cosine(proj.patch_h.row(p), proj.text_h);
  field.objects = Tensor2D(proj.text_o.rows(), n);
  for (std::size_t k = 0; k < proj.text_o.rows(); ++k) {
    for (std::size_t p = 0; p < n; ++p) {
      field.objects(k, p) = safe_cosine(proj.patch_o.row(p), proj.text_o.row(k));
    }
  }
  return field;
}

SimilarityField patch_similarity(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                 const RegFormerParams& params) {
  return similarity_from_projection(project_grounding(fm, bank, params));
}

ImportanceField patch_importance(std::span<const double> field, double tau_p,
                                 const RegionMask* mask) {
  if (mask == nullptr) return {masked_softmax(field, tau_p)};
  require(mask->size() == field.size(), ErrorCategory::kShape,
          "region mask covers " + std::to_string(mask->size()) + " patches, field has " +
              std::to_string(field.size()));
  if (mask->count() == 0) {
    fail(ErrorCategory::kEmptyMask, "region mask selects no patch");
  }
  const AdditiveMask additive = mask->additive();
  return {masked_softmax(field, tau_p, &additive)};
}

RegionMask box_to_mask(const Box& box, std::size_t grid_h, std::size_t grid_w) {
  validate_box(box);
  require(grid_h >= 1 && grid_w >= 1, ErrorCategory::kArgument, "grid must be >= 1x1");
  RegionMask mask;
  mask.source = box;
  mask.bits.assign(grid_h * grid_w, 0);
  const auto cx = [&](std::size_t j) { return (static_cast<double>(j) + 0.5) / static_cast<double>(grid_w); };
  const auto cy = [&](std::size_t i) { return (static_cast<double>(i) + 0.5) / static_cast<double>(grid_h); };
  bool any = false;
  for (std::size_t i = 0; i < grid_h; ++i) {
    for (std::size_t j = 0; j < grid_w; ++j) {
      if (box.contains(cx(j), cy(i))) {
        mask.bits[i * grid_w + j] = 1;
        any = true;
      }
    }
  }
  if (!any) {
    std::size_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_h; ++i) {
      for (std::size_t j = 0; j < grid_w; ++j) {
        const double dx = cx(j) - box.center_x();
        const double dy = cy(i) - box.center_y();
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = i * grid_w + j;
        }
      }
    }
    mask.bits[best] = 1;
  }
  return mask;
}

std::vector<double> pool_patches(const ImportanceField& alpha, const FeatureMap& fm) {
  require(alpha.alpha.size() == fm.patch_count(), ErrorCategory::kShape,
          "importance field does not match the feature map grid");
  std::vector<double> q(fm.dim(), 0.0);
  for (std::size_t p = 0; p < fm.patch_count(); ++p) {
    if (alpha.alpha[p] != 0.0) kernels::axpy(alpha.alpha[p], fm.patch(p), q);
  }
  return q;
}

std::vector<double> query_half(std::span<const double> pooled, const Tensor2D& proj_query,
                               QueryHalf half) {
  const std::size_t d = proj_query.cols();
  require(proj_query.rows() == 2 * d && pooled.size() == d, ErrorCategory::kShape,
          "query projection expects a 2d x d matrix and a d vector");
  const std::size_t first = half == QueryHalf::kHuman ? 0 : d;
  std::vector<double> out(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    if (pooled[i] != 0.0) kernels::axpy(pooled[i], proj_query.row(first + i), out);
  }
  return out;
}

std::vector<double> combine_query_halves(std::span<const double> human_half,
                                         std::span<const double> object_half) {
  require(human_half.size() == object_half.size(), ErrorCategory::kShape, "query halves differ in size");
  std::vector<double> q(human_half.begin(), human_half.end());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] += object_half[i];
  return q;
}

std::vector<double> grounded_query(const ImportanceField& alpha_h, const ImportanceField& alpha_o,
                                   const FeatureMap& fm, const RegFormerParams& params) {
  const std::vector<double> q_h = pool_patches(alpha_h, fm);
  const std::vector<double> q_o = pool_patches(alpha_o, fm);
  return combine_query_halves(query_half(q_h, params.proj_query, QueryHalf::kHuman),
                              query_half(q_o, params.proj_query, QueryHalf::kObject));
}

}  // namespace regformer
