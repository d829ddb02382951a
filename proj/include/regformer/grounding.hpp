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

#pragma once

// Pairwise instance encoder: patch/text similarity, patch importance with
// optional region masking, and the spatially grounded pairwise query.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/geometry.hpp"
#include "regformer/numerics.hpp"
#include "regformer/params.hpp"

namespace regformer {

// Per-patch indicator of a box. Patch membership is decided by patch centers.
struct RegionMask {
  std::vector<std::uint8_t> bits;
  Box source;

  std::size_t size() const noexcept { return bits.size(); }
  std::size_t count() const noexcept;
  bool contains(std::size_t p) const { return bits[p] != 0; }
  AdditiveMask additive() const { return AdditiveMask::from_indicator(bits); }
};

// s^h(p) and s^o_k(p), all in [-1, 1].
struct SimilarityField {
  std::vector<double> human;  // one value per patch
  Tensor2D objects;           // N_o x patches
};

// Softmax-normalized patch weights; zero outside the mask when masked.
struct ImportanceField {
  std::vector<double> alpha;
};

// Patch and text features after the grounding projections. Kept around by
// the trainer for the backward pass.
struct GroundingProjection {
  Tensor2D patch_h;              // patches x d_s
  Tensor2D patch_o;              // patches x d_s
  std::vector<double> text_h;    // d_s
  Tensor2D text_o;               // N_o x d_s
};

GroundingProjection project_grounding(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                      const RegFormerParams& params);
SimilarityField similarity_from_projection(const GroundingProjection& proj);
SimilarityField patch_similarity(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                 const RegFormerParams& params);

ImportanceField patch_importance(std::span<const double> field, double tau_p,
                                 const RegionMask* mask = nullptr);

// m(p) = 1 iff the center of patch p lies in the box. When no center does,
// the single patch whose center is nearest the box center is selected
// (ties go to the lowest row-major index).
RegionMask box_to_mask(const Box& box, std::size_t grid_h, std::size_t grid_w);
inline RegionMask box_to_mask(const Box& box, const FeatureMap& fm) {
  return box_to_mask(box, fm.grid_h, fm.grid_w);
}

// sum_p alpha(p) x(p)
std::vector<double> pool_patches(const ImportanceField& alpha, const FeatureMap& fm);

// One half of P_q [q^h; q^o]: the human half multiplies rows [0, d) of
// P_q, the object half rows [d, 2d).
enum class QueryHalf { kHuman, kObject };
std::vector<double> query_half(std::span<const double> pooled, const Tensor2D& proj_query,
                               QueryHalf half);
std::vector<double> combine_query_halves(std::span<const double> human_half,
                                         std::span<const double> object_half);

// q^ho = P_q [sum alpha_h x ; sum alpha_o x]
std::vector<double> grounded_query(const ImportanceField& alpha_h, const ImportanceField& alpha_o,
                                   const FeatureMap& fm, const RegFormerParams& params);

}  // namespace regformer
