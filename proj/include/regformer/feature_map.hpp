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

#include <cstddef>
#include <span>
#include <utility>

#include "regformer/numerics.hpp"

namespace regformer {

// Backbone output: grid_h x grid_w patches, each a d_v vector x(p), stored
// row-major (patch index = row * grid_w + col). The grid spans the unit
// square; patch (i, j) has center ((j + 0.5) / grid_w, (i + 0.5) / grid_h).
struct FeatureMap {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  Tensor2D patches;  // (grid_h * grid_w) x d_v

  FeatureMap() = default;
  FeatureMap(std::size_t h, std::size_t w, Tensor2D p);

  std::size_t patch_count() const noexcept { return grid_h * grid_w; }
  std::size_t dim() const noexcept { return patches.cols(); }
  std::span<const double> patch(std::size_t p) const { return patches.row(p); }
  std::pair<double, double> patch_center(std::size_t p) const noexcept {
    const std::size_t i = p / grid_w;
    const std::size_t j = p % grid_w;
    return {(static_cast<double>(j) + 0.5) / static_cast<double>(grid_w),
            (static_cast<double>(i) + 0.5) / static_cast<double>(grid_h)};
  }

  friend bool operator==(const FeatureMap&, const FeatureMap&) = default;
};

}  // namespace regformer
