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

#include <cmath>
#include <string>

#include "regformer/bank.hpp"
#include "regformer/errors.hpp"
#include "regformer/feature_map.hpp"

namespace regformer {

FeatureMap::FeatureMap(std::size_t h, std::size_t w, Tensor2D p)
    : grid_h(h), grid_w(w), patches(std::move(p)) {
  require(grid_h >= 1 && grid_w >= 1, ErrorCategory::kArgument, "feature map grid must be >= 1x1");
  require(patches.rows() == grid_h * grid_w, ErrorCategory::kShape,
          "feature map has " + std::to_string(patches.rows()) + " patch rows for a " +
              std::to_string(grid_h) + "x" + std::to_string(grid_w) + " grid");
  require(patches.cols() >= 1, ErrorCategory::kShape, "feature map patch dim must be >= 1");
  require(patches.all_finite(), ErrorCategory::kArgument, "feature map contains non-finite values");
}

void TextEmbeddingBank::validate() const {
  const std::size_t d_t = human.size();
  require(d_t > 0, ErrorCategory::kShape, "bank: empty human embedding");
  require(objects.rows() >= 1 && actions.rows() >= 1, ErrorCategory::kShape,
          "bank: need at least one object class and one action");
  require(objects.cols() == d_t && actions.cols() == d_t, ErrorCategory::kShape,
          "bank: object/action rows must match the human embedding dim");
  require(object_names.empty() || object_names.size() == objects.rows(), ErrorCategory::kShape,
          "bank: object name count mismatch");
  require(action_names.empty() || action_names.size() == actions.rows(), ErrorCategory::kShape,
          "bank: action name count mismatch");
  auto check_row = [](std::span<const double> row, const std::string& what) {
    double sq = 0.0;
    for (double v : row) {
      require(std::isfinite(v), ErrorCategory::kArgument, "bank: non-finite value in " + what);
      sq += v * v;
    }
    require(sq > 0.0, ErrorCategory::kArgument, "bank: zero embedding for " + what);
  };
  check_row(human, "human");
  for (std::size_t k = 0; k < objects.rows(); ++k) check_row(objects.row(k), "object " + std::to_string(k));
  for (std::size_t a = 0; a < actions.rows(); ++a) check_row(actions.row(a), "action " + std::to_string(a));
  if (hoi) {
    require(hoi->cols() == d_t, ErrorCategory::kShape, "bank: hoi rows must match d_t");
    require(hoi_classes.size() == hoi->rows(), ErrorCategory::kShape,
            "bank: one (action, object) pair per hoi row required");
    for (std::size_t t = 0; t < hoi->rows(); ++t) check_row(hoi->row(t), "hoi " + std::to_string(t));
    for (const HoiClass& c : hoi_classes) {
      require(c.action >= 0 && static_cast<std::size_t>(c.action) < actions.rows() &&
                  c.object >= 0 && static_cast<std::size_t>(c.object) < objects.rows(),
              ErrorCategory::kArgument, "bank: hoi class index out of range");
    }
  }
}

}  // namespace regformer
