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

#include <span>
#include <vector>

#include "regformer/grounding.hpp"
#include "regformer/numerics.hpp"
#include "regformer/params.hpp"

namespace regformer {

// Patch-level interactiveness: scaled sigmoid of the similarity fields.
struct PatchInteractiveness {
  std::vector<double> human;  // one value per patch
  Tensor2D objects;           // N_o x patches
};

PatchInteractiveness patch_interactiveness(const SimilarityField& field,
                                           const RegFormerParams& params);

// r = sum_p alpha(p) s_hat(p)
double image_interactiveness(const ImportanceField& alpha, std::span<const double> s_hat);

// sqrt(r_h * r_o); both inputs must be positive.
double pairwise_interactiveness(double r_h, double r_o);

struct InstanceInteractiveness {
  double r = 0.0;
  double local = 0.0;          // sum_p alpha_inst(p) s_hat(p)
  double masked_global = 0.0;  // sum_p alpha_image(p) m(p)
};

InstanceInteractiveness instance_interactiveness(const ImportanceField& alpha_inst,
                                                 std::span<const double> s_hat,
                                                 const ImportanceField& alpha_image,
                                                 const RegionMask& mask);

}  // namespace regformer
