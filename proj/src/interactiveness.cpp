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

#include "regformer/interactiveness.hpp"

#include <cmath>

#include "regformer/errors.hpp"

namespace regformer {

PatchInteractiveness patch_interactiveness(const SimilarityField& field,
                                           const RegFormerParams& params) {
  PatchInteractiveness out;
  out.human.resize(field.human.size());
  for (std::size_t p = 0; p < field.human.size(); ++p) out.human[p] = params.sig_inter_h(field.human[p]);
  out.objects = Tensor2D(field.objects.rows(), field.objects.cols());
  for (std::size_t i = 0; i < field.objects.size(); ++i) {
    out.objects.values()[i] = params.sig_inter_o(field.objects.values()[i]);
  }
  return out;
}

double image_interactiveness(const ImportanceField& alpha, std::span<const double> s_hat) {
  require(alpha.alpha.size() == s_hat.size(), ErrorCategory::kShape,
          "interactiveness: importance and score grids differ");
  double r = 0.0;
  for (std::size_t p = 0; p < s_hat.size(); ++p) r += alpha.alpha[p] * s_hat[p];
  return r;
}

double pairwise_interactiveness(double r_h, double r_o) {
  require(r_h > 0.0 && r_o > 0.0, ErrorCategory::kArgument,
          "pairwise interactiveness needs positive inputs");
  return std::sqrt(r_h * r_o);
}

InstanceInteractiveness instance_interactiveness(const ImportanceField& alpha_inst,
                                                 std::span<const double> s_hat,
                                                 const ImportanceField& alpha_image,
                                                 const RegionMask& mask) {
  require(alpha_inst.alpha.size() == s_hat.size() && alpha_image.alpha.size() == s_hat.size() &&
              mask.size() == s_hat.size(),
          ErrorCategory::kShape, "instance interactiveness: grids differ");
  InstanceInteractiveness out;
  out.local = image_interactiveness(alpha_inst, s_hat);
  for (std::size_t p = 0; p < s_hat.size(); ++p) {
    if (mask.contains(p)) out.masked_global += alpha_image.alpha[p];
  }
  out.r = out.local * out.masked_global;
  return out;
}

}  // namespace regformer
