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
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "regformer/numerics.hpp"

namespace regformer {

// (action, object class) index pair naming one HOI class.
struct HoiClass {
  int action = 0;
  int object = 0;
  friend auto operator<=>(const HoiClass&, const HoiClass&) = default;
};

// Frozen text embeddings: human, one row per object class, one row per
// action, and optionally one row per HOI class for the ML-Decoder baseline.
struct TextEmbeddingBank {
  std::vector<double> human;  // d_t
  Tensor2D objects;           // N_o x d_t
  Tensor2D actions;           // N_a x d_t
  std::vector<std::string> object_names;
  std::vector<std::string> action_names;
  std::optional<Tensor2D> hoi;       // N_hoi x d_t
  std::vector<HoiClass> hoi_classes; // one per hoi row

  std::size_t dim() const noexcept { return human.size(); }
  std::size_t object_count() const noexcept { return objects.rows(); }
  std::size_t action_count() const noexcept { return actions.rows(); }

  // Throws kShape/kArgument when rows are zero, non-finite or mis-sized.
  void validate() const;
};

}  // namespace regformer
