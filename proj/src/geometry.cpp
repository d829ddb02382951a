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

#include "regformer/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regformer/errors.hpp"

namespace regformer {

void validate_box(const Box& b) {
  const bool finite = std::isfinite(b.x1) && std::isfinite(b.y1) && std::isfinite(b.x2) &&
                      std::isfinite(b.y2);
  if (finite && b.x1 >= 0.0 && b.y1 >= 0.0 && b.x2 <= 1.0 && b.y2 <= 1.0 && b.x1 < b.x2 &&
      b.y1 < b.y2) {
    return;
  }
  std::ostringstream msg;
  msg << "invalid box [" << b.x1 << ", " << b.y1 << ", " << b.x2 << ", " << b.y2
      << "]: need 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1";
  fail(ErrorCategory::kArgument, msg.str());
}

double iou(const Box& a, const Box& b) noexcept {
  const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

Box union_box(const Box& a, const Box& b) noexcept {
  return {std::min(a.x1, b.x1), std::min(a.y1, b.y1), std::max(a.x2, b.x2),
          std::max(a.y2, b.y2)};
}

}  // namespace regformer
