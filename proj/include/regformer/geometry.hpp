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

#include <array>

namespace regformer {

// Axis-aligned box in normalized image coordinates, (x1, y1) top-left.
struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 1.0;
  double y2 = 1.0;

  static constexpr Box full() { return {0.0, 0.0, 1.0, 1.0}; }
  static Box from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
  std::array<double, 4> to_array() const { return {x1, y1, x2, y2}; }

  double width() const noexcept { return x2 - x1; }
  double height() const noexcept { return y2 - y1; }
  double area() const noexcept { return width() * height(); }
  double center_x() const noexcept { return 0.5 * (x1 + x2); }
  double center_y() const noexcept { return 0.5 * (y1 + y2); }
  bool contains(double x, double y) const noexcept {
    return x >= x1 && x <= x2 && y >= y1 && y <= y2;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

// Throws kArgument unless 0 <= x1 < x2 <= 1 and 0 <= y1 < y2 <= 1.
void validate_box(const Box& box);

double iou(const Box& a, const Box& b) noexcept;
Box union_box(const Box& a, const Box& b) noexcept;

}  // namespace regformer
