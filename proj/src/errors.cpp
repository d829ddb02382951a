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

#include "regformer/errors.hpp"

namespace regformer {

std::string_view category_name(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::kShape: return "shape";
    case ErrorCategory::kArgument: return "argument";
    case ErrorCategory::kEmptyMask: return "empty_mask";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kIo: return "io";
    case ErrorCategory::kNumerical: return "numerical";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kGeneration: return "generation";
    case ErrorCategory::kOracle: return "oracle";
  }
  return "unknown";
}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace regformer
