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

#include <stdexcept>
#include <string>
#include <string_view>

namespace regformer {

enum class ErrorCategory {
  kShape,
  kArgument,
  kEmptyMask,
  kFormat,
  kIo,
  kNumerical,
  kConfig,
  kGeneration,
  kOracle,
};

std::string_view category_name(ErrorCategory category) noexcept;

// Every failure raised by the library carries a category so the CLI can
// report it as "ERROR:<category>: message".
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& message)
      : std::runtime_error(message), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category,
                    const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace regformer
