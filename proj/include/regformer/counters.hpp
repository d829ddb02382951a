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

#include <cstdint>

namespace regformer {

// Exact work counters filled in by the inference paths. They define the
// cost model the benchmark reports next to wall time.
struct PassCounters {
  // patch_similarity evaluations (projection of every patch + text).
  std::uint64_t grounding_passes = 0;
  // Key/value projections of a full (or cropped) feature map.
  std::uint64_t attention_contexts = 0;
  // Single-query cross-attention evaluations over a grid.
  std::uint64_t attention_queries = 0;
  // interaction_decode calls (one per human-object pair).
  std::uint64_t decoder_forwards = 0;
  // ml_decoder_forward calls (one per union crop for the baseline).
  std::uint64_t baseline_forwards = 0;

  PassCounters& operator+=(const PassCounters& o) {
    grounding_passes += o.grounding_passes;
    attention_contexts += o.attention_contexts;
    attention_queries += o.attention_queries;
    decoder_forwards += o.decoder_forwards;
    baseline_forwards += o.baseline_forwards;
    return *this;
  }
  friend bool operator==(const PassCounters&, const PassCounters&) = default;
};

}  // namespace regformer
