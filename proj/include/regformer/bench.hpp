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

// Pairwise inference cost: the shared-grounding path against per-pair
// recomputation and the union-crop baseline.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/counters.hpp"
#include "regformer/detection.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/geometry.hpp"

namespace regformer {

enum class BenchStrategy { kRegFormer, kRegFormerNaive, kMlDecoderCrop };

std::string_view strategy_name(BenchStrategy s) noexcept;
BenchStrategy parse_strategy(std::string_view name);

struct BenchConfig {
  std::size_t grid = 16;
  std::size_t d_v = 256;
  std::size_t d_t = 256;
  std::size_t n_objects = 8;
  std::size_t n_actions = 8;
  std::vector<std::size_t> pair_counts{1, 50, 200};
  std::vector<BenchStrategy> strategies{BenchStrategy::kRegFormer, BenchStrategy::kRegFormerNaive,
                                        BenchStrategy::kMlDecoderCrop};
  std::size_t iterations = 100;
  std::size_t warmup = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

struct BenchScene {
  FeatureMap fm;
  TextEmbeddingBank bank;
  std::vector<Detection> humans;
  std::vector<Detection> objects;
};

// humans x objects == pair_count, with the human count the largest divisor
// not above sqrt(pair_count).
BenchScene bench_scene(const BenchConfig& cfg, std::size_t pair_count);

FeatureMap crop_feature_map(const FeatureMap& fm, const Box& box);

struct BenchResult {
  std::string strategy;
  std::size_t pair_count = 0;
  double median_ms = 0.0;
  double images_per_second = 0.0;
  std::size_t iterations = 0;
  PassCounters counters;  // one iteration
};

// Rows sorted by (strategy, pair_count).
std::vector<BenchResult> run_benchmark(const BenchConfig& cfg);

std::string bench_json(const std::vector<BenchResult>& results);
std::string bench_csv(const std::vector<BenchResult>& results);

}  // namespace regformer
