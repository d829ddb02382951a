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

// HOI detection mAP with Full / Rare / Non-rare grouping.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/detection.hpp"
#include "regformer/geometry.hpp"

namespace regformer {

inline constexpr double kMatchIou = 0.5;
inline constexpr std::size_t kDefaultRareThreshold = 10;

struct GroundTruthEntry {
  Box human_box;
  Box object_box;
  int object_class = 0;
  int action = 0;
};

struct GroundTruthImage {
  std::string image_id;
  std::vector<GroundTruthEntry> annotations;
};

struct GroundTruth {
  std::vector<GroundTruthImage> images;
};

bool match_pair(const HOIPrediction& pred, const GroundTruthEntry& gt);

// All-point AP from predictions already ranked best first. tp[k] marks a
// true positive at rank k; n_gt is the number of ground-truth instances.
double average_precision_ranked(std::span<const std::uint8_t> tp, std::size_t n_gt);

// AP of one HOI class. Predictions of other classes are ignored. Returns
// nullopt when the class has no ground truth.
std::optional<double> average_precision(std::span<const HOIPrediction> preds,
                                        const GroundTruth& gt, HoiClass cls);

struct ClassAp {
  HoiClass cls;
  std::size_t gt_count = 0;
  bool rare = false;
  double ap = 0.0;
};

struct EvalOptions {
  std::size_t rare_threshold = kDefaultRareThreshold;
  std::optional<std::set<HoiClass>> class_filter;  // evaluate only these classes
  std::size_t threads = 1;
};

struct EvalReport {
  std::vector<ClassAp> classes;  // sorted by (action, object)
  std::optional<double> map_full;
  std::optional<double> map_rare;
  std::optional<double> map_nonrare;
  std::size_t rare_threshold = kDefaultRareThreshold;
  std::size_t unknown_predictions = 0;  // predictions whose class has no ground truth
  std::vector<std::string> warnings;
};

EvalReport evaluate(std::span<const HOIPrediction> preds, const GroundTruth& gt,
                    const EvalOptions& opts = {});

GroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path);

std::string report_json(const EvalReport& report);
std::string report_table(const EvalReport& report);

}  // namespace regformer
