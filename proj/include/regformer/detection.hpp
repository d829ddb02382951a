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

// Training-free instance-level HOI detection on top of a classification
// model: proposals restrict grounding through region masks, pairs are
// decoded with the shared per-image fields.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/counters.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/geometry.hpp"
#include "regformer/params.hpp"

namespace regformer {

struct Detection {
  Box box;
  double score = 1.0;  // (0, 1]
  int class_id = 0;
  friend bool operator==(const Detection&, const Detection&) = default;
};

void validate_detection(const Detection& det);

struct DetectionFile {
  std::string image_id;
  std::vector<Detection> detections;
};

struct PredictionFactors {
  double s_a = 0.0;
  double r_ho = 0.0;
  double det = 0.0;  // s_h * s_o before the lambda exponent
  friend bool operator==(const PredictionFactors&, const PredictionFactors&) = default;
};

struct HOIPrediction {
  std::string image_id;
  Box human_box;
  Box object_box;
  int object_class = 0;
  int action = 0;
  double score = 0.0;
  PredictionFactors factors;
  friend bool operator==(const HOIPrediction&, const HOIPrediction&) = default;
};

inline constexpr double kDefaultScoreThreshold = 0.2;
inline constexpr std::size_t kDefaultMinInstances = 3;
inline constexpr std::size_t kDefaultMaxInstances = 15;
inline constexpr double kHicoLambda = 0.5;
inline constexpr double kVcocoLambda = 2.0;

struct DetectorConfig {
  double score_threshold = kDefaultScoreThreshold;
  std::size_t min_instances = kDefaultMinInstances;
  std::size_t max_instances = kDefaultMaxInstances;
  double lambda = kHicoLambda;
  int human_class_id = 0;

  static DetectorConfig hico();
  static DetectorConfig vcoco();
  void validate() const;
};

struct Proposals {
  std::vector<Detection> humans;
  std::vector<Detection> objects;
};

Proposals filter_proposals(const std::vector<Detection>& dets, const DetectorConfig& cfg);

struct DetectOptions {
  std::size_t threads = 1;
  PassCounters* counters = nullptr;
  std::vector<std::string>* diagnostics = nullptr;  // one line per skipped pair
  std::string image_id;
};

// Predictions are ordered by (human index, object index, action).
std::vector<HOIPrediction> detect(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                  const RegFormerParams& params,
                                  const std::vector<Detection>& humans,
                                  const std::vector<Detection>& objects,
                                  const DetectorConfig& cfg, const DetectOptions& opts = {});

// Recomputes every field for every pair. Same contract as detect.
std::vector<HOIPrediction> detect_naive(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                        const RegFormerParams& params,
                                        const std::vector<Detection>& humans,
                                        const std::vector<Detection>& objects,
                                        const DetectorConfig& cfg,
                                        const DetectOptions& opts = {});

double fused_score(const PredictionFactors& f, double gamma, double lambda);

DetectionFile read_detections(const std::filesystem::path& path);
void write_detections(const DetectionFile& file, const std::filesystem::path& path);

void write_prediction_line(const HOIPrediction& pred, std::ostream& out);
void write_predictions(const std::vector<HOIPrediction>& preds, const std::filesystem::path& path);
std::vector<HOIPrediction> read_predictions(const std::filesystem::path& path);

}  // namespace regformer
