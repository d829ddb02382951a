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

// Planted-signal scenes: a human blob and object blobs aligned with the
// bank embeddings, with an action signature added on interacting blobs.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/detection.hpp"
#include "regformer/evaluation.hpp"
#include "regformer/geometry.hpp"
#include "regformer/training.hpp"

namespace regformer {

struct SyntheticSpec {
  std::size_t grid_h = 6;
  std::size_t grid_w = 6;
  std::size_t d_v = 16;
  std::size_t d_t = 16;
  std::size_t n_objects = 3;
  std::size_t n_actions = 3;
  std::size_t n_images = 24;
  double noise_std = 0.1;
  std::uint64_t seed = 0;
  std::size_t interactions_per_image = 1;
  std::size_t distractors_per_image = 1;
  std::size_t max_blob_side = 2;
  double object_strength = 1.0;
  double action_strength = 1.0;
  // Strength of a random per-image direction added on distractor blobs, so
  // that they differ from their class text as much as interacting blobs do.
  double distractor_strength = 1.0;
  // Scenes are drawn per global index, so a second call with a later
  // first index yields held-out scenes over the same bank.
  std::size_t first_image_index = 0;

  void validate() const;
};

struct PlantedObject {
  Box box;
  int object_class = 0;
  int action = -1;  // -1 for a non-interacting distractor
};

struct PlantedScene {
  std::string image_id;
  Box human_box;
  std::vector<PlantedObject> objects;
  std::vector<HoiClass> labels;
};

struct SyntheticData {
  SyntheticSpec spec;
  TextEmbeddingBank bank;
  std::vector<ImageSample> samples;
  std::vector<PlantedScene> scenes;
  int human_class_id = 0;  // one past the last object class
};

TextEmbeddingBank synthetic_bank(std::size_t d_t, std::size_t n_objects, std::size_t n_actions,
                                 std::uint64_t seed);

SyntheticData generate_synthetic(const SyntheticSpec& spec);

GroundTruth planted_ground_truth(const std::vector<PlantedScene>& scenes);

// Exact planted boxes as detector output with score 1.
std::vector<Detection> planted_detections(const PlantedScene& scene, int human_class_id);

}  // namespace regformer
