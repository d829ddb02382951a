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

// On-disk dataset directory:
//   manifest.json            image ids, feature paths, labels, dims
//   bank.rgft, bank.rgft.json
//   images/<id>.rgft         one feature map per image
//   gt.json                  instance annotations (synthetic data only)
//   detections/<id>.json     planted boxes in detector format
//   config.ini               detector settings matching the data

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/evaluation.hpp"
#include "regformer/synthetic.hpp"
#include "regformer/training.hpp"

namespace regformer {

struct DatasetEntry {
  std::string image_id;
  std::filesystem::path features;    // relative to the dataset root
  std::filesystem::path detections;  // empty when absent
  std::vector<HoiClass> labels;
};

struct Manifest {
  std::size_t grid_h = 0;
  std::size_t grid_w = 0;
  std::size_t d_v = 0;
  std::size_t d_t = 0;
  int human_class_id = 0;
  std::vector<DatasetEntry> images;
};

struct Dataset {
  std::filesystem::path root;
  Manifest manifest;
  TextEmbeddingBank bank;
  std::vector<ImageSample> samples;
};

void write_dataset(const SyntheticData& data, const std::filesystem::path& dir);

Manifest read_manifest(const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace regformer
