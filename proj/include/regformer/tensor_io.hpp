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

// "RGFT" tensor files: magic, u32 version, u32 rank, u32 dims[rank], then a
// float32 little-endian payload. Values are promoted to float64 on load.
//
// Feature maps are rank 3 [grid_h, grid_w, d_v]. An embedding bank is a
// rank 2 [rows, d_t] tensor (human row, object rows, action rows, hoi rows
// in that order) plus a JSON sidecar at "<path>.json" naming the rows.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/feature_map.hpp"

namespace regformer {

inline constexpr std::uint32_t kTensorVersion = 1;

struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<double> values;
};

std::vector<std::uint8_t> encode_tensor(const RawTensor& tensor);
RawTensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const RawTensor& tensor, const std::filesystem::path& path);
RawTensor read_tensor(const std::filesystem::path& path);

void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path);
FeatureMap load_feature_map(const std::filesystem::path& path);

std::filesystem::path bank_sidecar_path(const std::filesystem::path& tensor_path);
void save_bank(const TextEmbeddingBank& bank, const std::filesystem::path& path);
TextEmbeddingBank load_bank(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path);

}  // namespace regformer
