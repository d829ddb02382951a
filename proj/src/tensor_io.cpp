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

#include "regformer/tensor_io.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <json.hpp>

#include "regformer/errors.hpp"

namespace regformer {

namespace {

constexpr char kTensorMagic[4] = {'R', 'G', 'F', 'T'};

std::uint32_t read_u32(std::span<const std::uint8_t> bytes, std::size_t& offset, const char* what) {
  require(offset + 4 <= bytes.size(), ErrorCategory::kFormat,
          std::string("tensor truncated reading ") + what + " at offset " + std::to_string(offset));
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  offset += 4;
  return v;
}

void append(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

}  // namespace

std::vector<std::uint8_t> encode_tensor(const RawTensor& t) {
  std::size_t count = 1;
  for (std::uint32_t d : t.dims) count *= d;
  require(count == t.values.size(), ErrorCategory::kShape, "tensor dims do not match payload length");
  std::vector<std::uint8_t> out;
  out.reserve(12 + 4 * t.dims.size() + 4 * count);
  append(out, kTensorMagic, 4);
  const std::uint32_t version = kTensorVersion;
  const auto rank = static_cast<std::uint32_t>(t.dims.size());
  append(out, &version, 4);
  append(out, &rank, 4);
  for (std::uint32_t d : t.dims) append(out, &d, 4);
  for (double v : t.values) {
    const auto f = static_cast<float>(v);
    append(out, &f, 4);
  }
  return out;
}

RawTensor decode_tensor(std::span<const std::uint8_t> bytes) {
  require(bytes.size() >= 4 && std::memcmp(bytes.data(), kTensorMagic, 4) == 0,
          ErrorCategory::kFormat, "bad tensor magic at offset 0 (expected RGFT)");
  std::size_t offset = 4;
  const std::uint32_t version = read_u32(bytes, offset, "version");
  require(version == kTensorVersion, ErrorCategory::kFormat,
          "unsupported tensor version " + std::to_string(version) + " at offset 4");
  const std::uint32_t rank = read_u32(bytes, offset, "rank");
  require(rank >= 1 && rank <= 8, ErrorCategory::kFormat,
          "unsupported tensor rank " + std::to_string(rank) + " at offset 8");
  RawTensor t;
  std::size_t count = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    t.dims.push_back(read_u32(bytes, offset, "dims"));
    count *= t.dims.back();
  }
  require(bytes.size() - offset == 4 * count, ErrorCategory::kFormat,
          "tensor payload at offset " + std::to_string(offset) + " holds " +
              std::to_string(bytes.size() - offset) + " bytes, dims require " +
              std::to_string(4 * count));
  t.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + offset + 4 * i, 4);
    require(std::isfinite(f), ErrorCategory::kFormat,
            "non-finite value at offset " + std::to_string(offset + 4 * i));
    t.values[i] = f;
  }
  return t;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(std::span<const std::uint8_t> bytes, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  require(static_cast<bool>(out), ErrorCategory::kIo, "failed writing " + path.string());
}

void write_tensor(const RawTensor& tensor, const std::filesystem::path& path) {
  write_file_bytes(encode_tensor(tensor), path);
}

RawTensor read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file_bytes(path));
  } catch (const Error& e) {
    if (e.category() != ErrorCategory::kFormat) throw;
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
}

void save_feature_map(const FeatureMap& fm, const std::filesystem::path& path) {
  RawTensor t;
  t.dims = {static_cast<std::uint32_t>(fm.grid_h), static_cast<std::uint32_t>(fm.grid_w),
            static_cast<std::uint32_t>(fm.dim())};
  t.values.assign(fm.patches.values().begin(), fm.patches.values().end());
  write_tensor(t, path);
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  RawTensor t = read_tensor(path);
  require(t.dims.size() == 3, ErrorCategory::kFormat,
          path.string() + ": feature map must be rank 3 [grid_h, grid_w, d_v]");
  return FeatureMap(t.dims[0], t.dims[1],
                    Tensor2D(std::size_t{t.dims[0]} * t.dims[1], t.dims[2], std::move(t.values)));
}

std::filesystem::path bank_sidecar_path(const std::filesystem::path& tensor_path) {
  std::filesystem::path p = tensor_path;
  p += ".json";
  return p;
}

void save_bank(const TextEmbeddingBank& bank, const std::filesystem::path& path) {
  bank.validate();
  const std::size_t d_t = bank.dim();
  const std::size_t n_hoi = bank.hoi ? bank.hoi->rows() : 0;
  RawTensor t;
  t.dims = {static_cast<std::uint32_t>(1 + bank.object_count() + bank.action_count() + n_hoi),
            static_cast<std::uint32_t>(d_t)};
  t.values.insert(t.values.end(), bank.human.begin(), bank.human.end());
  t.values.insert(t.values.end(), bank.objects.values().begin(), bank.objects.values().end());
  t.values.insert(t.values.end(), bank.actions.values().begin(), bank.actions.values().end());
  if (bank.hoi) t.values.insert(t.values.end(), bank.hoi->values().begin(), bank.hoi->values().end());
  write_tensor(t, path);

  nlohmann::json side;
  side["objects"] = bank.object_names;
  side["actions"] = bank.action_names;
  nlohmann::json hoi = nlohmann::json::array();
  for (const HoiClass& c : bank.hoi_classes) hoi.push_back({c.action, c.object});
  side["hoi"] = hoi;
  const std::string text = side.dump(2) + "\n";
  write_file_bytes(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()),
                   bank_sidecar_path(path));
}

TextEmbeddingBank load_bank(const std::filesystem::path& path) {
  RawTensor t = read_tensor(path);
  require(t.dims.size() == 2, ErrorCategory::kFormat, path.string() + ": bank must be rank 2");
  const std::filesystem::path side_path = bank_sidecar_path(path);
  std::ifstream in(side_path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open bank sidecar " + side_path.string());
  nlohmann::json side;
  try {
    side = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kFormat, side_path.string() + ": " + e.what());
  }

  TextEmbeddingBank bank;
  try {
    bank.object_names = side.at("objects").get<std::vector<std::string>>();
    bank.action_names = side.at("actions").get<std::vector<std::string>>();
    if (side.contains("hoi")) {
      for (const auto& pair : side.at("hoi")) {
        bank.hoi_classes.push_back({pair.at(0).get<int>(), pair.at(1).get<int>()});
      }
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCategory::kFormat, side_path.string() + ": " + e.what());
  }

  const std::size_t n_o = bank.object_names.size();
  const std::size_t n_a = bank.action_names.size();
  const std::size_t n_hoi = bank.hoi_classes.size();
  const std::size_t d_t = t.dims[1];
  require(t.dims[0] == 1 + n_o + n_a + n_hoi, ErrorCategory::kFormat,
          path.string() + ": " + std::to_string(t.dims[0]) + " rows but the sidecar names " +
              std::to_string(1 + n_o + n_a + n_hoi));
  auto rows = [&](std::size_t first, std::size_t count) {
    const auto begin = t.values.begin() + static_cast<std::ptrdiff_t>(first * d_t);
    return Tensor2D(count, d_t, std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(count * d_t)));
  };
  bank.human.assign(t.values.begin(), t.values.begin() + static_cast<std::ptrdiff_t>(d_t));
  bank.objects = rows(1, n_o);
  bank.actions = rows(1 + n_o, n_a);
  if (n_hoi > 0) bank.hoi = rows(1 + n_o + n_a, n_hoi);
  bank.validate();
  return bank;
}

}  // namespace regformer
