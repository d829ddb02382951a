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

#include "regformer/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "regformer/errors.hpp"
#include "regformer/tensor_io.hpp"

namespace regformer {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorCategory::kIo, "cannot create directory " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCategory::kIo, "write failed for " + path.string());
}

}  // namespace

void write_dataset(const SyntheticData& data, const fs::path& dir) {
  make_dir(dir / "images");
  make_dir(dir / "detections");
  save_bank(data.bank, dir / "bank.rgft");

  json images = json::array();
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    const ImageSample& s = data.samples[i];
    const fs::path features = fs::path("images") / (s.image_id + ".rgft");
    const fs::path dets = fs::path("detections") / (s.image_id + ".json");
    save_feature_map(s.fm, dir / features);
    write_detections({s.image_id, planted_detections(data.scenes[i], data.human_class_id)},
                     dir / dets);
    json labels = json::array();
    for (const HoiClass& c : s.labels) labels.push_back({c.action, c.object});
    images.push_back({{"image_id", s.image_id},
                      {"features", features.generic_string()},
                      {"detections", dets.generic_string()},
                      {"labels", labels}});
  }
  const SyntheticSpec& spec = data.spec;
  const json manifest = {{"version", kManifestVersion},
                         {"grid_h", spec.grid_h},
                         {"grid_w", spec.grid_w},
                         {"d_v", spec.d_v},
                         {"d_t", spec.d_t},
                         {"n_objects", spec.n_objects},
                         {"n_actions", spec.n_actions},
                         {"human_class_id", data.human_class_id},
                         {"seed", spec.seed},
                         {"noise_std", spec.noise_std},
                         {"images", images}};
  write_text(dir / "manifest.json", manifest.dump(2) + "\n");
  write_ground_truth(planted_ground_truth(data.scenes), dir / "gt.json");
  write_text(dir / "config.ini", "[model]\nd_v = " + std::to_string(spec.d_v) +
                                     "\nd_t = " + std::to_string(spec.d_t) +
                                     "\n\n[detector]\nhuman_class_id = " +
                                     std::to_string(data.human_class_id) + "\n");
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  Manifest m;
  try {
    const json doc = json::parse(in);
    const int version = doc.at("version").get<int>();
    require(version == kManifestVersion, ErrorCategory::kFormat,
            path.string() + ": unsupported manifest version " + std::to_string(version));
    m.grid_h = doc.at("grid_h").get<std::size_t>();
    m.grid_w = doc.at("grid_w").get<std::size_t>();
    m.d_v = doc.at("d_v").get<std::size_t>();
    m.d_t = doc.at("d_t").get<std::size_t>();
    m.human_class_id = doc.value("human_class_id", 0);
    for (const json& img : doc.at("images")) {
      DatasetEntry e;
      e.image_id = img.at("image_id").get<std::string>();
      e.features = img.at("features").get<std::string>();
      e.detections = img.value("detections", std::string());
      for (const json& l : img.at("labels")) {
        require(l.is_array() && l.size() == 2, ErrorCategory::kFormat,
                path.string() + ": label of " + e.image_id + " must be [action, object]");
        e.labels.push_back({l[0].get<int>(), l[1].get<int>()});
      }
      m.images.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
  return m;
}

Dataset load_dataset(const fs::path& dir) {
  Dataset ds;
  ds.root = dir;
  ds.manifest = read_manifest(dir / "manifest.json");
  ds.bank = load_bank(dir / "bank.rgft");
  require(ds.bank.dim() == ds.manifest.d_t, ErrorCategory::kFormat,
          "bank dim does not match the manifest d_t");
  for (const DatasetEntry& e : ds.manifest.images) {
    FeatureMap fm = load_feature_map(dir / e.features);
    require(fm.grid_h == ds.manifest.grid_h && fm.grid_w == ds.manifest.grid_w &&
                fm.dim() == ds.manifest.d_v,
            ErrorCategory::kFormat, (dir / e.features).string() + ": shape differs from the manifest");
    // Range check of the labels against the bank.
    (void)label_matrix(e.labels, ds.bank.object_count(), ds.bank.action_count());
    ds.samples.push_back({e.image_id, std::move(fm), e.labels});
  }
  return ds;
}

}  // namespace regformer
