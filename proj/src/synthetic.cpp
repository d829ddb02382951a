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

#include "regformer/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "regformer/errors.hpp"
#include "regformer/rng.hpp"

namespace regformer {

namespace {

constexpr std::uint64_t kBankStream = 0x42414E4B;
constexpr std::uint64_t kSceneStream = 0x5343454E;
constexpr int kPlacementAttempts = 200;

double to_float(double v) { return static_cast<double>(static_cast<float>(v)); }

void normalize(std::span<double> v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

struct Cells {
  std::size_t i0, j0, h, w;
  bool overlaps(const Cells& o) const {
    return i0 < o.i0 + o.h && o.i0 < i0 + h && j0 < o.j0 + o.w && o.j0 < j0 + w;
  }
};

Box cells_to_box(const Cells& c, std::size_t grid_h, std::size_t grid_w) {
  const auto gh = static_cast<double>(grid_h);
  const auto gw = static_cast<double>(grid_w);
  return {static_cast<double>(c.j0) / gw, static_cast<double>(c.i0) / gh,
          static_cast<double>(c.j0 + c.w) / gw, static_cast<double>(c.i0 + c.h) / gh};
}

void add_on_cells(Tensor2D& patches, const Cells& c, std::size_t grid_w,
                  std::span<const double> direction, double scale) {
  for (std::size_t i = c.i0; i < c.i0 + c.h; ++i) {
    for (std::size_t j = c.j0; j < c.j0 + c.w; ++j) {
      auto row = patches.row(i * grid_w + j);
      for (std::size_t k = 0; k < direction.size(); ++k) row[k] += scale * direction[k];
    }
  }
}

}  // namespace

void SyntheticSpec::validate() const {
  require(grid_h >= 1 && grid_w >= 1 && d_v >= 1 && d_t >= 1 && n_objects >= 1 &&
              n_actions >= 1 && n_images >= 1 && max_blob_side >= 1,
          ErrorCategory::kArgument, "synthetic spec: counts and dims must be positive");
  require(d_v >= d_t, ErrorCategory::kArgument,
          "synthetic spec: d_v must be >= d_t (visual concepts embed the text vectors)");
  require(noise_std >= 0.0 && std::isfinite(noise_std), ErrorCategory::kArgument,
          "synthetic spec: noise_std must be >= 0");
  require(distractor_strength >= 0.0 && std::isfinite(distractor_strength), ErrorCategory::kArgument,
          "synthetic spec: distractor_strength must be >= 0");
  require(interactions_per_image >= 1, ErrorCategory::kArgument,
          "synthetic spec: need at least one interaction per image");
  require(interactions_per_image + distractors_per_image <= n_objects, ErrorCategory::kGeneration,
          "synthetic spec: " + std::to_string(interactions_per_image + distractors_per_image) +
              " objects per image need that many distinct object classes, have " +
              std::to_string(n_objects));
}

TextEmbeddingBank synthetic_bank(std::size_t d_t, std::size_t n_objects, std::size_t n_actions,
                                 std::uint64_t seed) {
  Rng rng(seed, kBankStream);
  const std::size_t n = 1 + n_objects + n_actions;
  Tensor2D rows(n, d_t);
  for (std::size_t r = 0; r < n; ++r) {
    auto v = rows.row(r);
    for (double& x : v) x = rng.normal();
    // Gram-Schmidt for the first d_t rows. Later rows stay random unit
    // vectors, which are only nearly orthogonal to the rest.
    for (std::size_t prev = 0; r < d_t && prev < r; ++prev) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d_t; ++k) dot += v[k] * rows(prev, k);
      for (std::size_t k = 0; k < d_t; ++k) v[k] -= dot * rows(prev, k);
    }
    normalize(v);
  }
  for (double& x : rows.values()) x = to_float(x);

  TextEmbeddingBank bank;
  bank.human.assign(rows.row(0).begin(), rows.row(0).end());
  bank.objects = Tensor2D(n_objects, d_t);
  bank.actions = Tensor2D(n_actions, d_t);
  for (std::size_t k = 0; k < n_objects; ++k) {
    std::copy_n(rows.row(1 + k).begin(), d_t, bank.objects.row(k).begin());
    bank.object_names.push_back("object_" + std::to_string(k));
  }
  for (std::size_t a = 0; a < n_actions; ++a) {
    std::copy_n(rows.row(1 + n_objects + a).begin(), d_t, bank.actions.row(a).begin());
    bank.action_names.push_back("action_" + std::to_string(a));
  }
  Tensor2D hoi(n_actions * n_objects, d_t);
  for (std::size_t a = 0; a < n_actions; ++a) {
    for (std::size_t k = 0; k < n_objects; ++k) {
      auto row = hoi.row(a * n_objects + k);
      for (std::size_t c = 0; c < d_t; ++c) row[c] = bank.actions(a, c) + bank.objects(k, c);
      normalize(row);
      for (double& x : row) x = to_float(x);
      bank.hoi_classes.push_back({static_cast<int>(a), static_cast<int>(k)});
    }
  }
  bank.hoi = std::move(hoi);
  bank.validate();
  return bank;
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  SyntheticData data;
  data.spec = spec;
  data.bank = synthetic_bank(spec.d_t, spec.n_objects, spec.n_actions, spec.seed);
  data.human_class_id = static_cast<int>(spec.n_objects);

  const std::size_t n_blobs = 1 + spec.interactions_per_image + spec.distractors_per_image;
  const std::size_t side_h = std::min(spec.max_blob_side, spec.grid_h);
  const std::size_t side_w = std::min(spec.max_blob_side, spec.grid_w);
  const Rng scene_root(spec.seed, kSceneStream);
  const TextEmbeddingBank& bank = data.bank;

  for (std::size_t n = 0; n < spec.n_images; ++n) {
    const std::size_t index = spec.first_image_index + n;
    Rng rng = scene_root.split(index);
    char id[32];
    std::snprintf(id, sizeof id, "img_%05zu", index);

    std::vector<Cells> blobs;
    for (std::size_t b = 0; b < n_blobs; ++b) {
      bool placed = false;
      for (int attempt = 0; attempt < kPlacementAttempts && !placed; ++attempt) {
        Cells c{0, 0, 1 + rng.below(side_h), 1 + rng.below(side_w)};
        c.i0 = rng.below(spec.grid_h - c.h + 1);
        c.j0 = rng.below(spec.grid_w - c.w + 1);
        placed = std::none_of(blobs.begin(), blobs.end(), [&](const Cells& o) { return c.overlaps(o); });
        if (placed) blobs.push_back(c);
      }
      require(placed, ErrorCategory::kGeneration,
              "cannot place " + std::to_string(n_blobs) + " disjoint blobs on a " +
                  std::to_string(spec.grid_h) + "x" + std::to_string(spec.grid_w) +
                  " grid (image " + id + "); use a larger grid or smaller max_blob_side");
    }

    std::vector<std::size_t> classes(spec.n_objects);
    std::iota(classes.begin(), classes.end(), 0);
    rng.shuffle(classes);

    Tensor2D patches(spec.grid_h * spec.grid_w, spec.d_v);
    for (double& x : patches.values()) x = spec.noise_std * rng.normal();

    PlantedScene scene;
    scene.image_id = id;
    scene.human_box = cells_to_box(blobs[0], spec.grid_h, spec.grid_w);
    add_on_cells(patches, blobs[0], spec.grid_w, bank.human, spec.object_strength);
    for (std::size_t o = 0; o + 1 < n_blobs; ++o) {
      PlantedObject obj;
      obj.box = cells_to_box(blobs[o + 1], spec.grid_h, spec.grid_w);
      obj.object_class = static_cast<int>(classes[o]);
      add_on_cells(patches, blobs[o + 1], spec.grid_w, bank.objects.row(classes[o]),
                   spec.object_strength);
      if (o >= spec.interactions_per_image && spec.distractor_strength > 0.0) {
        std::vector<double> dir(spec.d_v);
        for (double& x : dir) x = rng.normal();
        const double len = norm(dir);
        for (double& x : dir) x /= len;
        add_on_cells(patches, blobs[o + 1], spec.grid_w, dir, spec.distractor_strength);
      }
      if (o < spec.interactions_per_image) {
        obj.action = static_cast<int>(rng.below(spec.n_actions));
        const auto action_vec = bank.actions.row(static_cast<std::size_t>(obj.action));
        add_on_cells(patches, blobs[0], spec.grid_w, action_vec, spec.action_strength);
        add_on_cells(patches, blobs[o + 1], spec.grid_w, action_vec, spec.action_strength);
        const HoiClass label{obj.action, obj.object_class};
        if (std::find(scene.labels.begin(), scene.labels.end(), label) == scene.labels.end()) {
          scene.labels.push_back(label);
        }
      }
      scene.objects.push_back(obj);
    }
    for (double& x : patches.values()) x = to_float(x);

    data.samples.push_back({scene.image_id, FeatureMap(spec.grid_h, spec.grid_w, std::move(patches)),
                            scene.labels});
    data.scenes.push_back(std::move(scene));
  }
  return data;
}

GroundTruth planted_ground_truth(const std::vector<PlantedScene>& scenes) {
  GroundTruth gt;
  for (const PlantedScene& s : scenes) {
    GroundTruthImage img;
    img.image_id = s.image_id;
    for (const PlantedObject& o : s.objects) {
      if (o.action >= 0) img.annotations.push_back({s.human_box, o.box, o.object_class, o.action});
    }
    gt.images.push_back(std::move(img));
  }
  return gt;
}

std::vector<Detection> planted_detections(const PlantedScene& scene, int human_class_id) {
  std::vector<Detection> dets;
  dets.push_back({scene.human_box, 1.0, human_class_id});
  for (const PlantedObject& o : scene.objects) dets.push_back({o.box, 1.0, o.object_class});
  return dets;
}

}  // namespace regformer
