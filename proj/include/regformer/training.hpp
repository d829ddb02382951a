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

// Image-level weakly supervised training: gated HOI classification score,
// focal loss, analytic gradients for every learnable parameter, and plain
// gradient descent with a cosine learning-rate schedule.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/decoder.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/grounding.hpp"
#include "regformer/interactiveness.hpp"
#include "regformer/params.hpp"

namespace regformer {

struct ImageSample {
  std::string image_id;
  FeatureMap fm;
  std::vector<HoiClass> labels;  // (action, object) pairs present in the image
};

struct FocalConfig {
  double gamma = 2.0;
  double alpha = 0.25;
};

inline constexpr double kScoreClamp = 1e-7;

struct TrainConfig {
  double lr = 2e-4;
  std::size_t epochs = 5;
  std::size_t batch_size = 8;
  FocalConfig focal;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

// Everything the forward pass computes for one image, kept for backprop.
struct ClassificationTape {
  GroundingProjection projection;
  SimilarityField similarity;
  PatchInteractiveness inter;
  ImportanceField alpha_h;
  std::vector<ImportanceField> alpha_o;  // per object class
  std::vector<double> pooled_h;          // q^h
  Tensor2D pooled_o;                     // q^o_k, N_o x d
  Tensor2D queries;                      // q^ho_k, N_o x d
  AttentionContext context;
  std::vector<DecodeTrace> decode;       // per object class
  Tensor2D s_a;                          // N_o x N_a
  double r_h = 0.0;
  std::vector<double> r_o;
  std::vector<double> r_ho;
  Tensor2D scores;                       // N_o x N_a
};

// s_hoi[k][a] = s_a[k][a] * (r_ho_k)^gamma for every object class k.
Tensor2D classification_forward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                const RegFormerParams& params,
                                ClassificationTape* tape = nullptr);

// 1 where (action, object) is labeled, laid out N_o x N_a.
Tensor2D label_matrix(std::span<const HoiClass> labels, std::size_t n_objects,
                      std::size_t n_actions);

// Mean over cells of the binary focal term; scores clamped to [1e-7, 1 - 1e-7].
double focal_loss(const Tensor2D& scores, std::span<const HoiClass> labels,
                  const FocalConfig& focal = {});
// d loss / d score for every cell.
Tensor2D focal_loss_grad(const Tensor2D& scores, std::span<const HoiClass> labels,
                         const FocalConfig& focal = {});

double sample_loss(const FeatureMap& fm, const TextEmbeddingBank& bank,
                   const RegFormerParams& params, std::span<const HoiClass> labels,
                   const FocalConfig& focal = {});

struct LossAndGradient {
  double loss = 0.0;
  Tensor2D scores;
  RegFormerParams grad;  // same layout as the params; tau_p/gamma unused
};

LossAndGradient backward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                         const RegFormerParams& params, std::span<const HoiClass> labels,
                         const FocalConfig& focal = {});

double dataset_loss(std::span<const ImageSample> samples, const TextEmbeddingBank& bank,
                    const RegFormerParams& params, const FocalConfig& focal = {},
                    std::size_t threads = 1);

struct TrainResult {
  RegFormerParams params;
  double initial_loss = 0.0;          // full-dataset loss before the first step
  std::vector<double> epoch_losses;   // mean sample loss seen during each epoch
  double final_loss = 0.0;            // full-dataset loss after the last step
};

// lr_t = lr * 0.5 * (1 + cos(pi * t / total_steps)); batches are drawn from
// a per-epoch shuffle seeded by config.seed.
TrainResult train(std::span<const ImageSample> dataset, const TextEmbeddingBank& bank,
                  RegFormerParams initial, const TrainConfig& config);

}  // namespace regformer
