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

// Interaction decoder (grounded query -> per-action scores) and the
// ML-Decoder baseline (one text-derived query per HOI class).

#include <span>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/counters.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/numerics.hpp"
#include "regformer/params.hpp"

namespace regformer {

// Keys x(p) W_K and values x(p) W_V for every patch of one feature map.
struct AttentionContext {
  Tensor2D keys;
  Tensor2D values;
  std::size_t patch_count() const noexcept { return keys.rows(); }
};

AttentionContext prepare_attention(const FeatureMap& fm, const AttentionParams& attn,
                                   PassCounters* counters = nullptr);

// Intermediates of one cross_attention call, for backprop.
struct AttentionTrace {
  std::vector<double> query_proj;  // q W_Q
  std::vector<double> weights;     // softmax over patches
  std::vector<double> context;     // sum_p weights(p) V(p)
  std::vector<double> normalized;  // (u - mean) / std
  double inv_std = 0.0;
};

// LayerNorm(q + (sum_p softmax_p((q W_Q) . K(p) / sqrt(d)) V(p)) W_O)
std::vector<double> cross_attention(std::span<const double> query, const AttentionContext& ctx,
                                    const AttentionParams& attn, AttentionTrace* trace = nullptr,
                                    PassCounters* counters = nullptr);
std::vector<double> cross_attention(std::span<const double> query, const FeatureMap& fm,
                                    const AttentionParams& attn);

struct ActionScores {
  std::vector<double> s_hat_a;  // one per action, in (0, 1)
};

// Intermediates of interaction_decode.
struct DecodeTrace {
  AttentionTrace attention;
  std::vector<double> decoded;     // q-bar
  std::vector<double> projected;   // q-bar P_a
  std::vector<double> cosines;     // per action
};

ActionScores interaction_decode(std::span<const double> q_ho, const AttentionContext& ctx,
                                const TextEmbeddingBank& bank, const RegFormerParams& params,
                                DecodeTrace* trace = nullptr, PassCounters* counters = nullptr);
ActionScores interaction_decode(std::span<const double> q_ho, const FeatureMap& fm,
                                const TextEmbeddingBank& bank, const RegFormerParams& params);

// Decodes every row of `queries` independently; identical to calling
// interaction_decode once per row.
std::vector<ActionScores> interaction_decode_batch(const Tensor2D& queries,
                                                   const AttentionContext& ctx,
                                                   const TextEmbeddingBank& bank,
                                                   const RegFormerParams& params,
                                                   PassCounters* counters = nullptr);

// One score per hoi row of the bank: sigmoid(Att(e_hoi W_q, f, f) W_p).
// Throws kConfig when the bank carries no hoi embeddings.
std::vector<double> ml_decoder_forward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                       const MLDecoderParams& params,
                                       PassCounters* counters = nullptr);

}  // namespace regformer
