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

#include "regformer/decoder.hpp"

#include <cmath>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/kernels.hpp"

namespace regformer {

AttentionContext prepare_attention(const FeatureMap& fm, const AttentionParams& attn,
                                   PassCounters* counters) {
  require(fm.dim() == attn.key.rows(), ErrorCategory::kShape,
          "attention: feature dim " + std::to_string(fm.dim()) + " != key rows " +
              std::to_string(attn.key.rows()));
  if (counters != nullptr) ++counters->attention_contexts;
  return {matmul(fm.patches, attn.key), matmul(fm.patches, attn.value)};
}

std::vector<double> cross_attention(std::span<const double> query, const AttentionContext& ctx,
                                    const AttentionParams& attn, AttentionTrace* trace,
                                    PassCounters* counters) {
  const std::size_t d = attn.query.rows();
  require(query.size() == d, ErrorCategory::kShape,
          "attention: query of " + std::to_string(query.size()) + " for d = " + std::to_string(d));
  require(ctx.keys.cols() == d && ctx.values.cols() == d, ErrorCategory::kShape,
          "attention: context does not match the block width");
  if (counters != nullptr) ++counters->attention_queries;

  const std::vector<double> q_proj = vecmat(query, attn.query);
  const std::size_t n = ctx.patch_count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  std::vector<double> logits(n);
  for (std::size_t p = 0; p < n; ++p) logits[p] = kernels::dot(q_proj, ctx.keys.row(p)) * scale;
  std::vector<double> weights = masked_softmax(logits, 1.0);

  std::vector<double> context(d, 0.0);
  for (std::size_t p = 0; p < n; ++p) kernels::axpy(weights[p], ctx.values.row(p), context);

  std::vector<double> u(query.begin(), query.end());
  vecmat_accumulate(context, attn.output, u);

  double mean = 0.0;
  for (double v : u) mean += v;
  mean /= static_cast<double>(d);
  double var = 0.0;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= static_cast<double>(d);
  const double inv_std = 1.0 / std::sqrt(var + kLayerNormEps);

  std::vector<double> normalized(d);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    normalized[i] = (u[i] - mean) * inv_std;
    out[i] = attn.ln_gain(0, i) * normalized[i] + attn.ln_bias(0, i);
  }
  if (trace != nullptr) {
    trace->query_proj = q_proj;
    trace->weights = std::move(weights);
    trace->context = std::move(context);
    trace->normalized = std::move(normalized);
    trace->inv_std = inv_std;
  }
  return out;
}

std::vector<double> cross_attention(std::span<const double> query, const FeatureMap& fm,
                                    const AttentionParams& attn) {
  return cross_attention(query, prepare_attention(fm, attn), attn);
}

ActionScores interaction_decode(std::span<const double> q_ho, const AttentionContext& ctx,
                                const TextEmbeddingBank& bank, const RegFormerParams& params,
                                DecodeTrace* trace, PassCounters* counters) {
  require(bank.dim() == params.proj_action.cols(), ErrorCategory::kShape,
          "decode: bank dim does not match the action projection");
  if (counters != nullptr) ++counters->decoder_forwards;
  AttentionTrace* attn_trace = trace != nullptr ? &trace->attention : nullptr;
  std::vector<double> decoded = cross_attention(q_ho, ctx, params.attn, attn_trace, counters);
  std::vector<double> projected = vecmat(decoded, params.proj_action);

  ActionScores scores;
  std::vector<double> cosines(bank.action_count());
  scores.s_hat_a.resize(bank.action_count());
  for (std::size_t a = 0; a < bank.action_count(); ++a) {
    cosines[a] = safe_cosine(projected, bank.actions.row(a));
    scores.s_hat_a[a] = params.sig_action(cosines[a]);
  }
  if (trace != nullptr) {
    trace->decoded = std::move(decoded);
    trace->projected = std::move(projected);
    trace->cosines = std::move(cosines);
  }
  return scores;
}

ActionScores interaction_decode(std::span<const double> q_ho, const FeatureMap& fm,
                                const TextEmbeddingBank& bank, const RegFormerParams& params) {
  return interaction_decode(q_ho, prepare_attention(fm, params.attn), bank, params);
}

std::vector<ActionScores> interaction_decode_batch(const Tensor2D& queries,
                                                   const AttentionContext& ctx,
                                                   const TextEmbeddingBank& bank,
                                                   const RegFormerParams& params,
                                                   PassCounters* counters) {
  std::vector<ActionScores> out;
  out.reserve(queries.rows());
  for (std::size_t k = 0; k < queries.rows(); ++k) {
    out.push_back(interaction_decode(queries.row(k), ctx, bank, params, nullptr, counters));
  }
  return out;
}

std::vector<double> ml_decoder_forward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                       const MLDecoderParams& params, PassCounters* counters) {
  require(bank.hoi.has_value() && bank.hoi->rows() > 0, ErrorCategory::kConfig,
          "ML-Decoder needs hoi text embeddings in the bank");
  require(bank.dim() == params.proj_query_in.rows(), ErrorCategory::kShape,
          "ML-Decoder: bank dim does not match W_q");
  require(params.proj_out.cols() == 1 && params.proj_out.rows() == params.attn.query.rows(),
          ErrorCategory::kShape, "ML-Decoder: W_p must be d x 1");
  if (counters != nullptr) ++counters->baseline_forwards;
  const Tensor2D queries = matmul(*bank.hoi, params.proj_query_in);
  const AttentionContext ctx = prepare_attention(fm, params.attn, counters);
  std::vector<double> scores(queries.rows());
  for (std::size_t t = 0; t < queries.rows(); ++t) {
    const std::vector<double> decoded = cross_attention(queries.row(t), ctx, params.attn, nullptr, counters);
    scores[t] = params.sig(kernels::dot(decoded, params.proj_out.values()));
  }
  return scores;
}

}  // namespace regformer
