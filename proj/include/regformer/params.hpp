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

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "regformer/numerics.hpp"

namespace regformer {

class Rng;

inline constexpr double kDefaultTauP = 0.05;
inline constexpr double kDefaultGamma = 1.0;
inline const double kSigmoidInitLogTemp = std::log(10.0);
inline constexpr double kSigmoidInitBias = -5.0;
inline constexpr double kLayerNormEps = 1e-5;

struct ModelDims {
  std::size_t d_v = 0;  // backbone patch feature dim
  std::size_t d_t = 0;  // text embedding dim
  std::size_t d_s = 0;  // shared grounding dim
  std::size_t d = 0;    // decoder dim; equals d_v

  // d_s = d_t and d = d_v.
  static ModelDims with_defaults(std::size_t d_v, std::size_t d_t);
  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Learnable temperature and bias of a scaled sigmoid, stored together so
// they can be visited as a 1x2 block.
struct SigmoidParams {
  std::array<double, 2> values{kSigmoidInitLogTemp, kSigmoidInitBias};

  double log_temp() const noexcept { return values[0]; }
  double bias() const noexcept { return values[1]; }
  double operator()(double z) const noexcept { return scaled_sigmoid(z, values[0], values[1]); }
  friend bool operator==(const SigmoidParams&, const SigmoidParams&) = default;
};

// Single-head cross-attention block with residual and layer norm.
struct AttentionParams {
  Tensor2D query;    // W_Q, d x d
  Tensor2D key;      // W_K, d x d
  Tensor2D value;    // W_V, d x d
  Tensor2D output;   // W_O, d x d
  Tensor2D ln_gain;  // 1 x d
  Tensor2D ln_bias;  // 1 x d
  friend bool operator==(const AttentionParams&, const AttentionParams&) = default;
};

struct GroundingConfig {
  double tau_p = kDefaultTauP;
  double gamma = kDefaultGamma;
};

struct RegFormerParams {
  ModelDims dims;
  Tensor2D proj_patch_h;  // d_v x d_s
  Tensor2D proj_patch_o;  // d_v x d_s
  Tensor2D proj_text_h;   // d_t x d_s
  Tensor2D proj_text_o;   // d_t x d_s
  Tensor2D proj_query;    // 2d x d; rows [0, d) act on the human half
  AttentionParams attn;
  Tensor2D proj_action;   // d x d_t
  SigmoidParams sig_action;
  SigmoidParams sig_inter_h;
  SigmoidParams sig_inter_o;
  double tau_p = kDefaultTauP;  // not learnable
  double gamma = kDefaultGamma; // not learnable

  // Visits every learnable block in checkpoint order as
  // f(name, rows, cols, span<double> values).
  template <class F>
  void for_each_block(F&& f);
  template <class F>
  void for_each_block(F&& f) const;

  // Same shapes, every value zero. Used as a gradient accumulator.
  RegFormerParams zeros_like() const;
  std::size_t parameter_count() const;
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> flat);
  // this += scale * other, block by block.
  void add_scaled(const RegFormerParams& other, double scale);
  bool all_finite() const;

  friend bool operator==(const RegFormerParams&, const RegFormerParams&) = default;
};

struct MLDecoderParams {
  Tensor2D proj_query_in;  // W_q, d_t x d
  AttentionParams attn;
  Tensor2D proj_out;       // W_p, d x 1
  SigmoidParams sig;
};

// Matrices are uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], rounded to
// float32 so a fresh model survives a checkpoint round trip unchanged.
// kNearIdentity starts the four grounding projections at identity plus
// jitter times the uniform draw, which suits patch and text features that
// already share one space.
enum class GroundingInit { kUniform, kNearIdentity };

struct InitOptions {
  GroundingInit grounding = GroundingInit::kUniform;
  double identity_jitter = 0.1;
};

RegFormerParams init_params(const ModelDims& dims, std::uint64_t seed,
                            const GroundingConfig& config = {}, const InitOptions& init = {});
MLDecoderParams init_mldecoder_params(std::size_t d_t, std::size_t d, std::uint64_t seed);

AttentionParams init_attention(std::size_t d, Rng& rng);

// "RGFC" checkpoint: magic, u32 version, u32 dims[4], f64 tau_p, f64 gamma,
// then every block as u32 rows, u32 cols, f32 little-endian row-major. The
// 1x2 sigmoid blocks store f64 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;
std::vector<std::uint8_t> encode_checkpoint(const RegFormerParams& params);
RegFormerParams decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const RegFormerParams& params, const std::filesystem::path& path);
RegFormerParams load_checkpoint(const std::filesystem::path& path);

// ---------------------------------------------------------------------------

namespace detail {
template <class Params, class F>
void visit_blocks(Params& p, F&& f) {
  auto mat = [&](std::string_view name, auto& t) { f(name, t.rows(), t.cols(), t.values()); };
  auto sig = [&](std::string_view name, auto& s) {
    f(name, std::size_t{1}, std::size_t{2}, std::span(s.values));
  };
  mat("proj_patch_h", p.proj_patch_h);
  mat("proj_patch_o", p.proj_patch_o);
  mat("proj_text_h", p.proj_text_h);
  mat("proj_text_o", p.proj_text_o);
  mat("proj_query", p.proj_query);
  mat("attn.query", p.attn.query);
  mat("attn.key", p.attn.key);
  mat("attn.value", p.attn.value);
  mat("attn.output", p.attn.output);
  mat("attn.ln_gain", p.attn.ln_gain);
  mat("attn.ln_bias", p.attn.ln_bias);
  mat("proj_action", p.proj_action);
  sig("sig_action", p.sig_action);
  sig("sig_inter_h", p.sig_inter_h);
  sig("sig_inter_o", p.sig_inter_o);
}
}  // namespace detail

template <class F>
void RegFormerParams::for_each_block(F&& f) {
  detail::visit_blocks(*this, f);
}

template <class F>
void RegFormerParams::for_each_block(F&& f) const {
  detail::visit_blocks(*this, f);
}

}  // namespace regformer
