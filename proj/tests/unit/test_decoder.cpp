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

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "regformer/decoder.hpp"
#include "support.hpp"

using namespace regformer;
using namespace regformer::testing;

namespace {

AttentionParams random_attention(std::size_t d, Rng& rng) {
  AttentionParams a = init_attention(d, rng);
  for (double& v : a.ln_gain.values()) v = 1.0 + 0.3 * rng.normal();
  for (double& v : a.ln_bias.values()) v = 0.2 * rng.normal();
  return a;
}

std::vector<double> layer_norm(std::span<const double> u, const AttentionParams& a) {
  const double n = static_cast<double>(u.size());
  const double mean = std::accumulate(u.begin(), u.end(), 0.0) / n;
  double var = 0;
  for (double v : u) var += (v - mean) * (v - mean);
  var /= n;
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    out[i] = a.ln_gain(0, i) * (u[i] - mean) / std::sqrt(var + kLayerNormEps) + a.ln_bias(0, i);
  }
  return out;
}

// Params whose decoded query is exactly `fixed` (zero LN gain), with P_a = I.
RegFormerParams pinned_decoder(const std::vector<double>& fixed) {
  const std::size_t d = fixed.size();
  RegFormerParams p = init_params(ModelDims::with_defaults(d, d), 0);
  for (double& v : p.attn.ln_gain.values()) v = 0.0;
  for (std::size_t i = 0; i < d; ++i) p.attn.ln_bias(0, i) = fixed[i];
  p.proj_action = Tensor2D::identity(d);
  return p;
}

}  // namespace

TEST_CASE("cross attention against the loop oracle") {
  Rng rng(41);
  for (int t = 0; t < 20; ++t) {
    const std::size_t d = 2 + rng.below(8);
    const AttentionParams a = random_attention(d, rng);
    const FeatureMap fm = random_fm(1 + rng.below(4), 1 + rng.below(4), d, rng);
    const std::vector<double> q = random_vector(d, rng);
    CHECK(max_abs_diff(cross_attention(q, fm, a), oracle_cross_attention(q, fm, a)) <= 1e-12);
  }
}

TEST_CASE("zero value projection leaves the layer norm of the query") {
  Rng rng(42);
  AttentionParams a = random_attention(6, rng);
  a.value = Tensor2D(6, 6);
  const FeatureMap fm = random_fm(3, 3, 6, rng);
  const std::vector<double> q = random_vector(6, rng);
  CHECK(max_abs_diff(cross_attention(q, fm, a), layer_norm(q, a)) <= 1e-12);
}

TEST_CASE("identical patches give the value path of that patch") {
  Rng rng(43);
  const std::size_t d = 5;
  const AttentionParams a = random_attention(d, rng);
  const std::vector<double> v = random_vector(d, rng);
  Tensor2D patches(6, d);
  for (std::size_t r = 0; r < 6; ++r) std::copy(v.begin(), v.end(), patches.row(r).begin());
  const FeatureMap fm(2, 3, patches);
  const std::vector<double> q = random_vector(d, rng);
  AttentionTrace trace;
  const auto out = cross_attention(q, prepare_attention(fm, a), a, &trace);
  const auto wv = oracle_vecmat(oracle_vecmat(v, a.value), a.output);
  std::vector<double> u(q);
  for (std::size_t i = 0; i < d; ++i) u[i] += wv[i];
  CHECK(max_abs_diff(out, layer_norm(u, a)) <= 1e-12);
  for (double w : trace.weights) CHECK(w == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("attention is invariant to patch order and weights sum to one") {
  Rng rng(44);
  for (int t = 0; t < 30; ++t) {
    const std::size_t d = 3 + rng.below(5);
    const AttentionParams a = random_attention(d, rng);
    const FeatureMap fm = random_fm(3, 4, d, rng);
    std::vector<std::size_t> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    Tensor2D shuffled(12, d);
    for (std::size_t r = 0; r < 12; ++r) {
      std::copy(fm.patch(perm[r]).begin(), fm.patch(perm[r]).end(), shuffled.row(r).begin());
    }
    const FeatureMap other(4, 3, shuffled);
    const std::vector<double> q = random_vector(d, rng);
    AttentionTrace trace;
    const auto out = cross_attention(q, prepare_attention(fm, a), a, &trace);
    CHECK(max_abs_diff(out, cross_attention(q, other, a)) <= 1e-12);
    CHECK(std::abs(std::accumulate(trace.weights.begin(), trace.weights.end(), 0.0) - 1.0) <= 1e-12);
  }
}

TEST_CASE("decoder scores for constructed cosines at fresh init") {
  TextEmbeddingBank bank;
  bank.human = {0, 0, 1, 0};
  bank.objects = Tensor2D::from_rows({{0, 0, 0, 1}});
  bank.actions = Tensor2D::from_rows({{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 1, 0, 0}});
  Rng rng(45);
  const FeatureMap fm = random_fm(2, 2, 4, rng);
  const std::vector<double> q = random_vector(4, rng);

  const RegFormerParams half = pinned_decoder({1.0, std::sqrt(3.0), 0.0, 0.0});
  const ActionScores s = interaction_decode(q, fm, bank, half);
  CHECK(s.s_hat_a[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.s_hat_a[0] == s.s_hat_a[1]);

  const RegFormerParams aligned = pinned_decoder({1.0, 0.0, 0.0, 0.0});
  const ActionScores one = interaction_decode(q, fm, bank, aligned);
  CHECK(one.s_hat_a[0] == doctest::Approx(1.0 / (1.0 + std::exp(-5.0))).epsilon(1e-14));
  CHECK(one.s_hat_a[0] == doctest::Approx(0.9933).epsilon(1e-4));
  CHECK(one.s_hat_a[2] == doctest::Approx(1.0 / (1.0 + std::exp(5.0))).epsilon(1e-14));
}

TEST_CASE("decoder scores stay inside the open unit interval") {
  Rng rng(46);
  const ModelDims dims = ModelDims::with_defaults(8, 6);
  const RegFormerParams p = random_params(dims, 3);
  const TextEmbeddingBank bank = random_bank(6, 2, 5, rng);
  for (int t = 0; t < 20; ++t) {
    const FeatureMap fm = random_fm(3, 3, 8, rng);
    for (double s : interaction_decode(random_vector(8, rng), fm, bank, p).s_hat_a) {
      CHECK(s > 0.0);
      CHECK(s < 1.0);
    }
  }
}

TEST_CASE("batched decoding equals single decodes bit for bit") {
  Rng rng(47);
  const ModelDims dims = ModelDims::with_defaults(7, 5);
  const RegFormerParams p = random_params(dims, 4);
  const TextEmbeddingBank bank = random_bank(5, 3, 4, rng);
  const FeatureMap fm = random_fm(4, 3, 7, rng);
  const Tensor2D queries = random_tensor(6, 7, rng);
  PassCounters c;
  const AttentionContext ctx = prepare_attention(fm, p.attn, &c);
  const auto batch = interaction_decode_batch(queries, ctx, bank, p, &c);
  REQUIRE(batch.size() == 6);
  for (std::size_t k = 0; k < 6; ++k) CHECK(batch[k].s_hat_a == interaction_decode(queries.row(k), fm, bank, p).s_hat_a);
  CHECK(c.attention_contexts == 1);
  CHECK(c.attention_queries == 6);
  CHECK(c.decoder_forwards == 6);
}

TEST_CASE("ML-Decoder forward") {
  Rng rng(48);
  const std::size_t d = 6, dt = 4;
  TextEmbeddingBank bank = random_bank(dt, 2, 2, rng, true);
  MLDecoderParams m = init_mldecoder_params(dt, d, 5);
  for (double& v : m.attn.ln_gain.values()) v = 1.0 + 0.2 * rng.normal();
  const FeatureMap fm = random_fm(3, 2, d, rng);
  PassCounters c;
  const auto scores = ml_decoder_forward(fm, bank, m, &c);
  REQUIRE(scores.size() == 4);
  for (std::size_t t = 0; t < 4; ++t) {
    const auto q = oracle_vecmat(bank.hoi->row(t), m.proj_query_in);
    const auto dec = oracle_cross_attention(q, fm, m.attn);
    double z = 0;
    for (std::size_t i = 0; i < d; ++i) z += dec[i] * m.proj_out(i, 0);
    CHECK(std::abs(scores[t] - oracle_sigmoid(z, m.sig)) <= 1e-12);
  }
  CHECK(c.baseline_forwards == 1);
  CHECK(c.attention_contexts == 1);
  CHECK(c.attention_queries == 4);

  for (std::size_t i = 0; i < dt; ++i) (*bank.hoi)(3, i) = (*bank.hoi)(0, i);
  const auto dup = ml_decoder_forward(fm, bank, m);
  CHECK(dup[3] == dup[0]);

  bank.hoi.reset();
  bank.hoi_classes.clear();
  CHECK_ERROR_CATEGORY(ml_decoder_forward(fm, bank, m), ErrorCategory::kConfig);
}

TEST_CASE("ML-Decoder with one query matches the shared attention block") {
  Rng rng(49);
  const std::size_t d = 5;
  TextEmbeddingBank bank = random_bank(d, 1, 1, rng, true);
  const RegFormerParams p = random_params(ModelDims::with_defaults(d, d), 6);
  MLDecoderParams m = init_mldecoder_params(d, d, 1);
  m.attn = p.attn;
  const FeatureMap fm = random_fm(2, 2, d, rng);
  const auto q = vecmat(bank.hoi->row(0), m.proj_query_in);
  const auto dec = cross_attention(q, fm, p.attn);
  double z = 0;
  for (std::size_t i = 0; i < d; ++i) z += dec[i] * m.proj_out(i, 0);
  CHECK(ml_decoder_forward(fm, bank, m)[0] == doctest::Approx(m.sig(z)).epsilon(1e-14));
}

TEST_CASE("decoder shape errors") {
  Rng rng(50);
  const RegFormerParams p = random_params(ModelDims::with_defaults(6, 4), 1);
  const FeatureMap fm = random_fm(2, 2, 6, rng);
  CHECK_ERROR_CATEGORY(cross_attention(random_vector(5, rng), fm, p.attn), ErrorCategory::kShape);
  CHECK_ERROR_CATEGORY(prepare_attention(random_fm(2, 2, 5, rng), p.attn), ErrorCategory::kShape);
  CHECK_ERROR_CATEGORY(interaction_decode(random_vector(6, rng), fm, random_bank(5, 1, 1, rng), p),
                       ErrorCategory::kShape);
}
