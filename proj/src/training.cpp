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

#include "regformer/training.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "regformer/errors.hpp"
#include "regformer/kernels.hpp"
#include "regformer/parallel.hpp"
#include "regformer/rng.hpp"

namespace regformer {

void TrainConfig::validate() const {
  require(lr >= 0.0 && std::isfinite(lr), ErrorCategory::kArgument, "learning rate must be >= 0");
  require(epochs >= 1, ErrorCategory::kArgument, "epochs must be >= 1");
  require(batch_size >= 1, ErrorCategory::kArgument, "batch size must be >= 1");
  require(focal.gamma >= 0.0 && focal.alpha >= 0.0 && focal.alpha <= 1.0,
          ErrorCategory::kArgument, "focal gamma must be >= 0 and alpha in [0, 1]");
}

namespace {

void check_finite(std::span<const double> values, const char* stage) {
  for (double v : values) {
    require(std::isfinite(v), ErrorCategory::kNumerical,
            std::string("non-finite value produced by ") + stage);
  }
}

// Rows [first, first + x.size()) of w gain outer(x, g).
void add_outer_rows(std::span<const double> x, std::span<const double> g, Tensor2D& w,
                    std::size_t first) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) kernels::axpy(x[i], g, w.row(first + i));
  }
}

// Softmax backward: d logits given d outputs, for y = softmax(x / tau).
void softmax_backward(std::span<const double> y, std::span<const double> dy, double tau,
                      std::span<double> dx) {
  double s = 0.0;
  for (std::size_t p = 0; p < y.size(); ++p) s += y[p] * dy[p];
  for (std::size_t p = 0; p < y.size(); ++p) dx[p] += y[p] * (dy[p] - s) / tau;
}

// Scaled sigmoid backward for y = sigmoid(exp(lt) z + b), accumulating into
// dz and the (lt, b) gradient.
void sigmoid_backward(double y, double z, double dy, const SigmoidParams& sig,
                      SigmoidParams& dsig, double& dz) {
  const double temp = std::exp(sig.log_temp());
  const double dw = dy * y * (1.0 - y);
  dsig.values[0] += dw * temp * z;
  dsig.values[1] += dw;
  dz += dw * temp;
}

}  // namespace

Tensor2D classification_forward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                const RegFormerParams& params, ClassificationTape* tape) {
  ClassificationTape local;
  ClassificationTape& t = tape != nullptr ? *tape : local;
  const std::size_t n_o = bank.object_count();
  const std::size_t n_a = bank.action_count();
  const std::size_t d = params.dims.d;

  t.projection = project_grounding(fm, bank, params);
  t.similarity = similarity_from_projection(t.projection);
  check_finite(t.similarity.human, "patch similarity");
  t.inter = patch_interactiveness(t.similarity, params);
  t.alpha_h = patch_importance(t.similarity.human, params.tau_p);
  t.pooled_h = pool_patches(t.alpha_h, fm);
  t.r_h = image_interactiveness(t.alpha_h, t.inter.human);
  const std::vector<double> half_h = query_half(t.pooled_h, params.proj_query, QueryHalf::kHuman);

  t.context = prepare_attention(fm, params.attn);
  t.alpha_o.assign(n_o, {});
  t.pooled_o = Tensor2D(n_o, d);
  t.queries = Tensor2D(n_o, d);
  t.decode.assign(n_o, {});
  t.s_a = Tensor2D(n_o, n_a);
  t.r_o.assign(n_o, 0.0);
  t.r_ho.assign(n_o, 0.0);
  t.scores = Tensor2D(n_o, n_a);

  for (std::size_t k = 0; k < n_o; ++k) {
    t.alpha_o[k] = patch_importance(t.similarity.objects.row(k), params.tau_p);
    const std::vector<double> pooled = pool_patches(t.alpha_o[k], fm);
    std::copy(pooled.begin(), pooled.end(), t.pooled_o.row(k).begin());
    const std::vector<double> q = combine_query_halves(
        half_h, query_half(pooled, params.proj_query, QueryHalf::kObject));
    std::copy(q.begin(), q.end(), t.queries.row(k).begin());

    const ActionScores s = interaction_decode(q, t.context, bank, params, &t.decode[k]);
    std::copy(s.s_hat_a.begin(), s.s_hat_a.end(), t.s_a.row(k).begin());

    t.r_o[k] = image_interactiveness(t.alpha_o[k], t.inter.objects.row(k));
    t.r_ho[k] = pairwise_interactiveness(t.r_h, t.r_o[k]);
    const double gate = std::pow(t.r_ho[k], params.gamma);
    for (std::size_t a = 0; a < n_a; ++a) t.scores(k, a) = t.s_a(k, a) * gate;
  }
  check_finite(t.scores.values(), "classification score");
  return t.scores;
}

Tensor2D label_matrix(std::span<const HoiClass> labels, std::size_t n_objects,
                      std::size_t n_actions) {
  Tensor2D y(n_objects, n_actions);
  for (const HoiClass& c : labels) {
    require(c.object >= 0 && static_cast<std::size_t>(c.object) < n_objects && c.action >= 0 &&
                static_cast<std::size_t>(c.action) < n_actions,
            ErrorCategory::kArgument,
            "label (" + std::to_string(c.action) + ", " + std::to_string(c.object) +
                ") out of range");
    y(static_cast<std::size_t>(c.object), static_cast<std::size_t>(c.action)) = 1.0;
  }
  return y;
}

double focal_loss(const Tensor2D& scores, std::span<const HoiClass> labels,
                  const FocalConfig& focal) {
  const Tensor2D y = label_matrix(labels, scores.rows(), scores.cols());
  double total = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = std::clamp(scores.values()[i], kScoreClamp, 1.0 - kScoreClamp);
    if (y.values()[i] > 0.0) {
      total += -focal.alpha * std::pow(1.0 - s, focal.gamma) * std::log(s);
    } else {
      total += -(1.0 - focal.alpha) * std::pow(s, focal.gamma) * std::log(1.0 - s);
    }
  }
  return total / static_cast<double>(scores.size());
}

Tensor2D focal_loss_grad(const Tensor2D& scores, std::span<const HoiClass> labels,
                         const FocalConfig& focal) {
  const Tensor2D y = label_matrix(labels, scores.rows(), scores.cols());
  Tensor2D grad(scores.rows(), scores.cols());
  const double g = focal.gamma;
  const double inv_cells = 1.0 / static_cast<double>(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const double s = scores.values()[i];
    if (s < kScoreClamp || s > 1.0 - kScoreClamp) continue;  // flat under the clamp
    double d;
    if (y.values()[i] > 0.0) {
      const double pow_term = g == 0.0 ? 0.0 : g * std::pow(1.0 - s, g - 1.0) * std::log(s);
      d = -focal.alpha * (-pow_term + std::pow(1.0 - s, g) / s);
    } else {
      const double pow_term = g == 0.0 ? 0.0 : g * std::pow(s, g - 1.0) * std::log(1.0 - s);
      d = -(1.0 - focal.alpha) * (pow_term - std::pow(s, g) / (1.0 - s));
    }
    grad.values()[i] = d * inv_cells;
  }
  return grad;
}

double sample_loss(const FeatureMap& fm, const TextEmbeddingBank& bank,
                   const RegFormerParams& params, std::span<const HoiClass> labels,
                   const FocalConfig& focal) {
  return focal_loss(classification_forward(fm, bank, params), labels, focal);
}

LossAndGradient backward(const FeatureMap& fm, const TextEmbeddingBank& bank,
                         const RegFormerParams& params, std::span<const HoiClass> labels,
                         const FocalConfig& focal) {
  ClassificationTape t;
  classification_forward(fm, bank, params, &t);

  const std::size_t n_o = bank.object_count();
  const std::size_t n_a = bank.action_count();
  const std::size_t n = fm.patch_count();
  const std::size_t d = params.dims.d;
  const std::size_t d_s = params.dims.d_s;
  const std::size_t d_t = params.dims.d_t;
  const double tau = params.tau_p;
  const double gamma = params.gamma;
  const double attn_scale = 1.0 / std::sqrt(static_cast<double>(d));

  LossAndGradient out;
  out.loss = focal_loss(t.scores, labels, focal);
  out.scores = t.scores;
  RegFormerParams& g = out.grad;
  g = params.zeros_like();

  const Tensor2D d_scores = focal_loss_grad(t.scores, labels, focal);

  std::vector<double> d_alpha_h(n, 0.0);
  std::vector<double> d_sim_h(n, 0.0);
  Tensor2D d_sim_o(n_o, n);
  std::vector<double> d_pooled_h(d, 0.0);
  double d_r_h = 0.0;
  Tensor2D d_keys(n, d);
  Tensor2D d_values(n, d);

  for (std::size_t k = 0; k < n_o; ++k) {
    const DecodeTrace& tr = t.decode[k];
    const AttentionTrace& at = tr.attention;
    const double rho = t.r_ho[k];
    const double gate = std::pow(rho, gamma);

    // Gate and action sigmoid.
    double d_rho = 0.0;
    std::vector<double> d_cos(n_a, 0.0);
    for (std::size_t a = 0; a < n_a; ++a) {
      const double ds = d_scores(k, a);
      const double s_a = t.s_a(k, a);
      if (gamma != 0.0) d_rho += ds * s_a * gamma * std::pow(rho, gamma - 1.0);
      sigmoid_backward(s_a, tr.cosines[a], ds * gate, params.sig_action, g.sig_action, d_cos[a]);
    }

    // cos(q-bar P_a, e_a)
    std::vector<double> d_projected(d_t, 0.0);
    std::vector<double> unused(d_t, 0.0);
    for (std::size_t a = 0; a < n_a; ++a) {
      safe_cosine_backward(tr.projected, bank.actions.row(a), d_cos[a], d_projected, unused);
    }
    add_outer(tr.decoded, d_projected, g.proj_action);
    const std::vector<double> d_decoded = matvec(params.proj_action, d_projected);

    // LayerNorm
    std::vector<double> d_norm(d);
    double mean_dn = 0.0;
    double mean_dn_n = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      g.attn.ln_gain(0, i) += d_decoded[i] * at.normalized[i];
      g.attn.ln_bias(0, i) += d_decoded[i];
      d_norm[i] = d_decoded[i] * params.attn.ln_gain(0, i);
      mean_dn += d_norm[i];
      mean_dn_n += d_norm[i] * at.normalized[i];
    }
    mean_dn /= static_cast<double>(d);
    mean_dn_n /= static_cast<double>(d);
    std::vector<double> d_u(d);
    for (std::size_t i = 0; i < d; ++i) {
      d_u[i] = at.inv_std * (d_norm[i] - mean_dn - at.normalized[i] * mean_dn_n);
    }

    // u = q + c W_O
    std::vector<double> d_query = d_u;
    add_outer(at.context, d_u, g.attn.output);
    const std::vector<double> d_context = matvec(params.attn.output, d_u);

    // c = sum_p a(p) V(p); a = softmax(logits)
    std::vector<double> d_weights(n);
    for (std::size_t p = 0; p < n; ++p) {
      d_weights[p] = kernels::dot(d_context, t.context.values.row(p));
      kernels::axpy(at.weights[p], d_context, d_values.row(p));
    }
    std::vector<double> d_logits(n, 0.0);
    softmax_backward(at.weights, d_weights, 1.0, d_logits);

    // logits(p) = (q W_Q) . K(p) / sqrt(d)
    std::vector<double> d_qproj(d, 0.0);
    for (std::size_t p = 0; p < n; ++p) {
      const double dl = d_logits[p] * attn_scale;
      kernels::axpy(dl, t.context.keys.row(p), d_qproj);
      kernels::axpy(dl, at.query_proj, d_keys.row(p));
    }
    add_outer(t.queries.row(k), d_qproj, g.attn.query);
    const std::vector<double> d_q_from_proj = matvec(params.attn.query, d_qproj);
    for (std::size_t i = 0; i < d; ++i) d_query[i] += d_q_from_proj[i];

    // q = q^h P_q[top] + q^o_k P_q[bottom]
    add_outer_rows(t.pooled_h, d_query, g.proj_query, 0);
    add_outer_rows(t.pooled_o.row(k), d_query, g.proj_query, d);
    std::vector<double> d_pooled_o(d);
    for (std::size_t i = 0; i < d; ++i) {
      d_pooled_h[i] += kernels::dot(params.proj_query.row(i), d_query);
      d_pooled_o[i] = kernels::dot(params.proj_query.row(d + i), d_query);
    }

    // r_ho = sqrt(r_h r_o)
    d_r_h += d_rho * rho / (2.0 * t.r_h);
    const double d_r_o = d_rho * rho / (2.0 * t.r_o[k]);

    // Object branch: pooling, interactiveness, softmax.
    const std::vector<double>& alpha = t.alpha_o[k].alpha;
    std::vector<double> d_alpha(n);
    auto sim_row = d_sim_o.row(k);
    for (std::size_t p = 0; p < n; ++p) {
      d_alpha[p] = kernels::dot(d_pooled_o, fm.patch(p)) + d_r_o * t.inter.objects(k, p);
      sigmoid_backward(t.inter.objects(k, p), t.similarity.objects(k, p), d_r_o * alpha[p],
                       params.sig_inter_o, g.sig_inter_o, sim_row[p]);
    }
    softmax_backward(alpha, d_alpha, tau, sim_row);
  }

  // Human branch.
  for (std::size_t p = 0; p < n; ++p) {
    d_alpha_h[p] = kernels::dot(d_pooled_h, fm.patch(p)) + d_r_h * t.inter.human[p];
    sigmoid_backward(t.inter.human[p], t.similarity.human[p], d_r_h * t.alpha_h.alpha[p],
                     params.sig_inter_h, g.sig_inter_h, d_sim_h[p]);
  }
  softmax_backward(t.alpha_h.alpha, d_alpha_h, tau, d_sim_h);

  // K = X W_K, V = X W_V
  for (std::size_t p = 0; p < n; ++p) {
    add_outer(fm.patch(p), d_keys.row(p), g.attn.key);
    add_outer(fm.patch(p), d_values.row(p), g.attn.value);
  }

  // Similarities and grounding projections.
  const GroundingProjection& proj = t.projection;
  Tensor2D d_patch_h(n, d_s);
  Tensor2D d_patch_o(n, d_s);
  std::vector<double> d_text_h(d_s, 0.0);
  Tensor2D d_text_o(n_o, d_s);
  for (std::size_t p = 0; p < n; ++p) {
    safe_cosine_backward(proj.patch_h.row(p), proj.text_h, d_sim_h[p], d_patch_h.row(p), d_text_h);
    for (std::size_t k = 0; k < n_o; ++k) {
      safe_cosine_backward(proj.patch_o.row(p), proj.text_o.row(k), d_sim_o(k, p),
                           d_patch_o.row(p), d_text_o.row(k));
    }
    add_outer(fm.patch(p), d_patch_h.row(p), g.proj_patch_h);
    add_outer(fm.patch(p), d_patch_o.row(p), g.proj_patch_o);
  }
  add_outer(bank.human, d_text_h, g.proj_text_h);
  for (std::size_t k = 0; k < n_o; ++k) add_outer(bank.objects.row(k), d_text_o.row(k), g.proj_text_o);

  g.for_each_block([](std::string_view name, std::size_t, std::size_t, std::span<double> v) {
    for (double x : v) {
      require(std::isfinite(x), ErrorCategory::kNumerical,
              "non-finite gradient in " + std::string(name));
    }
  });
  return out;
}

double dataset_loss(std::span<const ImageSample> samples, const TextEmbeddingBank& bank,
                    const RegFormerParams& params, const FocalConfig& focal, std::size_t threads) {
  require(!samples.empty(), ErrorCategory::kArgument, "dataset is empty");
  std::vector<double> losses(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    losses[i] = sample_loss(samples[i].fm, bank, params, samples[i].labels, focal);
  });
  return std::accumulate(losses.begin(), losses.end(), 0.0) / static_cast<double>(samples.size());
}

TrainResult train(std::span<const ImageSample> dataset, const TextEmbeddingBank& bank,
                  RegFormerParams initial, const TrainConfig& config) {
  config.validate();
  require(!dataset.empty(), ErrorCategory::kArgument, "cannot train on an empty dataset");
  bank.validate();

  TrainResult result;
  result.params = std::move(initial);
  RegFormerParams& params = result.params;
  result.initial_loss = dataset_loss(dataset, bank, params, config.focal, config.threads);

  const std::size_t n = dataset.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const double total_steps = static_cast<double>(steps_per_epoch * config.epochs);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(config.seed, /*stream=*/0x54524149);

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, n - start);
      std::vector<LossAndGradient> parts(count);
      parallel_for(count, config.threads, [&](std::size_t i) {
        const ImageSample& s = dataset[order[start + i]];
        parts[i] = backward(s.fm, bank, params, s.labels, config.focal);
      });
      // Fixed reduction order: batch position.
      RegFormerParams grad = params.zeros_like();
      for (const LossAndGradient& part : parts) {
        grad.add_scaled(part.grad, 1.0 / static_cast<double>(count));
        epoch_loss += part.loss;
      }
      const double lr = config.lr * 0.5 *
                        (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      params.add_scaled(grad, -lr);
      require(params.all_finite(), ErrorCategory::kNumerical,
              "parameters became non-finite at step " + std::to_string(step));
      ++step;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(n));
  }
  result.final_loss = dataset_loss(dataset, bank, params, config.focal, config.threads);
  return result;
}

}  // namespace regformer
