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

// Shared fixtures for the unit and acceptance binaries: random inputs and
// independent loop implementations used as oracles.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "regformer/bank.hpp"
#include "regformer/decoder.hpp"
#include "regformer/detection.hpp"
#include "regformer/errors.hpp"
#include "regformer/evaluation.hpp"
#include "regformer/feature_map.hpp"
#include "regformer/numerics.hpp"
#include "regformer/params.hpp"
#include "regformer/rng.hpp"

namespace regformer::testing {

inline Tensor2D random_tensor(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
  Tensor2D t(rows, cols);
  for (double& v : t.values()) v = scale * rng.normal();
  return t;
}

inline std::vector<double> random_vector(std::size_t n, Rng& rng, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

inline FeatureMap random_fm(std::size_t h, std::size_t w, std::size_t d, Rng& rng) {
  return FeatureMap(h, w, random_tensor(h * w, d, rng));
}

inline TextEmbeddingBank random_bank(std::size_t d_t, std::size_t n_o, std::size_t n_a, Rng& rng,
                                     bool with_hoi = false) {
  TextEmbeddingBank b;
  b.human = random_vector(d_t, rng);
  b.objects = random_tensor(n_o, d_t, rng);
  b.actions = random_tensor(n_a, d_t, rng);
  if (with_hoi) {
    b.hoi = random_tensor(n_o * n_a, d_t, rng);
    for (std::size_t a = 0; a < n_a; ++a) {
      for (std::size_t o = 0; o < n_o; ++o) b.hoi_classes.push_back({int(a), int(o)});
    }
  }
  return b;
}

// Fresh init with every scalar parameter moved off its default so that
// gradient and equivalence checks see generic values.
inline RegFormerParams random_params(const ModelDims& dims, std::uint64_t seed, double gamma = 1.0) {
  GroundingConfig g;
  g.gamma = gamma;
  RegFormerParams p = init_params(dims, seed, g);
  Rng rng(seed, 99);
  for (double& v : p.attn.ln_gain.values()) v = 1.0 + 0.2 * rng.normal();
  for (double& v : p.attn.ln_bias.values()) v = 0.1 * rng.normal();
  for (SigmoidParams* s : {&p.sig_action, &p.sig_inter_h, &p.sig_inter_o}) {
    s->values[0] = std::log(rng.uniform(2.0, 6.0));
    s->values[1] = rng.uniform(-2.0, 0.5);
  }
  return p;
}

inline Box random_box(Rng& rng, double min_side = 0.05) {
  const double w = rng.uniform(min_side, 1.0);
  const double h = rng.uniform(min_side, 1.0);
  const double x = rng.uniform(0.0, 1.0 - w);
  const double y = rng.uniform(0.0, 1.0 - h);
  return {x, y, x + w, y + h};
}

inline std::vector<Detection> random_detections(std::size_t n, int cls_lo, int cls_hi, Rng& rng) {
  std::vector<Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    const int span = cls_hi - cls_lo + 1;
    out.push_back({random_box(rng), rng.uniform(0.05, 1.0),
                   cls_lo + static_cast<int>(rng.below(static_cast<std::size_t>(span)))});
  }
  return out;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return a.size() == b.size() ? m : INFINITY;
}

// Category of the Error thrown by f, or nullopt-like sentinel when f does
// not throw a library error.
template <class F>
int error_category_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return static_cast<int>(e.category());
  }
  return -1;
}

#define CHECK_ERROR_CATEGORY(expr, cat) \
  CHECK(::regformer::testing::error_category_of([&] { (void)(expr); }) == static_cast<int>(cat))

// ---- loop oracles ----------------------------------------------------------

inline std::vector<double> oracle_vecmat(std::span<const double> x, const Tensor2D& w) {
  std::vector<double> y(w.cols(), 0.0);
  for (std::size_t j = 0; j < w.cols(); ++j) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < x.size(); ++i) acc += static_cast<long double>(x[i]) * w(i, j);
    y[j] = static_cast<double>(acc);
  }
  return y;
}

inline double oracle_cosine(std::span<const double> u, std::span<const double> v) {
  long double uv = 0, uu = 0, vv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    uv += static_cast<long double>(u[i]) * v[i];
    uu += static_cast<long double>(u[i]) * u[i];
    vv += static_cast<long double>(v[i]) * v[i];
  }
  const long double den = std::sqrt(uu) * std::sqrt(vv);
  const long double c = uv / std::max<long double>(den, 1e-8L);
  return static_cast<double>(std::clamp<long double>(c, -1.0L, 1.0L));
}

inline std::vector<double> oracle_softmax(std::span<const double> z, double tau) {
  long double m = -INFINITY;
  for (double v : z) m = std::max<long double>(m, v / tau);
  std::vector<long double> e(z.size());
  long double s = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    e[i] = std::exp(static_cast<long double>(z[i]) / tau - m);
    s += e[i];
  }
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = static_cast<double>(e[i] / s);
  return out;
}

inline double oracle_sigmoid(double z, const SigmoidParams& s) {
  return 1.0 / (1.0 + std::exp(-(std::exp(s.log_temp()) * z + s.bias())));
}

// Attention block written directly from its definition.
inline std::vector<double> oracle_cross_attention(std::span<const double> q, const FeatureMap& fm,
                                                  const AttentionParams& a) {
  const std::size_t d = q.size();
  const std::vector<double> qq = oracle_vecmat(q, a.query);
  std::vector<double> logits(fm.patch_count());
  std::vector<std::vector<double>> values;
  for (std::size_t p = 0; p < fm.patch_count(); ++p) {
    const std::vector<double> k = oracle_vecmat(fm.patch(p), a.key);
    long double s = 0;
    for (std::size_t i = 0; i < d; ++i) s += static_cast<long double>(qq[i]) * k[i];
    logits[p] = static_cast<double>(s / std::sqrt(static_cast<long double>(d)));
    values.push_back(oracle_vecmat(fm.patch(p), a.value));
  }
  const std::vector<double> w = oracle_softmax(logits, 1.0);
  std::vector<double> ctx(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    long double acc = 0;
    for (std::size_t p = 0; p < fm.patch_count(); ++p) acc += static_cast<long double>(w[p]) * values[p][i];
    ctx[i] = static_cast<double>(acc);
  }
  const std::vector<double> o = oracle_vecmat(ctx, a.output);
  std::vector<double> u(d);
  long double mean = 0;
  for (std::size_t i = 0; i < d; ++i) {
    u[i] = q[i] + o[i];
    mean += u[i];
  }
  mean /= d;
  long double var = 0;
  for (std::size_t i = 0; i < d; ++i) var += (u[i] - mean) * (u[i] - mean);
  var /= d;
  const long double inv = 1.0L / std::sqrt(var + kLayerNormEps);
  std::vector<double> out(d);
  for (std::size_t i = 0; i < d; ++i) {
    out[i] = static_cast<double>(a.ln_gain(0, i) * (u[i] - mean) * inv + a.ln_bias(0, i));
  }
  return out;
}

// ---- evaluation oracles ----------------------------------------------------

// Area under the interpolated precision/recall curve, integrated segment by
// segment over the distinct recall levels of the ranking.
inline double oracle_ap(const std::vector<bool>& tp, std::size_t n_gt) {
  std::vector<std::pair<double, double>> curve;  // (recall, precision)
  std::size_t hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    hits += tp[k];
    curve.emplace_back(double(hits) / double(n_gt), double(hits) / double(k + 1));
  }
  double area = 0.0, prev_r = 0.0;
  for (const auto& [r, unused] : curve) {
    if (r <= prev_r) continue;
    double best = 0.0;
    for (const auto& [r2, p2] : curve) {
      if (r2 >= r) best = std::max(best, p2);
    }
    area += (r - prev_r) * best;
    prev_r = r;
  }
  return area;
}

inline Box grid_box(std::size_t i) {
  const double x = 0.1 * static_cast<double>(i % 9);
  return {x, 0.0, x + 0.1, 0.5};
}

// One image, n_gt annotations of class (0, 0), and ranked predictions that
// follow `tp`: a true positive takes the next unmatched annotation; a false
// positive alternates between a miss and a duplicate of a matched one.
struct ApInstance {
  GroundTruth gt;
  std::vector<HOIPrediction> preds;
};

inline ApInstance ap_instance(const std::vector<bool>& tp, std::size_t n_gt) {
  ApInstance inst;
  GroundTruthImage img{"img", {}};
  for (std::size_t g = 0; g < n_gt; ++g) img.annotations.push_back({grid_box(g), grid_box(g), 0, 0});
  inst.gt.images.push_back(img);
  std::size_t next = 0, fp = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    HOIPrediction p;
    p.image_id = "img";
    p.score = 1.0 - 0.1 * static_cast<double>(k);
    Box b = Box{0.0, 0.6, 0.1, 1.0};  // misses every annotation
    if (tp[k]) {
      b = grid_box(next++);
    } else if (next > 0 && fp++ % 2 == 0) {
      b = grid_box(next - 1);
    }
    p.human_box = p.object_box = b;
    inst.preds.push_back(p);
  }
  return inst;
}

inline HOIPrediction hand_pred(const char* image, int action, int object, Box b, double score) {
  HOIPrediction p;
  p.image_id = image;
  p.action = action;
  p.object_class = object;
  p.human_box = p.object_box = b;
  p.score = score;
  return p;
}

// Three classes with hand-computed APs 1, 2/3 and 1/2:
// (action, object) classes:
//   (0,0): one annotation, one hit.
//   (1,0): two annotations, ranked miss, hit, hit.
//   (0,1): two annotations, ranked hit, miss.
struct HandMap {
  GroundTruth gt;
  std::vector<HOIPrediction> preds;
};

inline HandMap hand_map_example() {
  HandMap h;
  const Box b0 = grid_box(0), b1 = grid_box(2), b2 = grid_box(4), far{0.0, 0.6, 0.1, 1.0};
  // Entries are (human box, object box, object class, action).
  h.gt.images.push_back({"a", {{b0, b0, 0, 0}, {b1, b1, 0, 1}, {b2, b2, 1, 0}}});
  h.gt.images.push_back({"b", {{b1, b1, 0, 1}, {b0, b0, 1, 0}}});
  h.preds = {
      hand_pred("a", 0, 0, b0, 0.9),
      hand_pred("b", 1, 0, far, 0.8),
      hand_pred("a", 1, 0, b1, 0.7),
      hand_pred("b", 1, 0, b1, 0.6),
      hand_pred("a", 0, 1, b2, 0.95),
      hand_pred("a", 0, 1, far, 0.5),
  };
  return h;
}

}  // namespace regformer::testing
