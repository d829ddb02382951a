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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "regformer/synthetic.hpp"
#include "regformer/training.hpp"
#include "support.hpp"

using namespace regformer;
using namespace regformer::testing;

namespace {

struct Toy {
  RegFormerParams params;
  FeatureMap fm;
  TextEmbeddingBank bank;
  std::vector<HoiClass> labels;
};

Toy make_toy(std::uint64_t seed, double gamma = 1.0) {
  Rng rng(seed, 7);
  Toy t;
  t.params = random_params(ModelDims{5, 4, 3, 5}, seed, gamma);
  t.fm = random_fm(3, 3, 5, rng);
  t.bank = random_bank(4, 3, 2, rng);
  t.labels = {{1, 0}, {0, 2}};
  return t;
}

double max_grad_error(const Toy& t) {
  const LossAndGradient lg = backward(t.fm, t.bank, t.params, t.labels);
  const std::vector<double> theta = t.params.flatten();
  const std::vector<double> analytic = lg.grad.flatten();
  const auto numeric = finite_diff_grad(
      [&](std::span<const double> x) {
        RegFormerParams p = t.params;
        p.assign_flat(x);
        return sample_loss(t.fm, t.bank, p, t.labels);
      },
      theta);
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    worst = std::max(worst, gradient_relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

}  // namespace

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK(c.lr == 2e-4);
  CHECK(c.epochs == 5);
  CHECK(c.focal.gamma == 2.0);
  CHECK(c.focal.alpha == 0.25);
  c.validate();
  c.epochs = 0;
  CHECK_ERROR_CATEGORY(c.validate(), ErrorCategory::kArgument);
  c = {};
  c.lr = -1.0;
  CHECK_ERROR_CATEGORY(c.validate(), ErrorCategory::kArgument);
  c = {};
  c.batch_size = 0;
  CHECK_ERROR_CATEGORY(c.validate(), ErrorCategory::kArgument);
  c = {};
  c.focal.alpha = 1.5;
  CHECK_ERROR_CATEGORY(c.validate(), ErrorCategory::kArgument);
}

TEST_CASE("gamma zero disables the gate") {
  const Toy t = make_toy(1, 0.0);
  ClassificationTape tape;
  const Tensor2D s = classification_forward(t.fm, t.bank, t.params, &tape);
  CHECK(s == tape.s_a);
}

TEST_CASE("scores compose from the individual operations") {
  const Toy t = make_toy(2, 1.0);
  const RegFormerParams& p = t.params;
  const Tensor2D s = classification_forward(t.fm, t.bank, p);
  const SimilarityField sim = patch_similarity(t.fm, t.bank, p);
  const PatchInteractiveness pi = patch_interactiveness(sim, p);
  const ImportanceField ah = patch_importance(sim.human, p.tau_p);
  const double r_h = image_interactiveness(ah, pi.human);
  for (std::size_t k = 0; k < t.bank.object_count(); ++k) {
    const ImportanceField ao = patch_importance(sim.objects.row(k), p.tau_p);
    const double r_o = image_interactiveness(ao, pi.objects.row(k));
    const auto q = grounded_query(ah, ao, t.fm, p);
    const ActionScores sa = interaction_decode(q, t.fm, t.bank, p);
    for (std::size_t a = 0; a < t.bank.action_count(); ++a) {
      const double expected = sa.s_hat_a[a] * std::pow(std::sqrt(r_h * r_o), p.gamma);
      CHECK(std::abs(s(k, a) - expected) <= 1e-12);
      CHECK(s(k, a) > 0.0);
      CHECK(s(k, a) < 1.0);
    }
  }
}

TEST_CASE("scores are permutation-equivariant in object classes") {
  Toy t = make_toy(3);
  const Tensor2D s = classification_forward(t.fm, t.bank, t.params);
  TextEmbeddingBank perm = t.bank;
  const std::vector<std::size_t> order{2, 0, 1};
  for (std::size_t k = 0; k < 3; ++k) {
    std::copy(t.bank.objects.row(order[k]).begin(), t.bank.objects.row(order[k]).end(),
              perm.objects.row(k).begin());
  }
  const Tensor2D sp = classification_forward(t.fm, perm, t.params);
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t a = 0; a < 2; ++a) CHECK(sp(k, a) == s(order[k], a));
  }
  CHECK(classification_forward(t.fm, t.bank, t.params) == s);
}

TEST_CASE("focal loss examples") {
  const std::vector<HoiClass> pos{{0, 0}};
  CHECK(focal_loss(Tensor2D(1, 1, 0.5), pos) == doctest::Approx(0.25 * 0.25 * std::log(2.0)).epsilon(1e-15));
  CHECK(focal_loss(Tensor2D(1, 1, 0.5), pos) == doctest::Approx(0.043322).epsilon(1e-5));

  const Tensor2D perfect = Tensor2D::from_rows({{1.0, 0.0}, {0.0, 0.0}});
  CHECK(focal_loss(perfect, pos) < 1e-12);
  CHECK(focal_loss(perfect, pos) >= 0.0);

  Rng rng(61);
  Tensor2D s(3, 4);
  for (double& v : s.values()) v = rng.uniform(0.01, 0.99);
  const std::vector<HoiClass> labels{{1, 0}, {3, 2}};
  const Tensor2D y = label_matrix(labels, 3, 4);
  double bce = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double v = s.values()[i];
    bce += y.values()[i] > 0 ? -std::log(v) : -std::log(1.0 - v);
  }
  bce /= static_cast<double>(s.size());
  CHECK(focal_loss(s, labels, {0.0, 0.5}) == doctest::Approx(0.5 * bce).epsilon(1e-14));
  CHECK_ERROR_CATEGORY(focal_loss(s, std::vector<HoiClass>{{4, 0}}), ErrorCategory::kArgument);
  CHECK_ERROR_CATEGORY(focal_loss(s, std::vector<HoiClass>{{0, -1}}), ErrorCategory::kArgument);
}

TEST_CASE("focal loss is non-negative and its gradient matches differences") {
  Rng rng(62);
  for (int t = 0; t < 50; ++t) {
    Tensor2D s(2, 3);
    for (double& v : s.values()) v = rng.uniform(0.001, 0.999);
    const std::vector<HoiClass> labels{{static_cast<int>(rng.below(3)), static_cast<int>(rng.below(2))}};
    const FocalConfig focal{rng.uniform(0.0, 3.0), rng.uniform(0.0, 1.0)};
    CHECK(focal_loss(s, labels, focal) >= 0.0);
    const Tensor2D g = focal_loss_grad(s, labels, focal);
    const auto fd = finite_diff_grad(
        [&](std::span<const double> x) { return focal_loss(Tensor2D(2, 3, {x.begin(), x.end()}), labels, focal); },
        s.values(), 1e-7);
    for (std::size_t i = 0; i < 6; ++i) CHECK(gradient_relative_error(g.values()[i], fd[i]) < 1e-5);
  }
}

TEST_CASE("analytic gradient matches finite differences") {
  for (std::uint64_t seed : {1, 2, 3}) {
    CAPTURE(seed);
    CHECK(max_grad_error(make_toy(seed, 1.0)) < 1e-4);
  }
  CHECK(max_grad_error(make_toy(4, 0.5)) < 1e-4);
  CHECK(max_grad_error(make_toy(5, 0.0)) < 1e-4);
}

TEST_CASE("frozen paths receive zero gradient") {
  const Toy t = make_toy(6, 0.0);
  const LossAndGradient lg = backward(t.fm, t.bank, t.params, t.labels);
  // gamma = 0: the interactiveness sigmoids do not reach the score.
  for (double v : lg.grad.sig_inter_h.values) CHECK(v == 0.0);
  for (double v : lg.grad.sig_inter_o.values) CHECK(v == 0.0);

  // Constant similarity field (all-zero features): no gradient into the patch projections.
  Toy z = make_toy(7);
  z.fm = FeatureMap(3, 3, Tensor2D(9, 5));
  const LossAndGradient lz = backward(z.fm, z.bank, z.params, z.labels);
  for (double v : lz.grad.proj_patch_h.values()) CHECK(v == 0.0);
  for (double v : lz.grad.proj_patch_o.values()) CHECK(v == 0.0);
  CHECK(lz.grad.all_finite());
}

TEST_CASE("gradient descent on one sample lowers the loss") {
  Toy t = make_toy(8);
  const double before = sample_loss(t.fm, t.bank, t.params, t.labels);
  double prev = before;
  int increases = 0;
  for (int step = 0; step < 50; ++step) {
    const LossAndGradient lg = backward(t.fm, t.bank, t.params, t.labels);
    CHECK(lg.loss == doctest::Approx(prev).epsilon(1e-12));
    t.params.add_scaled(lg.grad, -1e-3);
    const double now = sample_loss(t.fm, t.bank, t.params, t.labels);
    increases += now > prev;
    prev = now;
  }
  CHECK(prev < 0.9 * before);
  CHECK(increases == 0);
}

TEST_CASE("train: lr zero, determinism, threads, empty data") {
  SyntheticSpec spec;
  spec.n_images = 6;
  const SyntheticData d = generate_synthetic(spec);
  const RegFormerParams init = init_params(ModelDims::with_defaults(16, 16), 0);
  TrainConfig c;
  c.epochs = 2;
  c.batch_size = 4;
  c.lr = 0.0;
  const TrainResult frozen = train(d.samples, d.bank, init, c);
  CHECK(frozen.params == init);
  CHECK(frozen.final_loss == frozen.initial_loss);

  c.lr = 0.3;
  const TrainResult a = train(d.samples, d.bank, init, c);
  const TrainResult b = train(d.samples, d.bank, init, c);
  CHECK(a.epoch_losses == b.epoch_losses);
  CHECK(a.params == b.params);
  CHECK(a.epoch_losses.size() == 2);
  c.threads = 4;
  const TrainResult p = train(d.samples, d.bank, init, c);
  CHECK(p.params == a.params);
  CHECK(p.final_loss == a.final_loss);
  c.seed = 9;
  CHECK_FALSE(train(d.samples, d.bank, init, c).params == a.params);

  CHECK_ERROR_CATEGORY(train(std::span<const ImageSample>{}, d.bank, init, c), ErrorCategory::kArgument);
  CHECK(dataset_loss(d.samples, d.bank, init, {}, 3) == dataset_loss(d.samples, d.bank, init));
}

TEST_CASE("training on planted data separates labeled from unlabeled cells") {
  SyntheticSpec spec;
  const SyntheticData d = generate_synthetic(spec);
  InitOptions opt;
  opt.grounding = GroundingInit::kNearIdentity;
  const RegFormerParams init = init_params(ModelDims::with_defaults(16, 16), 0, {}, opt);
  TrainConfig c;
  c.lr = 0.5;
  c.batch_size = 1;
  const TrainResult r = train(d.samples, d.bank, init, c);
  CHECK(r.epoch_losses.back() < r.epoch_losses.front());
  CHECK(r.final_loss < r.initial_loss);
  double pos = 0, neg = 0;
  std::size_t np = 0, nn = 0;
  for (const ImageSample& s : d.samples) {
    const Tensor2D scores = classification_forward(s.fm, d.bank, r.params);
    const Tensor2D y = label_matrix(s.labels, 3, 3);
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (y.values()[i] > 0) {
        pos += scores.values()[i];
        ++np;
      } else {
        neg += scores.values()[i];
        ++nn;
      }
    }
  }
  CHECK(pos / np > neg / nn);
}
