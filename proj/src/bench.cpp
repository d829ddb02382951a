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

#include "regformer/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <tuple>

#include <json.hpp>

#include "regformer/decoder.hpp"
#include "regformer/errors.hpp"
#include "regformer/grounding.hpp"
#include "regformer/params.hpp"
#include "regformer/rng.hpp"
#include "regformer/synthetic.hpp"

namespace regformer {

namespace {

constexpr std::uint64_t kBenchStream = 0x42454E43;

Box random_box(Rng& rng) {
  const double w = rng.uniform(0.1, 0.5);
  const double h = rng.uniform(0.1, 0.5);
  const double x = rng.uniform(0.0, 1.0 - w);
  const double y = rng.uniform(0.0, 1.0 - h);
  return {x, y, x + w, y + h};
}

}  // namespace

std::string_view strategy_name(BenchStrategy s) noexcept {
  switch (s) {
    case BenchStrategy::kRegFormer: return "regformer";
    case BenchStrategy::kRegFormerNaive: return "regformer_naive";
    case BenchStrategy::kMlDecoderCrop: return "mldecoder_crop";
  }
  return "unknown";
}

BenchStrategy parse_strategy(std::string_view name) {
  for (BenchStrategy s : {BenchStrategy::kRegFormer, BenchStrategy::kRegFormerNaive,
                          BenchStrategy::kMlDecoderCrop}) {
    if (strategy_name(s) == name) return s;
  }
  fail(ErrorCategory::kArgument,
       "unknown strategy '" + std::string(name) +
           "' (expected regformer, regformer_naive or mldecoder_crop)");
}

void BenchConfig::validate() const {
  require(!pair_counts.empty(), ErrorCategory::kArgument, "bench: pair_counts is empty");
  require(std::all_of(pair_counts.begin(), pair_counts.end(), [](std::size_t p) { return p >= 1; }),
          ErrorCategory::kArgument, "bench: pair counts must be >= 1");
  require(!strategies.empty(), ErrorCategory::kArgument, "bench: no strategy selected");
  require(iterations >= 1, ErrorCategory::kArgument, "bench: iterations must be >= 1");
  require(grid >= 1 && d_v >= d_t && d_t >= 1 && n_objects >= 1 && n_actions >= 1,
          ErrorCategory::kArgument, "bench: dims must be positive with d_v >= d_t");
}

BenchScene bench_scene(const BenchConfig& cfg, std::size_t pair_count) {
  Rng rng = Rng(cfg.seed, kBenchStream).split(pair_count);
  std::size_t n_h = 1;
  for (std::size_t h = 1; h * h <= pair_count; ++h) {
    if (pair_count % h == 0) n_h = h;
  }
  const std::size_t n_o = pair_count / n_h;

  BenchScene scene;
  Tensor2D patches(cfg.grid * cfg.grid, cfg.d_v);
  for (double& x : patches.values()) x = rng.normal();
  scene.fm = FeatureMap(cfg.grid, cfg.grid, std::move(patches));
  scene.bank = synthetic_bank(cfg.d_t, cfg.n_objects, cfg.n_actions, cfg.seed);
  for (std::size_t i = 0; i < n_h; ++i) scene.humans.push_back({random_box(rng), 0.9, -1});
  for (std::size_t j = 0; j < n_o; ++j) {
    scene.objects.push_back({random_box(rng), 0.8, static_cast<int>(rng.below(cfg.n_objects))});
  }
  return scene;
}

FeatureMap crop_feature_map(const FeatureMap& fm, const Box& box) {
  const RegionMask mask = box_to_mask(box, fm);
  // Centers inside an axis-aligned box form a rectangle of cells.
  std::size_t i0 = fm.grid_h, i1 = 0, j0 = fm.grid_w, j1 = 0;
  for (std::size_t p = 0; p < mask.size(); ++p) {
    if (!mask.contains(p)) continue;
    const std::size_t i = p / fm.grid_w;
    const std::size_t j = p % fm.grid_w;
    i0 = std::min(i0, i);
    i1 = std::max(i1, i);
    j0 = std::min(j0, j);
    j1 = std::max(j1, j);
  }
  const std::size_t h = i1 - i0 + 1;
  const std::size_t w = j1 - j0 + 1;
  Tensor2D patches(h * w, fm.dim());
  for (std::size_t i = 0; i < h; ++i) {
    for (std::size_t j = 0; j < w; ++j) {
      const auto src = fm.patch((i0 + i) * fm.grid_w + (j0 + j));
      std::copy(src.begin(), src.end(), patches.row(i * w + j).begin());
    }
  }
  return FeatureMap(h, w, std::move(patches));
}

namespace {

double run_once(BenchStrategy s, const BenchScene& scene, const RegFormerParams& params,
                const MLDecoderParams& ml, PassCounters& counters) {
  const auto start = std::chrono::steady_clock::now();
  DetectOptions opts;
  opts.counters = &counters;
  double sink = 0.0;
  switch (s) {
    case BenchStrategy::kRegFormer:
      for (const HOIPrediction& p : detect(scene.fm, scene.bank, params, scene.humans,
                                           scene.objects, DetectorConfig{}, opts)) {
        sink += p.score;
      }
      break;
    case BenchStrategy::kRegFormerNaive:
      for (const HOIPrediction& p : detect_naive(scene.fm, scene.bank, params, scene.humans,
                                                 scene.objects, DetectorConfig{}, opts)) {
        sink += p.score;
      }
      break;
    case BenchStrategy::kMlDecoderCrop:
      for (const Detection& h : scene.humans) {
        for (const Detection& o : scene.objects) {
          const FeatureMap crop = crop_feature_map(scene.fm, union_box(h.box, o.box));
          for (double v : ml_decoder_forward(crop, scene.bank, ml, &counters)) sink += v;
        }
      }
      break;
  }
  const auto stop = std::chrono::steady_clock::now();
  require(std::isfinite(sink), ErrorCategory::kNumerical, "bench produced non-finite scores");
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace

std::vector<BenchResult> run_benchmark(const BenchConfig& cfg) {
  cfg.validate();
  const ModelDims dims = ModelDims::with_defaults(cfg.d_v, cfg.d_t);
  const RegFormerParams params = init_params(dims, cfg.seed);
  const MLDecoderParams ml = init_mldecoder_params(cfg.d_t, dims.d, cfg.seed);

  std::vector<BenchResult> results;
  for (std::size_t pairs : cfg.pair_counts) {
    const BenchScene scene = bench_scene(cfg, pairs);
    for (BenchStrategy s : cfg.strategies) {
      for (std::size_t w = 0; w < cfg.warmup; ++w) {
        PassCounters ignored;
        run_once(s, scene, params, ml, ignored);
      }
      std::vector<double> times;
      PassCounters counters;
      for (std::size_t it = 0; it < cfg.iterations; ++it) {
        counters = {};
        times.push_back(run_once(s, scene, params, ml, counters));
      }
      std::sort(times.begin(), times.end());
      const std::size_t n = times.size();
      const double median = n % 2 == 1 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
      BenchResult r;
      r.strategy = std::string(strategy_name(s));
      r.pair_count = pairs;
      r.median_ms = median;
      r.images_per_second = median > 0.0 ? 1000.0 / median : 0.0;
      r.iterations = cfg.iterations;
      r.counters = counters;
      results.push_back(std::move(r));
    }
  }
  std::stable_sort(results.begin(), results.end(), [](const BenchResult& a, const BenchResult& b) {
    return std::tie(a.strategy, a.pair_count) < std::tie(b.strategy, b.pair_count);
  });
  return results;
}

std::string bench_json(const std::vector<BenchResult>& results) {
  nlohmann::json rows = nlohmann::json::array();
  for (const BenchResult& r : results) {
    rows.push_back({{"strategy", r.strategy},
                    {"pair_count", r.pair_count},
                    {"median_ms", r.median_ms},
                    {"images_per_second", r.images_per_second},
                    {"iterations", r.iterations},
                    {"grounding_passes", r.counters.grounding_passes},
                    {"attention_contexts", r.counters.attention_contexts},
                    {"attention_queries", r.counters.attention_queries},
                    {"decoder_forwards", r.counters.decoder_forwards},
                    {"baseline_forwards", r.counters.baseline_forwards}});
  }
  return nlohmann::json{{"results", rows}}.dump(2);
}

std::string bench_csv(const std::vector<BenchResult>& results) {
  std::ostringstream out;
  out << "strategy,pair_count,median_ms,grounding_passes,attention_contexts,decoder_forwards,"
         "baseline_forwards\n";
  for (const BenchResult& r : results) {
    out << r.strategy << ',' << r.pair_count << ',' << r.median_ms << ','
        << r.counters.grounding_passes << ',' << r.counters.attention_contexts << ','
        << r.counters.decoder_forwards << ',' << r.counters.baseline_forwards << '\n';
  }
  return out.str();
}

}  // namespace regformer
