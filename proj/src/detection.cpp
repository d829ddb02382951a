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

#include "regformer/detection.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "regformer/decoder.hpp"
#include "regformer/errors.hpp"
#include "regformer/grounding.hpp"
#include "regformer/interactiveness.hpp"
#include "regformer/parallel.hpp"

namespace regformer {

using nlohmann::json;

void validate_detection(const Detection& det) {
  validate_box(det.box);
  require(std::isfinite(det.score) && det.score > 0.0 && det.score <= 1.0,
          ErrorCategory::kArgument,
          "detection score " + std::to_string(det.score) + " outside (0, 1]");
}

DetectorConfig DetectorConfig::hico() {
  DetectorConfig cfg;
  cfg.lambda = kHicoLambda;
  return cfg;
}

DetectorConfig DetectorConfig::vcoco() {
  DetectorConfig cfg;
  cfg.lambda = kVcocoLambda;
  return cfg;
}

void DetectorConfig::validate() const {
  require(score_threshold >= 0.0 && score_threshold < 1.0, ErrorCategory::kConfig,
          "score threshold must lie in [0, 1)");
  require(min_instances <= max_instances, ErrorCategory::kConfig,
          "min_instances must not exceed max_instances");
  require(std::isfinite(lambda) && lambda >= 0.0, ErrorCategory::kConfig, "lambda must be >= 0");
}

namespace {

std::vector<Detection> select_side(std::vector<Detection> side, const DetectorConfig& cfg) {
  std::stable_sort(side.begin(), side.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  // Sorted descending, so the kept set is a prefix: everything above the
  // threshold, padded with the best rejected ones up to the minimum.
  const auto above = static_cast<std::size_t>(std::count_if(
      side.begin(), side.end(), [&](const Detection& d) { return d.score >= cfg.score_threshold; }));
  std::size_t keep = std::max(above, std::min(cfg.min_instances, side.size()));
  keep = std::min(keep, cfg.max_instances);
  side.resize(keep);
  return side;
}

}  // namespace

Proposals filter_proposals(const std::vector<Detection>& dets, const DetectorConfig& cfg) {
  cfg.validate();
  Proposals out;
  for (const Detection& d : dets) {
    validate_detection(d);
    (d.class_id == cfg.human_class_id ? out.humans : out.objects).push_back(d);
  }
  out.humans = select_side(std::move(out.humans), cfg);
  out.objects = select_side(std::move(out.objects), cfg);
  return out;
}

double fused_score(const PredictionFactors& f, double gamma, double lambda) {
  return f.s_a * std::pow(f.r_ho, gamma) * std::pow(f.det, lambda);
}

namespace {

// Per-image state shared by every pair.
struct ImageFields {
  SimilarityField similarity;
  PatchInteractiveness inter;
  ImportanceField alpha_h;
  std::vector<std::optional<ImportanceField>> alpha_o;  // filled per class on demand
  AttentionContext context;
};

ImageFields image_fields(const FeatureMap& fm, const TextEmbeddingBank& bank,
                         const RegFormerParams& params, PassCounters* counters) {
  ImageFields f;
  f.similarity = patch_similarity(fm, bank, params);
  if (counters != nullptr) ++counters->grounding_passes;
  f.inter = patch_interactiveness(f.similarity, params);
  f.alpha_h = patch_importance(f.similarity.human, params.tau_p);
  f.alpha_o.resize(bank.object_count());
  f.context = prepare_attention(fm, params.attn, counters);
  return f;
}

void ensure_object_alpha(ImageFields& f, int cls, double tau_p) {
  auto& slot = f.alpha_o[static_cast<std::size_t>(cls)];
  if (!slot) slot = patch_importance(f.similarity.objects.row(static_cast<std::size_t>(cls)), tau_p);
}

struct InstanceState {
  std::vector<double> query_half;
  InstanceInteractiveness inter;
};

InstanceState human_instance(const Detection& det, const FeatureMap& fm, const ImageFields& f,
                             const RegFormerParams& params) {
  const RegionMask mask = box_to_mask(det.box, fm);
  const ImportanceField alpha = patch_importance(f.similarity.human, params.tau_p, &mask);
  InstanceState s;
  s.query_half = query_half(pool_patches(alpha, fm), params.proj_query, QueryHalf::kHuman);
  s.inter = instance_interactiveness(alpha, f.inter.human, f.alpha_h, mask);
  return s;
}

InstanceState object_instance(const Detection& det, const FeatureMap& fm, const ImageFields& f,
                              const RegFormerParams& params) {
  const auto cls = static_cast<std::size_t>(det.class_id);
  const RegionMask mask = box_to_mask(det.box, fm);
  const ImportanceField alpha = patch_importance(f.similarity.objects.row(cls), params.tau_p, &mask);
  InstanceState s;
  s.query_half = query_half(pool_patches(alpha, fm), params.proj_query, QueryHalf::kObject);
  s.inter = instance_interactiveness(alpha, f.inter.objects.row(cls), *f.alpha_o[cls], mask);
  return s;
}

void pair_predictions(const Detection& h, const Detection& o, const InstanceState& hs,
                      const InstanceState& os, const AttentionContext& ctx,
                      const TextEmbeddingBank& bank, const RegFormerParams& params,
                      const DetectorConfig& cfg, const std::string& image_id,
                      PassCounters* counters, HOIPrediction* out) {
  const std::vector<double> q = combine_query_halves(hs.query_half, os.query_half);
  const ActionScores s = interaction_decode(q, ctx, bank, params, nullptr, counters);
  PredictionFactors base;
  base.r_ho = pairwise_interactiveness(hs.inter.r, os.inter.r);
  base.det = h.score * o.score;
  for (std::size_t a = 0; a < s.s_hat_a.size(); ++a) {
    HOIPrediction& p = out[a];
    p.image_id = image_id;
    p.human_box = h.box;
    p.object_box = o.box;
    p.object_class = o.class_id;
    p.action = static_cast<int>(a);
    p.factors = base;
    p.factors.s_a = s.s_hat_a[a];
    p.score = fused_score(p.factors, params.gamma, cfg.lambda);
  }
}

struct PairPlan {
  std::vector<std::size_t> valid_objects;  // indices into objects
};

PairPlan plan_pairs(const std::vector<Detection>& humans, const std::vector<Detection>& objects,
                    const TextEmbeddingBank& bank, const DetectorConfig& cfg,
                    const DetectOptions& opts) {
  cfg.validate();
  for (const Detection& d : humans) validate_detection(d);
  for (const Detection& d : objects) validate_detection(d);
  PairPlan plan;
  const auto n_o = static_cast<int>(bank.object_count());
  for (std::size_t j = 0; j < objects.size(); ++j) {
    const int c = objects[j].class_id;
    if (c >= 0 && c < n_o) {
      plan.valid_objects.push_back(j);
      continue;
    }
    if (opts.diagnostics == nullptr) continue;
    for (std::size_t i = 0; i < humans.size(); ++i) {
      std::ostringstream msg;
      msg << "pair (" << i << ", " << j << ") skipped: object class " << c
          << " is not in the bank (" << n_o << " classes)";
      opts.diagnostics->push_back(msg.str());
    }
  }
  return plan;
}

}  // namespace

std::vector<HOIPrediction> detect(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                  const RegFormerParams& params,
                                  const std::vector<Detection>& humans,
                                  const std::vector<Detection>& objects,
                                  const DetectorConfig& cfg, const DetectOptions& opts) {
  const PairPlan plan = plan_pairs(humans, objects, bank, cfg, opts);
  if (humans.empty() || plan.valid_objects.empty()) return {};

  ImageFields fields = image_fields(fm, bank, params, opts.counters);
  for (std::size_t j : plan.valid_objects) ensure_object_alpha(fields, objects[j].class_id, params.tau_p);

  std::vector<InstanceState> hs(humans.size());
  std::vector<InstanceState> os(plan.valid_objects.size());
  parallel_for(hs.size() + os.size(), opts.threads, [&](std::size_t k) {
    if (k < hs.size()) {
      hs[k] = human_instance(humans[k], fm, fields, params);
    } else {
      const std::size_t j = k - hs.size();
      os[j] = object_instance(objects[plan.valid_objects[j]], fm, fields, params);
    }
  });

  const std::size_t n_a = bank.action_count();
  const std::size_t n_pairs = hs.size() * os.size();
  std::vector<HOIPrediction> preds(n_pairs * n_a);
  std::vector<PassCounters> pair_counters(n_pairs);
  parallel_for(n_pairs, opts.threads, [&](std::size_t k) {
    const std::size_t i = k / os.size();
    const std::size_t j = k % os.size();
    pair_predictions(humans[i], objects[plan.valid_objects[j]], hs[i], os[j], fields.context, bank,
                     params, cfg, opts.image_id, &pair_counters[k], preds.data() + k * n_a);
  });
  if (opts.counters != nullptr) {
    for (const PassCounters& c : pair_counters) *opts.counters += c;
  }
  return preds;
}

std::vector<HOIPrediction> detect_naive(const FeatureMap& fm, const TextEmbeddingBank& bank,
                                        const RegFormerParams& params,
                                        const std::vector<Detection>& humans,
                                        const std::vector<Detection>& objects,
                                        const DetectorConfig& cfg, const DetectOptions& opts) {
  const PairPlan plan = plan_pairs(humans, objects, bank, cfg, opts);
  const std::size_t n_a = bank.action_count();
  std::vector<HOIPrediction> preds(humans.size() * plan.valid_objects.size() * n_a);
  std::size_t k = 0;
  for (const Detection& h : humans) {
    for (std::size_t j : plan.valid_objects) {
      const Detection& o = objects[j];
      ImageFields fields = image_fields(fm, bank, params, opts.counters);
      ensure_object_alpha(fields, o.class_id, params.tau_p);
      const InstanceState hs = human_instance(h, fm, fields, params);
      const InstanceState os = object_instance(o, fm, fields, params);
      pair_predictions(h, o, hs, os, fields.context, bank, params, cfg, opts.image_id,
                       opts.counters, preds.data() + k * n_a);
      ++k;
    }
  }
  return preds;
}

namespace {

Box box_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) {
    fail(ErrorCategory::kFormat, where + ": box must be an array of 4 numbers");
  }
  return Box::from_array({j[0].get<double>(), j[1].get<double>(), j[2].get<double>(),
                          j[3].get<double>()});
}

json box_to_json(const Box& b) { return json::array({b.x1, b.y1, b.x2, b.y2}); }

json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
}

}  // namespace

DetectionFile read_detections(const std::filesystem::path& path) {
  const json doc = parse_json_file(path);
  DetectionFile file;
  try {
    file.image_id = doc.at("image_id").get<std::string>();
    std::size_t idx = 0;
    for (const json& d : doc.at("detections")) {
      const std::string where = path.string() + " detection " + std::to_string(idx++);
      Detection det;
      det.box = box_from_json(d.at("box"), where);
      det.score = d.at("score").get<double>();
      det.class_id = d.at("class_id").get<int>();
      try {
        validate_detection(det);
      } catch (const Error& e) {
        fail(ErrorCategory::kFormat, where + ": " + e.what());
      }
      file.detections.push_back(det);
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
  return file;
}

void write_detections(const DetectionFile& file, const std::filesystem::path& path) {
  json dets = json::array();
  for (const Detection& d : file.detections) {
    dets.push_back({{"box", box_to_json(d.box)}, {"score", d.score}, {"class_id", d.class_id}});
  }
  const json doc = {{"image_id", file.image_id}, {"detections", dets}};
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << doc.dump(2) << '\n';
}

void write_prediction_line(const HOIPrediction& p, std::ostream& out) {
  const json line = {{"image_id", p.image_id},
                     {"human_box", box_to_json(p.human_box)},
                     {"object_box", box_to_json(p.object_box)},
                     {"object_class", p.object_class},
                     {"action", p.action},
                     {"score", p.score},
                     {"factors", {{"s_a", p.factors.s_a}, {"r_ho", p.factors.r_ho},
                                  {"det", p.factors.det}}}};
  out << line.dump() << '\n';
}

void write_predictions(const std::vector<HOIPrediction>& preds, const std::filesystem::path& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out.precision(17);
  for (const HOIPrediction& p : preds) write_prediction_line(p, out);
}

std::vector<HOIPrediction> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  std::vector<HOIPrediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    try {
      const json j = json::parse(line);
      HOIPrediction p;
      p.image_id = j.at("image_id").get<std::string>();
      p.human_box = box_from_json(j.at("human_box"), where);
      p.object_box = box_from_json(j.at("object_box"), where);
      p.object_class = j.at("object_class").get<int>();
      p.action = j.at("action").get<int>();
      p.score = j.at("score").get<double>();
      if (j.contains("factors")) {
        const json& f = j.at("factors");
        p.factors = {f.at("s_a").get<double>(), f.at("r_ho").get<double>(), f.at("det").get<double>()};
      }
      preds.push_back(std::move(p));
    } catch (const json::exception& e) {
      fail(ErrorCategory::kFormat, where + ": " + e.what());
    }
  }
  return preds;
}

}  // namespace regformer
