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

#include "regformer/evaluation.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "regformer/errors.hpp"
#include "regformer/parallel.hpp"

namespace regformer {

using nlohmann::json;

bool match_pair(const HOIPrediction& pred, const GroundTruthEntry& gt) {
  return pred.object_class == gt.object_class && pred.action == gt.action &&
         iou(pred.human_box, gt.human_box) >= kMatchIou &&
         iou(pred.object_box, gt.object_box) >= kMatchIou;
}

double average_precision_ranked(std::span<const std::uint8_t> tp, std::size_t n_gt) {
  if (n_gt == 0) return 0.0;
  std::vector<double> precision(tp.size());
  std::size_t hits = 0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    hits += tp[k] != 0 ? 1 : 0;
    precision[k] = static_cast<double>(hits) / static_cast<double>(k + 1);
  }
  // Precision envelope: best precision at this recall or beyond.
  for (std::size_t k = tp.size(); k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0;
  for (std::size_t k = 0; k < tp.size(); ++k) {
    if (tp[k] != 0) ap += precision[k];
  }
  return ap / static_cast<double>(n_gt);
}

namespace {

bool same_class(const HOIPrediction& p, HoiClass cls) {
  return p.action == cls.action && p.object_class == cls.object;
}

std::optional<double> class_ap(std::span<const HOIPrediction> preds, const GroundTruth& gt,
                               HoiClass cls) {
  std::unordered_map<std::string, std::vector<const GroundTruthEntry*>> by_image;
  std::size_t n_gt = 0;
  for (const GroundTruthImage& img : gt.images) {
    for (const GroundTruthEntry& e : img.annotations) {
      if (e.action == cls.action && e.object_class == cls.object) {
        by_image[img.image_id].push_back(&e);
        ++n_gt;
      }
    }
  }
  if (n_gt == 0) return std::nullopt;

  std::vector<const HOIPrediction*> ranked;
  for (const HOIPrediction& p : preds) {
    if (same_class(p, cls)) ranked.push_back(&p);
  }
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const HOIPrediction* a, const HOIPrediction* b) { return a->score > b->score; });

  std::unordered_map<std::string, std::vector<bool>> used;
  for (const auto& [id, entries] : by_image) used[id].assign(entries.size(), false);

  std::vector<std::uint8_t> tp(ranked.size(), 0);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const HOIPrediction& p = *ranked[k];
    const auto it = by_image.find(p.image_id);
    if (it == by_image.end()) continue;
    std::vector<bool>& taken = used[p.image_id];
    std::size_t best = it->second.size();
    double best_overlap = -1.0;
    for (std::size_t g = 0; g < it->second.size(); ++g) {
      if (taken[g] || !match_pair(p, *it->second[g])) continue;
      const double overlap = iou(p.human_box, it->second[g]->human_box) +
                             iou(p.object_box, it->second[g]->object_box);
      if (overlap > best_overlap) {
        best_overlap = overlap;
        best = g;
      }
    }
    if (best < it->second.size()) {
      taken[best] = true;
      tp[k] = 1;
    }
  }
  return average_precision_ranked(tp, n_gt);
}

}  // namespace

std::optional<double> average_precision(std::span<const HOIPrediction> preds,
                                        const GroundTruth& gt, HoiClass cls) {
  return class_ap(preds, gt, cls);
}

EvalReport evaluate(std::span<const HOIPrediction> preds, const GroundTruth& gt,
                    const EvalOptions& opts) {
  EvalReport report;
  report.rare_threshold = opts.rare_threshold;

  std::map<HoiClass, std::size_t> counts;
  for (const GroundTruthImage& img : gt.images) {
    for (const GroundTruthEntry& e : img.annotations) {
      const HoiClass c{e.action, e.object_class};
      if (opts.class_filter && !opts.class_filter->contains(c)) continue;
      ++counts[c];
    }
  }
  for (const auto& [cls, n] : counts) {
    report.classes.push_back({cls, n, n < opts.rare_threshold, 0.0});
  }

  for (const HOIPrediction& p : preds) {
    const HoiClass c{p.action, p.object_class};
    if (opts.class_filter && !opts.class_filter->contains(c)) continue;
    if (!counts.contains(c)) ++report.unknown_predictions;
  }
  if (report.unknown_predictions > 0) {
    report.warnings.push_back(std::to_string(report.unknown_predictions) +
                              " prediction(s) name a class with no ground truth; counted as false "
                              "positives and excluded from every mAP");
  }

  parallel_for(report.classes.size(), opts.threads, [&](std::size_t i) {
    report.classes[i].ap = *class_ap(preds, gt, report.classes[i].cls);
  });

  const auto mean_of = [&](auto keep) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const ClassAp& c : report.classes) {
      if (!keep(c)) continue;
      sum += c.ap;
      ++n;
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  report.map_full = mean_of([](const ClassAp&) { return true; });
  report.map_rare = mean_of([](const ClassAp& c) { return c.rare; });
  report.map_nonrare = mean_of([](const ClassAp& c) { return !c.rare; });
  return report;
}

namespace {

Box read_box(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) fail(ErrorCategory::kFormat, where + ": box needs 4 numbers");
  const Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  try {
    validate_box(b);
  } catch (const Error& e) {
    fail(ErrorCategory::kFormat, where + ": " + e.what());
  }
  return b;
}

json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

GroundTruth read_ground_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCategory::kIo, "cannot open " + path.string());
  GroundTruth gt;
  try {
    const json doc = json::parse(in);
    for (const json& img : doc.at("images")) {
      GroundTruthImage g;
      g.image_id = img.at("image_id").get<std::string>();
      std::size_t idx = 0;
      for (const json& a : img.at("annotations")) {
        const std::string where = path.string() + " image " + g.image_id + " annotation " +
                                  std::to_string(idx++);
        GroundTruthEntry e;
        e.human_box = read_box(a.at("human_box"), where);
        e.object_box = read_box(a.at("object_box"), where);
        e.object_class = a.at("object_class").get<int>();
        e.action = a.at("action").get<int>();
        require(e.object_class >= 0 && e.action >= 0, ErrorCategory::kFormat,
                where + ": class ids must be >= 0");
        g.annotations.push_back(e);
      }
      gt.images.push_back(std::move(g));
    }
  } catch (const json::exception& e) {
    fail(ErrorCategory::kFormat, path.string() + ": " + e.what());
  }
  return gt;
}

void write_ground_truth(const GroundTruth& gt, const std::filesystem::path& path) {
  json images = json::array();
  for (const GroundTruthImage& img : gt.images) {
    json anns = json::array();
    for (const GroundTruthEntry& e : img.annotations) {
      anns.push_back({{"human_box", e.human_box.to_array()},
                      {"object_box", e.object_box.to_array()},
                      {"object_class", e.object_class},
                      {"action", e.action}});
    }
    images.push_back({{"image_id", img.image_id}, {"annotations", anns}});
  }
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << json{{"images", images}}.dump(2) << '\n';
}

std::string report_json(const EvalReport& r) {
  json classes = json::array();
  for (const ClassAp& c : r.classes) {
    classes.push_back({{"action", c.cls.action},
                       {"object", c.cls.object},
                       {"gt_count", c.gt_count},
                       {"rare", c.rare},
                       {"ap", c.ap}});
  }
  const json doc = {{"map_full", opt_json(r.map_full)},
                    {"map_rare", opt_json(r.map_rare)},
                    {"map_nonrare", opt_json(r.map_nonrare)},
                    {"rare_threshold", r.rare_threshold},
                    {"unknown_predictions", r.unknown_predictions},
                    {"warnings", r.warnings},
                    {"classes", classes}};
  return doc.dump(2);
}

std::string report_table(const EvalReport& r) {
  const auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << *v;
    return s.str();
  };
  std::ostringstream out;
  out << "action  object  gt  rare  AP\n";
  for (const ClassAp& c : r.classes) {
    out << std::setw(6) << c.cls.action << "  " << std::setw(6) << c.cls.object << "  "
        << std::setw(2) << c.gt_count << "  " << (c.rare ? "yes " : "no  ") << "  "
        << fmt(c.ap) << '\n';
  }
  out << "mAP full " << fmt(r.map_full) << "  rare " << fmt(r.map_rare) << "  non-rare "
      << fmt(r.map_nonrare) << '\n';
  return out.str();
}

}  // namespace regformer
