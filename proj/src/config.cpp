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

#include "regformer/config.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <sstream>
#include <type_traits>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "regformer/errors.hpp"
#include "regformer/tensor_io.hpp"

namespace regformer {

namespace pt = boost::property_tree;

namespace {

using Setter = std::function<void(const std::string&)>;
using KeyTable = std::map<std::string, Setter>;

template <class T>
Setter number(T& field) {
  return [&field](const std::string& v) {
    const std::string t = boost::trim_copy(v);
    if (std::is_unsigned_v<T> && t.starts_with('-')) throw boost::bad_lexical_cast();
    field = boost::lexical_cast<T>(t);
  };
}

Setter path_of(std::filesystem::path& field) {
  return [&field](const std::string& v) { field = boost::trim_copy(v); };
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> parts;
  boost::split(parts, v, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

std::map<std::string, KeyTable> key_tables(RunConfig& c, bool& lambda_set, std::string& preset) {
  std::map<std::string, KeyTable> t;
  t["model"] = {{"d_v", number(c.d_v)},
                {"d_t", number(c.d_t)},
                {"d_s", number(c.d_s)},
                {"tau_p", number(c.grounding.tau_p)},
                {"gamma", number(c.grounding.gamma)},
                {"grounding_init",
                 [&](const std::string& v) { c.init.grounding = parse_grounding_init(boost::trim_copy(v)); }},
                {"identity_jitter", number(c.init.identity_jitter)}};
  t["detector"] = {{"score_threshold", number(c.detector.score_threshold)},
                   {"min_instances", number(c.detector.min_instances)},
                   {"max_instances", number(c.detector.max_instances)},
                   {"lambda",
                    [&](const std::string& v) {
                      c.detector.lambda = boost::lexical_cast<double>(boost::trim_copy(v));
                      lambda_set = true;
                    }},
                   {"preset", [&](const std::string& v) { preset = boost::trim_copy(v); }},
                   {"human_class_id", number(c.detector.human_class_id)}};
  t["train"] = {{"lr", number(c.train.lr)},
                {"epochs", number(c.train.epochs)},
                {"batch_size", number(c.train.batch_size)},
                {"focal_gamma", number(c.train.focal.gamma)},
                {"focal_alpha", number(c.train.focal.alpha)}};
  t["data"] = {{"grid_h", number(c.data.grid_h)},
               {"grid_w", number(c.data.grid_w)},
               {"d_v", number(c.data.d_v)},
               {"d_t", number(c.data.d_t)},
               {"n_objects", number(c.data.n_objects)},
               {"n_actions", number(c.data.n_actions)},
               {"n_images", number(c.data.n_images)},
               {"noise_std", number(c.data.noise_std)},
               {"interactions_per_image", number(c.data.interactions_per_image)},
               {"distractors_per_image", number(c.data.distractors_per_image)},
               {"max_blob_side", number(c.data.max_blob_side)},
               {"object_strength", number(c.data.object_strength)},
               {"action_strength", number(c.data.action_strength)},
               {"distractor_strength", number(c.data.distractor_strength)},
               {"first_image_index", number(c.data.first_image_index)}};
  t["bench"] = {{"grid", number(c.bench.grid)},
                {"d_v", number(c.bench.d_v)},
                {"d_t", number(c.bench.d_t)},
                {"n_objects", number(c.bench.n_objects)},
                {"n_actions", number(c.bench.n_actions)},
                {"iterations", number(c.bench.iterations)},
                {"warmup", number(c.bench.warmup)},
                {"pair_counts",
                 [&](const std::string& v) {
                   c.bench.pair_counts.clear();
                   for (const auto& p : split_list(v)) {
                     c.bench.pair_counts.push_back(boost::lexical_cast<std::size_t>(p));
                   }
                 }},
                {"strategies", [&](const std::string& v) {
                   c.bench.strategies.clear();
                   for (const auto& p : split_list(v)) c.bench.strategies.push_back(parse_strategy(p));
                 }}};
  t["paths"] = {{"data_dir", path_of(c.data_dir)},
                {"checkpoint", path_of(c.checkpoint)},
                {"output", path_of(c.output)}};
  t["run"] = {{"seed", number(c.seed)}, {"threads", number(c.threads)}};
  return t;
}

}  // namespace

GroundingInit parse_grounding_init(const std::string& name) {
  if (name == "uniform") return GroundingInit::kUniform;
  if (name == "near_identity") return GroundingInit::kNearIdentity;
  throw Error(ErrorCategory::kConfig, "grounding init must be uniform or near_identity, got '" + name + "'");
}

void RunConfig::validate() const {
  require(grounding.tau_p > 0.0, ErrorCategory::kConfig, "model.tau_p must be > 0");
  require(grounding.gamma >= 0.0, ErrorCategory::kConfig, "model.gamma must be >= 0");
  require(threads >= 1, ErrorCategory::kConfig, "run.threads must be >= 1");
  require(init.identity_jitter >= 0.0 && std::isfinite(init.identity_jitter), ErrorCategory::kConfig,
          "model.identity_jitter must be >= 0");
  detector.validate();
}

ModelDims RunConfig::dims_for(std::size_t data_d_v, std::size_t data_d_t) const {
  require(d_v == 0 || d_v == data_d_v, ErrorCategory::kConfig,
          "model.d_v = " + std::to_string(d_v) + " but the data has d_v = " + std::to_string(data_d_v));
  require(d_t == 0 || d_t == data_d_t, ErrorCategory::kConfig,
          "model.d_t = " + std::to_string(d_t) + " but the data has d_t = " + std::to_string(data_d_t));
  ModelDims dims = ModelDims::with_defaults(data_d_v, data_d_t);
  if (d_s != 0) dims.d_s = d_s;
  return dims;
}

RunConfig parse_run_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCategory::kConfig, origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
  }
  RunConfig cfg;
  bool lambda_set = false;
  std::string preset;
  auto tables = key_tables(cfg, lambda_set, preset);
  for (const auto& [section, keys] : tree) {
    require(keys.data().empty(), ErrorCategory::kConfig,
            origin + ": key '" + section + "' appears outside any section");
    const auto table = tables.find(section);
    require(table != tables.end(), ErrorCategory::kConfig,
            origin + ": unknown section [" + section + "]");
    for (const auto& [key, value] : keys) {
      const auto setter = table->second.find(key);
      require(setter != table->second.end(), ErrorCategory::kConfig,
              origin + ": unknown key '" + key + "' in [" + section + "]");
      try {
        setter->second(value.data());
      } catch (const boost::bad_lexical_cast&) {
        fail(ErrorCategory::kConfig,
             origin + ": bad value '" + value.data() + "' for " + section + "." + key);
      } catch (const Error& e) {
        fail(ErrorCategory::kConfig, origin + ": " + section + "." + key + ": " + e.what());
      }
    }
  }
  if (!preset.empty()) {
    require(preset == "hico" || preset == "vcoco", ErrorCategory::kConfig,
            origin + ": detector.preset must be hico or vcoco");
    if (!lambda_set) cfg.detector.lambda = preset == "hico" ? kHicoLambda : kVcocoLambda;
  }
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = read_file_bytes(path);
  return parse_run_config(std::string(bytes.begin(), bytes.end()), path.string());
}

}  // namespace regformer
