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

// INI run configuration. Sections: [model] [detector] [train] [data]
// [bench] [paths] [run]. Unknown sections or keys are rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include "regformer/bench.hpp"
#include "regformer/detection.hpp"
#include "regformer/params.hpp"
#include "regformer/synthetic.hpp"
#include "regformer/training.hpp"

namespace regformer {

struct RunConfig {
  std::size_t d_v = 0;  // 0: take from the data
  std::size_t d_t = 0;
  std::size_t d_s = 0;  // 0: d_t
  GroundingConfig grounding;
  InitOptions init;
  DetectorConfig detector;
  TrainConfig train;
  SyntheticSpec data;
  BenchConfig bench;
  std::filesystem::path data_dir;
  std::filesystem::path checkpoint;
  std::filesystem::path output;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
  ModelDims dims_for(std::size_t data_d_v, std::size_t data_d_t) const;
};

GroundingInit parse_grounding_init(const std::string& name);

RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace regformer
