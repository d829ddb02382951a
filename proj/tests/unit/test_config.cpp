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

#include "regformer/config.hpp"
#include "support.hpp"

using namespace regformer;
using namespace regformer::testing;

TEST_CASE("empty config carries the defaults") {
  const RunConfig c = parse_run_config("");
  CHECK(c.grounding.tau_p == 0.05);
  CHECK(c.grounding.gamma == 1.0);
  CHECK(c.detector.lambda == 0.5);
  CHECK(c.detector.score_threshold == 0.2);
  CHECK(c.detector.min_instances == 3);
  CHECK(c.detector.max_instances == 15);
  CHECK(c.train.lr == 2e-4);
  CHECK(c.train.epochs == 5);
  CHECK(c.threads == 1);
  CHECK(c.bench.iterations == 100);
  CHECK(c.bench.warmup == 10);
  CHECK(c.init.grounding == GroundingInit::kUniform);
}

TEST_CASE("sections and keys are applied") {
  const RunConfig c = parse_run_config(R"(
; comment
[model]
tau_p = 0.1
gamma = 0.5
d_s = 12
grounding_init = near_identity
identity_jitter = 0.2

[detector]
preset = vcoco
human_class_id = 3
min_instances = 2

[train]
lr = 0.5
epochs = 7
batch_size = 1

[data]
grid_h = 8
noise_std = 0.2
distractor_strength = 0.5

[bench]
pair_counts = 1, 10
strategies = regformer,mldecoder_crop

[paths]
data_dir = /tmp/d

[run]
seed = 42
threads = 4
)");
  CHECK(c.grounding.tau_p == 0.1);
  CHECK(c.grounding.gamma == 0.5);
  CHECK(c.detector.lambda == 2.0);
  CHECK(c.detector.human_class_id == 3);
  CHECK(c.detector.min_instances == 2);
  CHECK(c.train.lr == 0.5);
  CHECK(c.train.epochs == 7);
  CHECK(c.train.batch_size == 1);
  CHECK(c.data.grid_h == 8);
  CHECK(c.data.noise_std == 0.2);
  CHECK(c.data.distractor_strength == 0.5);
  CHECK(c.init.grounding == GroundingInit::kNearIdentity);
  CHECK(c.init.identity_jitter == 0.2);
  CHECK(c.bench.pair_counts == std::vector<std::size_t>{1, 10});
  CHECK(c.bench.strategies == std::vector<BenchStrategy>{BenchStrategy::kRegFormer, BenchStrategy::kMlDecoderCrop});
  CHECK(c.data_dir == "/tmp/d");
  CHECK(c.seed == 42);
  CHECK(c.threads == 4);
  const ModelDims dims = c.dims_for(16, 10);
  CHECK(dims.d_s == 12);
  CHECK(dims.d == 16);
}

TEST_CASE("explicit lambda wins over the preset") {
  CHECK(parse_run_config("[detector]\npreset = vcoco\nlambda = 1.5\n").detector.lambda == 1.5);
  CHECK(parse_run_config("[detector]\nlambda = 1.5\npreset = hico\n").detector.lambda == 1.5);
  CHECK(parse_run_config("[detector]\npreset = hico\n").detector.lambda == 0.5);
}

TEST_CASE("config errors") {
  for (const char* text : {
           "[nope]\nx = 1\n",
           "[model]\nwidth = 3\n",
           "[model]\ntau_p = abc\n",
           "[model]\ntau_p = 0\n",
           "[model]\ngrounding_init = identity\n",
           "[model]\nidentity_jitter = -1\n",
           "[train]\nepochs = -2\n",
           "[detector]\npreset = coco\n",
           "[detector]\nmin_instances = 20\n",
           "[bench]\nstrategies = regformer, yolo\n",
           "[run]\nthreads = 0\n",
           "seed = 1\n",
           "[model\n",
       }) {
    CAPTURE(text);
    CHECK_ERROR_CATEGORY(parse_run_config(text), ErrorCategory::kConfig);
  }
  RunConfig c;
  c.d_v = 8;
  CHECK_ERROR_CATEGORY(c.dims_for(16, 16), ErrorCategory::kConfig);
  CHECK_ERROR_CATEGORY(load_run_config("/nonexistent/run.ini"), ErrorCategory::kIo);
}
