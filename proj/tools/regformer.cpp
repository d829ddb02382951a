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

// regformer: synthetic data, training, classification, detection,
// evaluation and benchmarking from the command line.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regformer/bench.hpp"
#include "regformer/config.hpp"
#include "regformer/dataset.hpp"
#include "regformer/detection.hpp"
#include "regformer/errors.hpp"
#include "regformer/evaluation.hpp"
#include "regformer/params.hpp"
#include "regformer/synthetic.hpp"
#include "regformer/tensor_io.hpp"
#include "regformer/training.hpp"

namespace fs = std::filesystem;
using namespace regformer;

namespace {

struct GlobalFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
};

RunConfig resolve_config(const GlobalFlags& g) {
  RunConfig cfg = g.config.empty() ? RunConfig{} : load_run_config(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (g.threads) cfg.threads = *g.threads;
  require(cfg.threads >= 1, ErrorCategory::kArgument, "--threads must be >= 1");
  cfg.data.seed = cfg.seed;
  cfg.train.seed = cfg.seed;
  cfg.train.threads = cfg.threads;
  cfg.bench.seed = cfg.seed;
  return cfg;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  require(static_cast<bool>(out), ErrorCategory::kIo, "cannot write " + path.string());
  out << text;
}

// ---- gen-data --------------------------------------------------------------

struct GenArgs {
  std::string out;
  std::optional<std::size_t> grid_h, grid_w, d_v, d_t, n_objects, n_actions, n_images, first;
  std::optional<double> noise_std;
};

int cmd_gen_data(const GlobalFlags& g, const GenArgs& a) {
  RunConfig cfg = resolve_config(g);
  SyntheticSpec& s = cfg.data;
  if (a.grid_h) s.grid_h = *a.grid_h;
  if (a.grid_w) s.grid_w = *a.grid_w;
  if (a.d_v) s.d_v = *a.d_v;
  if (a.d_t) s.d_t = *a.d_t;
  if (a.n_objects) s.n_objects = *a.n_objects;
  if (a.n_actions) s.n_actions = *a.n_actions;
  if (a.n_images) s.n_images = *a.n_images;
  if (a.first) s.first_image_index = *a.first;
  if (a.noise_std) s.noise_std = *a.noise_std;
  const SyntheticData data = generate_synthetic(s);
  write_dataset(data, a.out);
  std::cout << "wrote " << data.samples.size() << " images to " << a.out << '\n';
  return 0;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string init;
  std::optional<std::size_t> epochs, batch_size;
  std::optional<double> lr;
  std::string grounding_init;
};

int cmd_train(const GlobalFlags& g, const TrainArgs& a) {
  RunConfig cfg = resolve_config(g);
  if (a.epochs) cfg.train.epochs = *a.epochs;
  if (a.batch_size) cfg.train.batch_size = *a.batch_size;
  if (a.lr) cfg.train.lr = *a.lr;
  if (!a.grounding_init.empty()) cfg.init.grounding = parse_grounding_init(a.grounding_init);
  cfg.train.validate();
  const Dataset ds = load_dataset(a.data);
  RegFormerParams params;
  if (!a.init.empty()) {
    params = load_checkpoint(a.init);
  } else {
    params = init_params(cfg.dims_for(ds.manifest.d_v, ds.manifest.d_t), cfg.seed, cfg.grounding, cfg.init);
  }
  const TrainResult result = train(ds.samples, ds.bank, std::move(params), cfg.train);
  save_checkpoint(result.params, a.out);
  std::cout.precision(10);
  std::cout << "epoch,loss\n";
  std::cout << "initial," << result.initial_loss << '\n';
  for (std::size_t e = 0; e < result.epoch_losses.size(); ++e) {
    std::cout << e + 1 << ',' << result.epoch_losses[e] << '\n';
  }
  std::cout << "final," << result.final_loss << '\n';
  return 0;
}

// ---- classify --------------------------------------------------------------

int cmd_classify(const GlobalFlags& g, const std::string& ckpt, const std::string& tensor,
                 const std::string& bank_path) {
  (void)resolve_config(g);
  const RegFormerParams params = load_checkpoint(ckpt);
  const FeatureMap fm = load_feature_map(tensor);
  const TextEmbeddingBank bank = load_bank(bank_path);
  const Tensor2D scores = classification_forward(fm, bank, params);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t k = 0; k < scores.rows(); ++k) {
    const auto r = scores.row(k);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  const nlohmann::json doc = {{"objects", bank.object_names},
                              {"actions", bank.action_names},
                              {"scores", rows}};
  std::cout << doc.dump(2) << '\n';
  return 0;
}

// ---- detect ----------------------------------------------------------------

struct DetectArgs {
  std::string ckpt;
  std::string features;
  std::string bank;
  std::string detections;
  std::string data;
  std::string out;
  std::string preset;
  std::optional<double> lambda;
};

std::vector<HOIPrediction> detect_one(const RegFormerParams& params, const FeatureMap& fm,
                                      const TextEmbeddingBank& bank, const DetectionFile& dets,
                                      const RunConfig& cfg) {
  const Proposals props = filter_proposals(dets.detections, cfg.detector);
  std::vector<std::string> diagnostics;
  DetectOptions opts;
  opts.threads = cfg.threads;
  opts.diagnostics = &diagnostics;
  opts.image_id = dets.image_id;
  auto preds = detect(fm, bank, params, props.humans, props.objects, cfg.detector, opts);
  for (const std::string& d : diagnostics) std::cerr << "WARNING: " << dets.image_id << ": " << d << '\n';
  return preds;
}

int cmd_detect(const GlobalFlags& g, const DetectArgs& a) {
  RunConfig cfg = resolve_config(g);
  if (!a.preset.empty()) {
    require(a.preset == "hico" || a.preset == "vcoco", ErrorCategory::kArgument,
            "--preset must be hico or vcoco");
    cfg.detector.lambda = a.preset == "hico" ? kHicoLambda : kVcocoLambda;
  }
  if (a.lambda) cfg.detector.lambda = *a.lambda;
  cfg.detector.validate();
  const RegFormerParams params = load_checkpoint(a.ckpt);

  std::vector<HOIPrediction> preds;
  if (!a.data.empty()) {
    const Dataset ds = load_dataset(a.data);
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
      const DatasetEntry& e = ds.manifest.images[i];
      require(!e.detections.empty(), ErrorCategory::kIo,
              "image " + e.image_id + " lists no detections file");
      const DetectionFile dets = read_detections(ds.root / e.detections);
      auto part = detect_one(params, ds.samples[i].fm, ds.bank, dets, cfg);
      preds.insert(preds.end(), part.begin(), part.end());
    }
  } else {
    require(!a.features.empty() && !a.bank.empty() && !a.detections.empty(),
            ErrorCategory::kArgument, "detect needs FEATURES BANK DETECTIONS or --data DIR");
    preds = detect_one(params, load_feature_map(a.features), load_bank(a.bank),
                       read_detections(a.detections), cfg);
  }
  if (a.out.empty()) {
    for (const HOIPrediction& p : preds) write_prediction_line(p, std::cout);
  } else {
    write_predictions(preds, a.out);
    std::cerr << "wrote " << preds.size() << " predictions to " << a.out << '\n';
  }
  return 0;
}

// ---- eval ------------------------------------------------------------------

struct EvalArgs {
  std::string preds;
  std::string gt;
  std::size_t rare_threshold = kDefaultRareThreshold;
  std::string classes;
  std::string out;
};

std::set<HoiClass> parse_class_filter(const std::string& text) {
  std::set<HoiClass> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    require(colon != std::string::npos, ErrorCategory::kArgument,
            "--classes entries look like action:object, got '" + item + "'");
    try {
      out.insert({std::stoi(item.substr(0, colon)), std::stoi(item.substr(colon + 1))});
    } catch (const std::exception&) {
      fail(ErrorCategory::kArgument, "--classes: cannot parse '" + item + "'");
    }
  }
  return out;
}

int cmd_eval(const GlobalFlags& g, const EvalArgs& a) {
  const RunConfig cfg = resolve_config(g);
  EvalOptions opts;
  opts.rare_threshold = a.rare_threshold;
  opts.threads = cfg.threads;
  if (!a.classes.empty()) opts.class_filter = parse_class_filter(a.classes);
  const std::vector<HOIPrediction> preds = read_predictions(a.preds);
  const EvalReport report = evaluate(preds, read_ground_truth(a.gt), opts);
  for (const std::string& w : report.warnings) std::cerr << "WARNING: " << w << '\n';
  if (!a.out.empty()) write_text_file(a.out, report_json(report) + "\n");
  std::cout << report_json(report) << '\n';
  std::cerr << report_table(report);
  return 0;
}

// ---- bench -----------------------------------------------------------------

struct BenchArgs {
  std::string pair_counts;
  std::string strategies;
  std::optional<std::size_t> iterations, warmup, grid, dim;
  std::string json_out;
  std::string csv_out;
};

int cmd_bench(const GlobalFlags& g, const BenchArgs& a) {
  RunConfig cfg = resolve_config(g);
  BenchConfig& b = cfg.bench;
  if (!a.pair_counts.empty()) {
    b.pair_counts.clear();
    std::stringstream ss(a.pair_counts);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        const long v = std::stol(item);
        require(v >= 1, ErrorCategory::kArgument, "--pair-counts entries must be >= 1");
        b.pair_counts.push_back(static_cast<std::size_t>(v));
      } catch (const std::logic_error&) {
        fail(ErrorCategory::kArgument, "--pair-counts: cannot parse '" + item + "'");
      }
    }
  }
  if (!a.strategies.empty()) {
    b.strategies.clear();
    std::stringstream ss(a.strategies);
    std::string item;
    while (std::getline(ss, item, ',')) b.strategies.push_back(parse_strategy(item));
  }
  if (a.iterations) b.iterations = *a.iterations;
  if (a.warmup) b.warmup = *a.warmup;
  if (a.grid) b.grid = *a.grid;
  if (a.dim) b.d_v = b.d_t = *a.dim;
  const std::vector<BenchResult> results = run_benchmark(b);
  const std::string json = bench_json(results);
  const std::string csv = bench_csv(results);
  if (!a.json_out.empty()) write_text_file(a.json_out, json + "\n");
  if (!a.csv_out.empty()) write_text_file(a.csv_out, csv);
  std::cout << csv;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RegFormer HOI reasoning: data generation, training, detection, evaluation"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "INI run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed for every random draw");
  app.add_option("--threads", g.threads, "worker threads");

  GenArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "write a planted synthetic dataset");
  gen_cmd->add_option("out", gen.out, "output directory")->required();
  gen_cmd->add_option("--grid-h", gen.grid_h);
  gen_cmd->add_option("--grid-w", gen.grid_w);
  gen_cmd->add_option("--d-v", gen.d_v);
  gen_cmd->add_option("--d-t", gen.d_t);
  gen_cmd->add_option("--n-objects", gen.n_objects);
  gen_cmd->add_option("--n-actions", gen.n_actions);
  gen_cmd->add_option("--n-images", gen.n_images);
  gen_cmd->add_option("--noise-std", gen.noise_std);
  gen_cmd->add_option("--first-index", gen.first, "global index of the first scene");

  TrainArgs tr;
  auto* train_cmd = app.add_subcommand("train", "train on a dataset directory");
  train_cmd->add_option("data", tr.data, "dataset directory")->required();
  train_cmd->add_option("out", tr.out, "output checkpoint")->required();
  train_cmd->add_option("--init", tr.init, "start from this checkpoint");
  train_cmd->add_option("--epochs", tr.epochs);
  train_cmd->add_option("--batch-size", tr.batch_size);
  train_cmd->add_option("--lr", tr.lr);
  train_cmd->add_option("--grounding-init", tr.grounding_init, "uniform or near_identity");

  std::string cls_ckpt, cls_tensor, cls_bank;
  auto* cls_cmd = app.add_subcommand("classify", "image-level HOI scores as JSON");
  cls_cmd->add_option("checkpoint", cls_ckpt)->required();
  cls_cmd->add_option("features", cls_tensor)->required();
  cls_cmd->add_option("bank", cls_bank)->required();

  DetectArgs det;
  auto* det_cmd = app.add_subcommand("detect", "instance-level HOI predictions as JSON lines");
  det_cmd->add_option("checkpoint", det.ckpt)->required();
  det_cmd->add_option("features", det.features);
  det_cmd->add_option("bank", det.bank);
  det_cmd->add_option("detections", det.detections);
  det_cmd->add_option("--data", det.data, "run over every image of a dataset directory");
  det_cmd->add_option("--out", det.out, "write predictions here instead of stdout");
  det_cmd->add_option("--preset", det.preset, "hico or vcoco lambda preset");
  det_cmd->add_option("--lambda", det.lambda, "detector score exponent");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "mAP report for a predictions file");
  eval_cmd->add_option("predictions", ev.preds)->required();
  eval_cmd->add_option("gt", ev.gt)->required();
  eval_cmd->add_option("--rare-threshold", ev.rare_threshold);
  eval_cmd->add_option("--classes", ev.classes, "only these classes, e.g. 0:1,2:0");
  eval_cmd->add_option("--out", ev.out, "also write the JSON report here");

  BenchArgs bn;
  auto* bench_cmd = app.add_subcommand("bench", "pairwise inference benchmark");
  bench_cmd->add_option("--pair-counts", bn.pair_counts, "comma separated, default 1,50,200");
  bench_cmd->add_option("--strategies", bn.strategies,
                        "comma separated subset of regformer,regformer_naive,mldecoder_crop");
  bench_cmd->add_option("--iterations", bn.iterations);
  bench_cmd->add_option("--warmup", bn.warmup);
  bench_cmd->add_option("--grid", bn.grid);
  bench_cmd->add_option("--dim", bn.dim, "d_v = d_t");
  bench_cmd->add_option("--json", bn.json_out);
  bench_cmd->add_option("--csv", bn.csv_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "ERROR:argument: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*gen_cmd) return cmd_gen_data(g, gen);
    if (*train_cmd) return cmd_train(g, tr);
    if (*cls_cmd) return cmd_classify(g, cls_ckpt, cls_tensor, cls_bank);
    if (*det_cmd) return cmd_detect(g, det);
    if (*eval_cmd) return cmd_eval(g, ev);
    if (*bench_cmd) return cmd_bench(g, bn);
  } catch (const Error& e) {
    std::cerr << "ERROR:" << category_name(e.category()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ERROR:internal: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
