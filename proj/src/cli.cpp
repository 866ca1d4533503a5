// Copyright 2026 The cvreg Authors. All Rights Reserved.
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


#include "cvreg/cli.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "cvreg/container.hpp"
#include "cvreg/errors.hpp"
#include "cvreg/parallel.hpp"
#include "cvreg/random.hpp"

namespace cvreg {
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kStylizeStream = 5;

struct Common {
  std::string config;
  // Shared by every subcommand, so presence lives in the value itself.
  std::optional<std::uint64_t> seed;
  std::string out;
  int jobs = 1;
  bool quiet = false;
};

void add_common(CLI::App* sub, Common& c, bool out_required) {
  sub->add_option("--config", c.config, "JSON file with module configs");
  sub->add_option("--seed", c.seed, "Seed override");
  auto* out = sub->add_option("--out", c.out, "Output path");
  if (out_required) out->required();
  sub->add_option("--jobs", c.jobs, "Parallelism width")
      ->check(CLI::PositiveNumber);
  sub->add_flag("--quiet", c.quiet, "Suppress progress output");
}

bool seeded(const Common& c) { return c.seed.has_value(); }

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string());
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f << text;
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError(what + ": " + e.what());
  }
}

RunConfig load_config(const Common& c) {
  if (c.config.empty()) return RunConfig{};
  return run_config_from_json(parse_json(read_text(c.config), c.config));
}

// One output per input: --out itself for a single input, otherwise
// --out/<input name>.
fs::path output_for(const Common& c, const std::vector<std::string>& inputs,
                    std::size_t i) {
  if (inputs.size() == 1) return c.out;
  fs::path in = fs::path(inputs[i]).lexically_normal();
  if (in.filename().empty()) in = in.parent_path();
  return fs::path(c.out) / in.filename();
}

std::vector<PredictionContainer> read_all(const std::vector<std::string>& paths,
                                          int jobs) {
  std::vector<std::optional<PredictionContainer>> slots(paths.size());
  parallel_for(paths.size(), jobs,
               [&](std::size_t i) { slots[i].emplace(read_container(paths[i])); });
  std::vector<PredictionContainer> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

void require_same_catalog(const std::vector<PredictionContainer>& cs,
                          const ClassCatalog& catalog) {
  for (const auto& c : cs) {
    if (!(c.catalog == catalog)) {
      throw ValidationError("containers disagree on the catalog");
    }
  }
}

const SemanticProbMap& need_probs(const PredictionContainer& c,
                                  const std::string& path) {
  if (!c.semantic_probs) {
    throw ValidationError(path + ": container has no semantic_probs");
  }
  return *c.semantic_probs;
}

const InstanceSet& need_instances(const PredictionContainer& c,
                                  const std::string& path) {
  if (!c.instance_set) {
    throw ValidationError(path + ": container has no instance_set");
  }
  return *c.instance_set;
}

// Weights from --weights (a container or a JSON file), else fitted over the
// given containers.
FittedWeights resolve_weights(const std::string& weights_path,
                              const std::vector<PredictionContainer>& inputs,
                              const RunConfig& cfg,
                              const ClassCatalog& catalog) {
  if (!weights_path.empty()) {
    if (fs::is_directory(weights_path)) {
      PredictionContainer c = read_container(weights_path);
      if (!c.weights) {
        throw ValidationError(weights_path + ": container carries no weights");
      }
      if (!(c.catalog == catalog)) {
        throw ValidationError(weights_path + ": catalog differs from inputs");
      }
      return *c.weights;
    }
    return weights_from_json(
        parse_json(read_text(weights_path), weights_path), catalog);
  }
  std::vector<SemanticProbMap> sem;
  std::vector<InstanceSet> inst;
  for (const auto& c : inputs) {
    if (c.semantic_probs) sem.push_back(*c.semantic_probs);
    if (c.instance_set) inst.push_back(*c.instance_set);
  }
  return {compute_class_balanced_weights(sem, cfg.modules.semantic_policy,
                                         catalog),
          compute_instance_class_balanced_weights(
              inst, cfg.modules.instance_policy, catalog)};
}

PredictionContainer labels_container(const PredictionContainer& like,
                                     PseudoLabels labels,
                                     const FittedWeights& weights,
                                     const RunConfig& cfg) {
  PredictionContainer out(like.catalog);
  out.height = like.height;
  out.width = like.width;
  out.semantic_labels = std::move(labels.semantic);
  out.instance_set = std::move(labels.instances);
  out.weights = weights;
  out.config = to_json(cfg);
  return out;
}

void note(const Common& c, std::ostream& out, const std::string& msg) {
  if (!c.quiet) out << msg << "\n";
}

struct InputArgs {
  std::vector<std::string> inputs;
  std::vector<std::string> views;
  std::string weights;
  std::string reference;
  std::vector<std::string> pool;
};

int run_select(const Common& c, const InputArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  const auto inputs = read_all(a.inputs, c.jobs);
  const ClassCatalog& catalog = inputs.front().catalog;
  require_same_catalog(inputs, catalog);
  const FittedWeights w = resolve_weights(a.weights, inputs, cfg, catalog);
  parallel_for(inputs.size(), c.jobs, [&](std::size_t i) {
    const auto& in = inputs[i];
    PseudoLabels pl;
    pl.semantic = in.semantic_probs
                      ? select_semantic(*in.semantic_probs, w.semantic)
                      : make_void_labels(in.height, in.width, catalog.void_id());
    if (in.instance_set) {
      pl.instances = select_instances(*in.instance_set, w.instance, catalog);
    } else {
      pl.instances.height = in.height;
      pl.instances.width = in.width;
    }
    write_container(labels_container(in, std::move(pl), w, cfg),
                    output_for(c, a.inputs, i));
  });
  note(c, out, "select: wrote " + std::to_string(inputs.size()) + " container(s)");
  return kExitOk;
}

int run_itr(const Common& c, const InputArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  if (!a.views.empty() && a.views.size() != a.inputs.size()) {
    throw ValidationError("itr: --view must be given once per --input");
  }
  const auto inputs = read_all(a.inputs, c.jobs);
  const auto views = read_all(a.views, c.jobs);
  const ClassCatalog& catalog = inputs.front().catalog;
  require_same_catalog(inputs, catalog);
  require_same_catalog(views, catalog);
  const FittedWeights w = resolve_weights(a.weights, inputs, cfg, catalog);
  parallel_for(inputs.size(), c.jobs, [&](std::size_t i) {
    const auto& in = inputs[i];
    const auto& sem = need_probs(in, a.inputs[i]);
    const auto& inst = need_instances(in, a.inputs[i]);
    PseudoLabels pl =
        views.empty()
            ? inter_task_labels(sem, inst, w, cfg.modules, catalog)
            : cross_view_labels(sem, need_probs(views[i], a.views[i]), inst,
                                need_instances(views[i], a.views[i]), w,
                                cfg.modules, catalog);
    write_container(labels_container(in, std::move(pl), w, cfg),
                    output_for(c, a.inputs, i));
  });
  note(c, out, "itr: wrote " + std::to_string(inputs.size()) + " container(s)");
  return kExitOk;
}

int run_isr(const Common& c, const InputArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  if (a.views.size() != a.inputs.size()) {
    throw ValidationError("isr: --view must be given once per --input");
  }
  const auto inputs = read_all(a.inputs, c.jobs);
  const auto views = read_all(a.views, c.jobs);
  const ClassCatalog& catalog = inputs.front().catalog;
  require_same_catalog(inputs, catalog);
  require_same_catalog(views, catalog);
  const FittedWeights w = resolve_weights(a.weights, inputs, cfg, catalog);
  parallel_for(inputs.size(), c.jobs, [&](std::size_t i) {
    const auto& in = inputs[i];
    PseudoLabels pl = inter_style_labels(
        need_probs(in, a.inputs[i]), need_probs(views[i], a.views[i]),
        need_instances(in, a.inputs[i]), need_instances(views[i], a.views[i]),
        w, cfg.modules, catalog);
    write_container(labels_container(in, std::move(pl), w, cfg),
                    output_for(c, a.inputs, i));
  });
  note(c, out, "isr: wrote " + std::to_string(inputs.size()) + " container(s)");
  return kExitOk;
}

int run_stylize(const Common& c, const InputArgs& a, std::ostream& out) {
  RunConfig cfg = load_config(c);
  if (a.reference.empty() == a.pool.empty()) {
    throw ValidationError("stylize: give either --reference or --pool");
  }
  if (seeded(c)) cfg.modules.isr.reference_seed = *c.seed;
  cfg.modules.isr.reference_selection = a.pool.empty()
                                            ? ReferenceSelection::kExplicit
                                            : ReferenceSelection::kSeededPool;
  const auto inputs = read_all(a.inputs, c.jobs);
  const auto refs =
      read_all(a.pool.empty() ? std::vector<std::string>{a.reference} : a.pool,
               c.jobs);
  for (std::size_t r = 0; r < refs.size(); ++r) {
    if (!refs[r].image) throw ValidationError("stylize: reference has no image");
  }
  parallel_for(inputs.size(), c.jobs, [&](std::size_t i) {
    PredictionContainer o = inputs[i];
    if (!o.image) throw ValidationError(a.inputs[i] + ": container has no image");
    const std::size_t r =
        a.pool.empty()
            ? 0
            : pick_reference(refs.size(),
                             derive_seed(cfg.modules.isr.reference_seed, i,
                                         kStylizeStream));
    o.image = match_histograms(*o.image, *refs[r].image);
    o.config = to_json(cfg);
    write_container(o, output_for(c, a.inputs, i));
  });
  note(c, out, "stylize: wrote " + std::to_string(inputs.size()) + " container(s)");
  return kExitOk;
}

int run_fuse(const Common& c, const InputArgs& a, std::ostream& out) {
  const RunConfig cfg = load_config(c);
  const auto inputs = read_all(a.inputs, c.jobs);
  parallel_for(inputs.size(), c.jobs, [&](std::size_t i) {
    const auto& in = inputs[i];
    if (!in.semantic_labels) {
      throw ValidationError(a.inputs[i] + ": container has no semantic_labels");
    }
    PredictionContainer o(in.catalog);
    o.height = in.height;
    o.width = in.width;
    o.panoptic = fuse_panoptic(need_instances(in, a.inputs[i]),
                               *in.semantic_labels, cfg.modules.fusion,
                               in.catalog);
    o.weights = in.weights;
    o.config = to_json(cfg);
    write_container(o, output_for(c, a.inputs, i));
  });
  note(c, out, "fuse: wrote " + std::to_string(inputs.size()) + " container(s)");
  return kExitOk;
}

int run_eval(const Common& c, const std::vector<std::string>& preds,
             const std::vector<std::string>& gts, const std::string& table,
             std::ostream& out) {
  if (preds.size() != gts.size()) {
    throw ValidationError("eval: --pred and --gt must be paired");
  }
  const auto p = read_all(preds, c.jobs);
  const auto g = read_all(gts, c.jobs);
  const ClassCatalog& catalog = g.front().catalog;
  require_same_catalog(p, catalog);
  require_same_catalog(g, catalog);
  std::vector<SegmentMatching> matchings(p.size());
  parallel_for(p.size(), c.jobs, [&](std::size_t i) {
    if (!p[i].panoptic) throw ValidationError(preds[i] + ": no panoptic map");
    if (!g[i].panoptic) throw ValidationError(gts[i] + ": no panoptic map");
    matchings[i] = match_segments(*p[i].panoptic, *g[i].panoptic, catalog);
  });
  PQAccumulator acc;
  for (const auto& m : matchings) acc.add(m);
  const PQReport report = acc.report();
  const std::string text = format_table(report, catalog);
  if (!c.out.empty()) write_text(c.out, to_json(report, catalog).dump(2) + "\n");
  if (!table.empty()) write_text(table, text);
  if (!c.quiet) out << text;
  return kExitOk;
}

int run_synth(const Common& c, std::ostream& out) {
  RunConfig cfg = load_config(c);
  if (seeded(c)) cfg.scene.rng_seed = *c.seed;
  cfg.scene.validate();
  const ClassCatalog catalog = default_catalog();
  ScenePredictions sp = simulate_scene(cfg.scene, catalog);
  const Json echo = to_json(cfg);
  const fs::path root = c.out;
  const int h = cfg.scene.height;
  const int w = cfg.scene.width;

  PredictionContainer gt(catalog);
  gt.height = h;
  gt.width = w;
  gt.panoptic = sp.scene.gt;
  gt.image = sp.scene.image;
  gt.config = echo;

  PredictionContainer v0(catalog);
  v0.height = h;
  v0.width = w;
  v0.semantic_probs = std::move(sp.semantic);
  v0.instance_set = std::move(sp.instances);
  v0.image = std::move(sp.scene.image);
  v0.config = echo;

  PredictionContainer v1(catalog);
  v1.height = h;
  v1.width = w;
  v1.semantic_probs = std::move(sp.semantic_stylized);
  v1.instance_set = std::move(sp.instances_stylized);
  v1.image = std::move(sp.stylized);
  v1.config = echo;

  const std::array<std::pair<const PredictionContainer*, const char*>, 3> all = {
      {{&gt, "gt"}, {&v0, "view0"}, {&v1, "view1"}}};
  parallel_for(all.size(), c.jobs, [&](std::size_t i) {
    write_container(*all[i].first, root / all[i].second);
  });
  note(c, out, "synth: wrote " + root.string() + "/{gt,view0,view1}");
  return kExitOk;
}

int run_experiment(const Common& c, std::size_t scenes, CLI::Option* scenes_opt,
                   const std::string& table, std::ostream& out) {
  RunConfig cfg = load_config(c);
  if (seeded(c)) cfg.experiment_seed = *c.seed;
  if (scenes_opt->count() > 0) cfg.experiment_scenes = scenes;
  cfg.validate();
  const ClassCatalog catalog = default_catalog();
  const auto specs =
      seeded_specs(cfg.scene, cfg.experiment_seed, cfg.experiment_scenes);
  const ExperimentResult result =
      run_ablation_experiment(specs, cfg.modules, catalog, c.jobs);
  Json j = to_json(result, catalog);
  j["config"] = to_json(cfg);
  write_text(c.out, j.dump(2) + "\n");
  const std::string text = format_table(result);
  if (!table.empty()) write_text(table, text);
  if (!c.quiet) out << text;
  return kExitOk;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out,
                 std::ostream& err) {
  CLI::App app{"Cross-view pseudo-label regularization for panoptic maps",
               "cvreg"};
  app.require_subcommand(1);

  Common common;
  InputArgs in;
  std::vector<std::string> preds, gts;
  std::string table;
  std::size_t scenes = 0;
  CLI::Option* scenes_opt = nullptr;

  auto add_inputs = [&](CLI::App* sub) {
    sub->add_option("--input", in.inputs, "Input container (repeatable)")
        ->required();
  };
  auto add_weights = [&](CLI::App* sub) {
    sub->add_option("--weights", in.weights,
                    "Container or JSON file with fitted weights");
  };

  auto* select = app.add_subcommand("select", "Confidence-based selection");
  add_inputs(select);
  add_weights(select);
  add_common(select, common, true);

  auto* itr = app.add_subcommand("itr", "Inter-task regularization");
  add_inputs(itr);
  itr->add_option("--view", in.views,
                  "Restyled-view container per input; unifies views first");
  add_weights(itr);
  add_common(itr, common, true);

  auto* stylize = app.add_subcommand("stylize", "Histogram-match the image");
  add_inputs(stylize);
  stylize->add_option("--reference", in.reference, "Reference container");
  stylize->add_option("--pool", in.pool, "Reference pool (repeatable)");
  add_common(stylize, common, true);

  auto* isr = app.add_subcommand("isr", "Inter-style unification");
  add_inputs(isr);
  isr->add_option("--view", in.views, "Restyled-view container per input")
      ->required();
  add_weights(isr);
  add_common(isr, common, true);

  auto* fuse = app.add_subcommand("fuse", "Fuse labels into a panoptic map");
  add_inputs(fuse);
  add_common(fuse, common, true);

  auto* eval = app.add_subcommand("eval", "Panoptic quality report");
  eval->add_option("--pred", preds, "Prediction container (repeatable)")
      ->required();
  eval->add_option("--gt", gts, "Ground-truth container (repeatable)")
      ->required();
  eval->add_option("--table", table, "Also write the text table here");
  add_common(eval, common, false);

  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  add_common(synth, common, true);

  auto* experiment =
      app.add_subcommand("experiment", "Ablation over synthetic scenes");
  scenes_opt = experiment->add_option("--scenes", scenes, "Scene count");
  experiment->add_option("--table", table, "Also write the text table here");
  add_common(experiment, common, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (*select) return run_select(common, in, out);
    if (*itr) return run_itr(common, in, out);
    if (*stylize) return run_stylize(common, in, out);
    if (*isr) return run_isr(common, in, out);
    if (*fuse) return run_fuse(common, in, out);
    if (*eval) return run_eval(common, preds, gts, table, out);
    if (*synth) return run_synth(common, out);
    if (*experiment) {
      return run_experiment(common, scenes, scenes_opt, table, out);
    }
  } catch (const IoError& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const fs::filesystem_error& e) {
    err << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace cvreg
