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

#include "cvreg/experiment.hpp"

#include <optional>
#include <string>

#include "cvreg/errors.hpp"
#include "cvreg/parallel.hpp"
#include "cvreg/random.hpp"

namespace cvreg {
namespace {

constexpr std::uint64_t kReferenceStream = 7;
constexpr std::uint64_t kSceneSeedStream = 11;

PseudoLabels regularize(const SemanticProbMap& sem,
                        const SemanticLabelMap& sem_pl, const InstanceSet& inst,
                        const std::vector<std::size_t>& selected,
                        const ExperimentConfig& cfg,
                        const ClassCatalog& catalog) {
  InstanceSet inst_pl;
  inst_pl.height = inst.height;
  inst_pl.width = inst.width;
  for (std::size_t i : selected) inst_pl.instances.push_back(inst.instances[i]);

  PseudoLabels out;
  out.semantic = regularize_semantic(sem, sem_pl, inst_pl, catalog.void_id());
  out.instances.height = inst.height;
  out.instances.width = inst.width;
  for (std::size_t i :
       regularize_instance_indices(inst, sem, sem_pl, selected, cfg.itr)) {
    out.instances.instances.push_back(inst.instances[i]);
  }
  return out;
}

double mean_pq(const PQReport& r, const ClassCatalog& catalog, bool things) {
  return mean_quality(r, [&](CategoryId c) {
           return catalog.is_thing(c) == things;
         }).mpq;
}

}  // namespace

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kSingleTask:
      return "single_task";
    case Variant::kInterTask:
      return "inter_task";
    case Variant::kInterStyle:
      return "inter_style";
    case Variant::kCrossView:
      return "cross_view";
  }
  return "unknown";
}

void ExperimentConfig::validate() const {
  semantic_policy.validate();
  instance_policy.validate();
  itr.validate();
  isr.validate();
  fusion.validate();
}

ScenePredictions simulate_scene(const SceneSpec& spec,
                                const ClassCatalog& catalog) {
  Scene scene = generate_scene(spec, catalog);
  SceneSpec ref_spec = spec;
  ref_spec.rng_seed = derive_seed(spec.rng_seed, 0, kReferenceStream);
  const Scene reference = generate_scene(ref_spec, catalog);

  auto semantic = simulate_semantic_predictor(scene.gt, spec, catalog, 0);
  auto semantic_stylized =
      simulate_semantic_predictor(scene.gt, spec, catalog, 1);
  auto instances = simulate_instance_predictor(scene.gt, spec, catalog, 0);
  auto instances_stylized =
      simulate_instance_predictor(scene.gt, spec, catalog, 1);
  RgbImage stylized = match_histograms(scene.image, reference.image);
  return ScenePredictions{std::move(scene),       std::move(stylized),
                          std::move(semantic),    std::move(semantic_stylized),
                          std::move(instances),   std::move(instances_stylized)};
}

FittedWeights fit_weights(std::span<const ScenePredictions> scenes,
                          const ExperimentConfig& cfg,
                          const ClassCatalog& catalog) {
  std::vector<SemanticProbMap> sem;
  std::vector<InstanceSet> inst;
  sem.reserve(scenes.size());
  inst.reserve(scenes.size());
  for (const auto& s : scenes) {
    sem.push_back(s.semantic);
    inst.push_back(s.instances);
  }
  return {compute_class_balanced_weights(sem, cfg.semantic_policy, catalog),
          compute_instance_class_balanced_weights(inst, cfg.instance_policy,
                                                  catalog)};
}

PseudoLabels single_task_labels(const SemanticProbMap& sem,
                                const InstanceSet& inst,
                                const FittedWeights& weights,
                                const ClassCatalog& catalog) {
  return {select_semantic(sem, weights.semantic),
          select_instances(inst, weights.instance, catalog)};
}

PseudoLabels inter_task_labels(const SemanticProbMap& sem,
                               const InstanceSet& inst,
                               const FittedWeights& weights,
                               const ExperimentConfig& cfg,
                               const ClassCatalog& catalog) {
  return regularize(sem, select_semantic(sem, weights.semantic), inst,
                    selected_instance_indices(inst, weights.instance, catalog),
                    cfg, catalog);
}

PseudoLabels inter_style_labels(const SemanticProbMap& sem,
                                const SemanticProbMap& sem_other,
                                const InstanceSet& inst,
                                const InstanceSet& inst_other,
                                const FittedWeights& weights,
                                const ExperimentConfig& cfg,
                                const ClassCatalog& catalog) {
  return {unify_semantic(sem, sem_other, weights.semantic),
          unify_instances(inst, inst_other, weights.instance, catalog,
                          cfg.isr)};
}

PseudoLabels cross_view_labels(const SemanticProbMap& sem,
                               const SemanticProbMap& sem_other,
                               const InstanceSet& inst,
                               const InstanceSet& inst_other,
                               const FittedWeights& weights,
                               const ExperimentConfig& cfg,
                               const ClassCatalog& catalog) {
  const SemanticProbMap unified = min_entropy_view(sem, sem_other);
  const InstanceSet merged = merge_views(inst, inst_other, cfg.isr);
  return regularize(unified, unify_semantic(sem, sem_other, weights.semantic),
                    merged,
                    selected_instance_indices(merged, weights.instance, catalog),
                    cfg, catalog);
}

PseudoLabels variant_pseudo_labels(Variant variant, const ScenePredictions& sp,
                                   const FittedWeights& weights,
                                   const ExperimentConfig& cfg,
                                   const ClassCatalog& catalog) {
  switch (variant) {
    case Variant::kSingleTask:
      return single_task_labels(sp.semantic, sp.instances, weights, catalog);
    case Variant::kInterTask:
      return inter_task_labels(sp.semantic, sp.instances, weights, cfg,
                               catalog);
    case Variant::kInterStyle:
      return inter_style_labels(sp.semantic, sp.semantic_stylized,
                                sp.instances, sp.instances_stylized, weights,
                                cfg, catalog);
    case Variant::kCrossView:
      return cross_view_labels(sp.semantic, sp.semantic_stylized,
                               sp.instances, sp.instances_stylized, weights,
                               cfg, catalog);
  }
  throw ValidationError("unknown variant");
}

std::vector<SceneSpec> seeded_specs(const SceneSpec& base,
                                    std::uint64_t master_seed,
                                    std::size_t count) {
  std::vector<SceneSpec> specs(count, base);
  for (std::size_t i = 0; i < count; ++i) {
    specs[i].rng_seed = derive_seed(master_seed, i, kSceneSeedStream);
  }
  return specs;
}

std::size_t ExperimentResult::inter_task_beats_single() const {
  std::size_t n = 0;
  for (const auto& s : scenes) {
    n += s.reports[1].mpq > s.reports[0].mpq;
  }
  return n;
}

std::size_t ExperimentResult::inter_style_beats_single() const {
  std::size_t n = 0;
  for (const auto& s : scenes) {
    n += s.reports[2].mpq > s.reports[0].mpq;
  }
  return n;
}

std::size_t ExperimentResult::cross_view_beats_both() const {
  std::size_t n = 0;
  for (const auto& s : scenes) {
    n += s.reports[3].mpq > std::max(s.reports[1].mpq, s.reports[2].mpq);
  }
  return n;
}

std::size_t ExperimentResult::complementarity_holds() const {
  std::size_t n = 0;
  for (const auto& s : scenes) {
    n += s.semantic_stuff_pq > s.instance_stuff_pq &&
         s.semantic_thing_pq < s.instance_thing_pq;
  }
  return n;
}

ExperimentResult run_ablation_experiment(std::span<const SceneSpec> specs,
                                         const ExperimentConfig& cfg,
                                         const ClassCatalog& catalog,
                                         int jobs) {
  cfg.validate();
  if (specs.size() < kMinExperimentScenes) {
    throw ValidationError("experiment: need at least " +
                          std::to_string(kMinExperimentScenes) + " scenes, got " +
                          std::to_string(specs.size()));
  }
  std::vector<std::optional<ScenePredictions>> slots(specs.size());
  parallel_for(specs.size(), jobs, [&](std::size_t i) {
    slots[i].emplace(simulate_scene(specs[i], catalog));
  });
  std::vector<ScenePredictions> scenes;
  scenes.reserve(slots.size());
  for (auto& s : slots) scenes.push_back(std::move(*s));
  slots.clear();

  ExperimentResult result;
  result.weights = fit_weights(scenes, cfg, catalog);
  result.scenes.resize(scenes.size());
  std::vector<std::array<SegmentMatching, kVariantCount>> matchings(
      scenes.size());

  parallel_for(scenes.size(), jobs, [&](std::size_t i) {
    const ScenePredictions& sp = scenes[i];
    SceneOutcome& outcome = result.scenes[i];
    outcome.seed = specs[i].rng_seed;
    for (Variant v : kAllVariants) {
      const PseudoLabels pl =
          variant_pseudo_labels(v, sp, result.weights, cfg, catalog);
      const PanopticMap fused =
          fuse_panoptic(pl.instances, pl.semantic, cfg.fusion, catalog);
      const auto idx = static_cast<std::size_t>(v);
      matchings[i][idx] = match_segments(fused, sp.scene.gt, catalog);
      outcome.reports[idx] = pq_per_class(matchings[i][idx]);
    }

    const PQReport sem_only = pq_per_class(match_segments(
        panoptic_from_semantic(argmax_label(sp.semantic), catalog), sp.scene.gt,
        catalog));
    const PanopticMap inst_pan = fuse_panoptic(
        sp.instances,
        make_void_labels(sp.scene.gt.height, sp.scene.gt.width,
                         catalog.void_id()),
        cfg.fusion, catalog);
    const PQReport inst_only =
        pq_per_class(match_segments(inst_pan, sp.scene.gt, catalog));
    outcome.semantic_stuff_pq = mean_pq(sem_only, catalog, false);
    outcome.instance_stuff_pq = mean_pq(inst_only, catalog, false);
    outcome.semantic_thing_pq = mean_pq(sem_only, catalog, true);
    outcome.instance_thing_pq = mean_pq(inst_only, catalog, true);
  });

  for (Variant v : kAllVariants) {
    PQAccumulator acc;
    for (const auto& m : matchings) acc.add(m[static_cast<std::size_t>(v)]);
    result.table.push_back({v, acc.report()});
  }
  return result;
}

}  // namespace cvreg
