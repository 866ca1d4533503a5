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

// Ablation over the four pseudo-label variants on synthetic scenes:
//
//   single_task  selection alone on both tasks
//   inter_task   selection followed by inter-task regularization
//   inter_style  selection unified across an image and its restyled copy
//   cross_view   both: the views are unified first, then regularized
//
// Each variant's pseudo labels are fused into a panoptic map and scored
// against the scene ground truth.

#ifndef CVREG_EXPERIMENT_HPP_
#define CVREG_EXPERIMENT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "cvreg/inter_style.hpp"
#include "cvreg/inter_task.hpp"
#include "cvreg/panoptic_eval.hpp"
#include "cvreg/panoptic_fusion.hpp"
#include "cvreg/pseudo_select.hpp"
#include "cvreg/synth_bench.hpp"

namespace cvreg {

enum class Variant { kSingleTask = 0, kInterTask, kInterStyle, kCrossView };
inline constexpr std::size_t kVariantCount = 4;
inline constexpr std::array<Variant, kVariantCount> kAllVariants = {
    Variant::kSingleTask, Variant::kInterTask, Variant::kInterStyle,
    Variant::kCrossView};

std::string_view variant_name(Variant v);

struct ExperimentConfig {
  SelectionPolicy semantic_policy{0.8, 0.05};
  SelectionPolicy instance_policy{0.3, 0.05};
  ItrConfig itr{0.3, RegionAggregation::kMean};
  IsrConfig isr{};
  FusionConfig fusion{0.5, 0.5, 64};

  void validate() const;
  bool operator==(const ExperimentConfig&) const = default;
};

// Everything one scene contributes: both predictor views on the original and
// the restyled image.
struct ScenePredictions {
  Scene scene;
  RgbImage stylized;
  SemanticProbMap semantic;
  SemanticProbMap semantic_stylized;
  InstanceSet instances;
  InstanceSet instances_stylized;
};

// Deterministic per-scene inputs: the scene seed also drives the reference
// image used for restyling.
ScenePredictions simulate_scene(const SceneSpec& spec,
                                const ClassCatalog& catalog);

struct FittedWeights {
  ClassBalancedWeights semantic;
  ClassBalancedWeights instance;

  bool operator==(const FittedWeights&) const = default;
};

// Fits class-balanced weights over the original-view predictions of all
// scenes.
FittedWeights fit_weights(std::span<const ScenePredictions> scenes,
                          const ExperimentConfig& cfg,
                          const ClassCatalog& catalog);

struct PseudoLabels {
  SemanticLabelMap semantic;
  InstanceSet instances;
};

// The four variants on raw predictions. `view` is the original image's
// prediction and `other` the restyled one's.
PseudoLabels single_task_labels(const SemanticProbMap& sem,
                                const InstanceSet& inst,
                                const FittedWeights& weights,
                                const ClassCatalog& catalog);
PseudoLabels inter_task_labels(const SemanticProbMap& sem,
                               const InstanceSet& inst,
                               const FittedWeights& weights,
                               const ExperimentConfig& cfg,
                               const ClassCatalog& catalog);
PseudoLabels inter_style_labels(const SemanticProbMap& sem,
                                const SemanticProbMap& sem_other,
                                const InstanceSet& inst,
                                const InstanceSet& inst_other,
                                const FittedWeights& weights,
                                const ExperimentConfig& cfg,
                                const ClassCatalog& catalog);
// Unifies the views (lower-entropy semantic distribution per pixel, merged
// instance candidates), then regularizes across tasks.
PseudoLabels cross_view_labels(const SemanticProbMap& sem,
                               const SemanticProbMap& sem_other,
                               const InstanceSet& inst,
                               const InstanceSet& inst_other,
                               const FittedWeights& weights,
                               const ExperimentConfig& cfg,
                               const ClassCatalog& catalog);

PseudoLabels variant_pseudo_labels(Variant variant, const ScenePredictions& sp,
                                   const FittedWeights& weights,
                                   const ExperimentConfig& cfg,
                                   const ClassCatalog& catalog);

struct SceneOutcome {
  std::uint64_t seed = 0;
  std::array<PQReport, kVariantCount> reports;
  // Complementarity: the semantic predictor's argmax labels vs the fused
  // instance predictions, before any selection.
  double semantic_stuff_pq = 0.0;
  double instance_stuff_pq = 0.0;
  double semantic_thing_pq = 0.0;
  double instance_thing_pq = 0.0;
};

struct VariantSummary {
  Variant variant;
  PQReport report;  // accumulated over all scenes
};

struct ExperimentResult {
  std::vector<VariantSummary> table;
  std::vector<SceneOutcome> scenes;
  FittedWeights weights;

  // Per-scene strict orderings.
  std::size_t inter_task_beats_single() const;
  std::size_t inter_style_beats_single() const;
  std::size_t cross_view_beats_both() const;
  std::size_t complementarity_holds() const;
};

// Scene seeds split from `master_seed` by index.
std::vector<SceneSpec> seeded_specs(const SceneSpec& base,
                                    std::uint64_t master_seed,
                                    std::size_t count);

// Requires at least kMinExperimentScenes specs. `jobs` only changes the
// schedule, never the result.
inline constexpr std::size_t kMinExperimentScenes = 20;
ExperimentResult run_ablation_experiment(std::span<const SceneSpec> specs,
                                         const ExperimentConfig& cfg,
                                         const ClassCatalog& catalog,
                                         int jobs = 1);

}  // namespace cvreg

#endif  // CVREG_EXPERIMENT_HPP_
