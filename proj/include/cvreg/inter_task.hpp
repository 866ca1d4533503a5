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

// Inter-task regularization: semantic and instance pseudo labels filter each
// other, each task deferring to the other wherever the other is less
// uncertain.
//
// Instance side: a selected instance survives only if its own entropy is
// below the aggregated semantic entropy over its mask; an unselected instance
// is rescued when the semantic pseudo labels agree with it.
//
// Semantic side: per pixel, the semantic pseudo label is kept where semantic
// entropy is lower, replaced by the instance-derived label where instance
// entropy is lower, and voided on exact ties.

#ifndef CVREG_INTER_TASK_HPP_
#define CVREG_INTER_TASK_HPP_

#include <cstddef>
#include <vector>

#include "cvreg/label_core.hpp"

namespace cvreg {

enum class RegionAggregation { kMean, kMedian };

struct ItrConfig {
  double consistency_threshold = 0.5;  // in (0, 1]
  RegionAggregation region_aggregation = RegionAggregation::kMean;

  void validate() const;
  bool operator==(const ItrConfig&) const = default;
};

// Fraction of the instance's mask pixels whose semantic pseudo label equals
// the instance category. Void pixels count as disagreement.
double consistency_fraction(const Instance& instance,
                            const SemanticLabelMap& sem_pl);

bool judge_consistency(const Instance& instance, const SemanticLabelMap& sem_pl,
                       const ItrConfig& cfg);

// Mean or median of `entropy` over the pixels of `mask`.
double region_entropy(const EntropyMap& entropy, const RleMask& mask,
                      RegionAggregation aggregation);

// `inst_pl` must be drawn from `inst` (for example by select_instances);
// members are identified by value. Output is sorted by descending score,
// ties kept in `inst` order.
InstanceSet regularize_instances(const InstanceSet& inst,
                                 const SemanticProbMap& sem,
                                 const SemanticLabelMap& sem_pl,
                                 const InstanceSet& inst_pl,
                                 const ItrConfig& cfg);

// Index form of regularize_instances: `selected` holds indices into
// inst.instances. Returns indices into inst.instances, in output order.
std::vector<std::size_t> regularize_instance_indices(
    const InstanceSet& inst, const SemanticProbMap& sem,
    const SemanticLabelMap& sem_pl, const std::vector<std::size_t>& selected,
    const ItrConfig& cfg);

// Drops instance ids: each covered pixel takes the category of its
// lowest-entropy covering instance (first in order on ties); void elsewhere.
SemanticLabelMap to_semantic(const InstanceSet& inst, CategoryId void_id);

// `inst_pl` is the selected instance pseudo-label set.
SemanticLabelMap regularize_semantic(const SemanticProbMap& sem,
                                     const SemanticLabelMap& sem_pl,
                                     const InstanceSet& inst_pl,
                                     CategoryId void_id);

}  // namespace cvreg

#endif  // CVREG_INTER_TASK_HPP_
