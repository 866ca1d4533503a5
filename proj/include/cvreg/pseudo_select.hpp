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

// Class-balanced confidence thresholding. Category c is selected where its
// probability strictly exceeds exp(-k_c); the k_c are fitted so that roughly
// a fixed fraction of each category's most confident predictions survive,
// which keeps frequent categories from crowding out rare ones.

#ifndef CVREG_PSEUDO_SELECT_HPP_
#define CVREG_PSEUDO_SELECT_HPP_

#include <span>
#include <vector>

#include "cvreg/label_core.hpp"

namespace cvreg {

// Upper clamp on a fitted threshold, also the threshold of categories that
// received no predictions at all.
inline constexpr double kMaxSelectionThreshold = 1.0 - 1e-6;

struct SelectionPolicy {
  double target_fraction = 0.5;  // in (0, 1]
  double min_threshold = 0.05;   // in [0, 1)

  void validate() const;
  bool operator==(const SelectionPolicy&) const = default;
};

struct ClassBalancedWeights {
  std::vector<double> k;  // indexed by category id, all >= 0
  CategoryId void_id = 0;

  double threshold(CategoryId category) const;
  void validate(const ClassCatalog& catalog) const;
  bool operator==(const ClassBalancedWeights&) const = default;
};

// Threshold at the target_fraction quantile (descending) of `confidences`,
// clamped to [min_threshold, kMaxSelectionThreshold]. Empty input yields
// kMaxSelectionThreshold.
double quantile_threshold(std::vector<double> confidences,
                          const SelectionPolicy& policy);

// Fits k_c from the max-probabilities of pixels whose argmax is c.
ClassBalancedWeights compute_class_balanced_weights(
    std::span<const SemanticProbMap> preds, const SelectionPolicy& policy,
    const ClassCatalog& catalog);

// Same fitting rule over instance confidences, per thing category. Stuff
// categories receive the empty-category default.
ClassBalancedWeights compute_instance_class_balanced_weights(
    std::span<const InstanceSet> sets, const SelectionPolicy& policy,
    const ClassCatalog& catalog);

// The probability an instance assigns to its own category: the class_dist
// entry when present, else the detection score.
double selection_confidence(const Instance& instance,
                            const ClassCatalog& catalog);

// Argmax category where it clears its threshold, void elsewhere.
SemanticLabelMap select_semantic(const SemanticProbMap& probs,
                                 const ClassBalancedWeights& weights);

// Instances whose confidence clears their category threshold, in input order.
InstanceSet select_instances(const InstanceSet& set,
                             const ClassBalancedWeights& weights,
                             const ClassCatalog& catalog);

// Indices (into set.instances) of the instances select_instances keeps.
std::vector<std::size_t> selected_instance_indices(
    const InstanceSet& set, const ClassBalancedWeights& weights,
    const ClassCatalog& catalog);

}  // namespace cvreg

#endif  // CVREG_PSEUDO_SELECT_HPP_
