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

#include "cvreg/pseudo_select.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "cvreg/errors.hpp"

namespace cvreg {

void SelectionPolicy::validate() const {
  if (!(target_fraction > 0.0 && target_fraction <= 1.0)) {
    throw ValidationError("selection: target_fraction must be in (0,1]");
  }
  if (!(min_threshold >= 0.0 && min_threshold < 1.0)) {
    throw ValidationError("selection: min_threshold must be in [0,1)");
  }
}

double ClassBalancedWeights::threshold(CategoryId category) const {
  return std::exp(-k.at(category));
}

void ClassBalancedWeights::validate(const ClassCatalog& catalog) const {
  if (k.size() != catalog.size()) {
    throw ValidationError("weights: expected " +
                          std::to_string(catalog.size()) + " entries, got " +
                          std::to_string(k.size()));
  }
  for (double v : k) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw ValidationError("weights: k must be finite and nonnegative");
    }
  }
  if (void_id != catalog.void_id()) {
    throw ValidationError("weights: void_id disagrees with catalog");
  }
}

double quantile_threshold(std::vector<double> confidences,
                          const SelectionPolicy& policy) {
  if (confidences.empty()) return kMaxSelectionThreshold;
  const std::size_t n = confidences.size();
  // ceil(f * n) - 1, guarded against f * n landing a hair above an integer.
  const double pos = std::ceil(policy.target_fraction * n - 1e-9) - 1.0;
  const std::size_t idx =
      std::min<std::size_t>(n - 1, pos < 0.0 ? 0 : static_cast<std::size_t>(pos));
  std::nth_element(confidences.begin(),
                   confidences.begin() + static_cast<std::ptrdiff_t>(idx),
                   confidences.end(), std::greater<>());
  return std::clamp(confidences[idx], policy.min_threshold,
                    kMaxSelectionThreshold);
}

namespace {

ClassBalancedWeights weights_from_confidences(
    std::vector<std::vector<double>>& per_category,
    const SelectionPolicy& policy, const ClassCatalog& catalog) {
  ClassBalancedWeights w;
  w.void_id = catalog.void_id();
  w.k.resize(catalog.size());
  for (std::size_t c = 0; c < catalog.size(); ++c) {
    w.k[c] = -std::log(quantile_threshold(std::move(per_category[c]), policy));
  }
  return w;
}

}  // namespace

ClassBalancedWeights compute_class_balanced_weights(
    std::span<const SemanticProbMap> preds, const SelectionPolicy& policy,
    const ClassCatalog& catalog) {
  policy.validate();
  if (preds.empty()) {
    throw ValidationError("class-balanced weights: empty prediction list");
  }
  std::vector<std::vector<double>> per_category(catalog.size());
  for (const auto& p : preds) {
    validate(p, catalog);
    const int c_count = p.num_categories();
    for (std::size_t i = 0; i < p.pixels(); ++i) {
      int best = 0;
      float best_p = p.prob(0, i);
      for (int c = 1; c < c_count; ++c) {
        if (p.prob(c, i) > best_p) {
          best = c;
          best_p = p.prob(c, i);
        }
      }
      per_category[best].push_back(best_p);
    }
  }
  return weights_from_confidences(per_category, policy, catalog);
}

ClassBalancedWeights compute_instance_class_balanced_weights(
    std::span<const InstanceSet> sets, const SelectionPolicy& policy,
    const ClassCatalog& catalog) {
  policy.validate();
  if (sets.empty()) {
    throw ValidationError("class-balanced weights: empty instance set list");
  }
  std::vector<std::vector<double>> per_category(catalog.size());
  for (const auto& s : sets) {
    for (const auto& inst : s.instances) {
      per_category.at(inst.category).push_back(
          selection_confidence(inst, catalog));
    }
  }
  return weights_from_confidences(per_category, policy, catalog);
}

double selection_confidence(const Instance& instance,
                            const ClassCatalog& catalog) {
  if (instance.class_dist) {
    const int idx = catalog.thing_index(instance.category);
    if (idx >= 0 && static_cast<std::size_t>(idx) < instance.class_dist->size()) {
      return (*instance.class_dist)[static_cast<std::size_t>(idx)];
    }
  }
  return instance.score;
}

SemanticLabelMap select_semantic(const SemanticProbMap& probs,
                                 const ClassBalancedWeights& weights) {
  if (weights.k.size() != static_cast<std::size_t>(probs.num_categories())) {
    throw ValidationError("select_semantic: weights/category count mismatch");
  }
  std::vector<double> thresholds(weights.k.size());
  for (std::size_t c = 0; c < thresholds.size(); ++c) {
    thresholds[c] = weights.threshold(static_cast<CategoryId>(c));
  }
  SemanticLabelMap out = argmax_label(probs);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const CategoryId c = out.labels[i];
    if (!(static_cast<double>(probs.prob(c, i)) > thresholds[c])) {
      out.labels[i] = weights.void_id;
    }
  }
  return out;
}

std::vector<std::size_t> selected_instance_indices(
    const InstanceSet& set, const ClassBalancedWeights& weights,
    const ClassCatalog& catalog) {
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    const auto& inst = set.instances[i];
    if (selection_confidence(inst, catalog) > weights.threshold(inst.category)) {
      keep.push_back(i);
    }
  }
  return keep;
}

InstanceSet select_instances(const InstanceSet& set,
                             const ClassBalancedWeights& weights,
                             const ClassCatalog& catalog) {
  InstanceSet out;
  out.height = set.height;
  out.width = set.width;
  for (std::size_t i : selected_instance_indices(set, weights, catalog)) {
    out.instances.push_back(set.instances[i]);
  }
  return out;
}

}  // namespace cvreg
