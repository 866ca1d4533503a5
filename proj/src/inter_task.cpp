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

#include "cvreg/inter_task.hpp"

#include <algorithm>

#include "cvreg/errors.hpp"

namespace cvreg {
namespace {

void require_same_dims(int h1, int w1, int h2, int w2, const char* what) {
  if (h1 != h2 || w1 != w2) {
    throw ValidationError(std::string(what) + ": dimension mismatch");
  }
}

// Calls fn(pixel) for every foreground pixel of the mask.
template <typename Fn>
void for_each_pixel(const RleMask& mask, Fn&& fn) {
  const auto& runs = mask.runs();
  std::size_t pos = 0;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r % 2 == 1) {
      for (std::size_t i = pos; i < pos + runs[r]; ++i) fn(i);
    }
    pos += runs[r];
  }
}

}  // namespace

void ItrConfig::validate() const {
  if (!(consistency_threshold > 0.0 && consistency_threshold <= 1.0)) {
    throw ValidationError("itr: consistency_threshold must be in (0,1]");
  }
}

double consistency_fraction(const Instance& instance,
                            const SemanticLabelMap& sem_pl) {
  require_same_dims(instance.mask.height(), instance.mask.width(),
                    sem_pl.height, sem_pl.width, "judge_consistency");
  std::size_t agree = 0;
  for_each_pixel(instance.mask, [&](std::size_t i) {
    if (sem_pl.labels[i] == instance.category) ++agree;
  });
  const std::size_t area = instance.mask.area();
  return area == 0 ? 0.0
                   : static_cast<double>(agree) / static_cast<double>(area);
}

bool judge_consistency(const Instance& instance, const SemanticLabelMap& sem_pl,
                       const ItrConfig& cfg) {
  return consistency_fraction(instance, sem_pl) >= cfg.consistency_threshold;
}

double region_entropy(const EntropyMap& entropy, const RleMask& mask,
                      RegionAggregation aggregation) {
  require_same_dims(entropy.height, entropy.width, mask.height(), mask.width(),
                    "region_entropy");
  std::vector<double> values;
  values.reserve(mask.area());
  for_each_pixel(mask, [&](std::size_t i) { values.push_back(entropy.values[i]); });
  if (values.empty()) return 1.0;
  if (aggregation == RegionAggregation::kMean) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
  }
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<std::size_t> regularize_instance_indices(
    const InstanceSet& inst, const SemanticProbMap& sem,
    const SemanticLabelMap& sem_pl, const std::vector<std::size_t>& selected,
    const ItrConfig& cfg) {
  cfg.validate();
  require_same_dims(inst.height, inst.width, sem.height(), sem.width(),
                    "regularize_instances");
  require_same_dims(inst.height, inst.width, sem_pl.height, sem_pl.width,
                    "regularize_instances");
  const EntropyMap sem_entropy = semantic_entropy_map(sem);

  std::vector<bool> is_selected(inst.instances.size(), false);
  for (std::size_t idx : selected) is_selected.at(idx) = true;

  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < inst.instances.size(); ++i) {
    const Instance& candidate = inst.instances[i];
    if (is_selected[i]) {
      const double region = region_entropy(sem_entropy, candidate.mask,
                                           cfg.region_aggregation);
      if (instance_entropy(candidate) < region) kept.push_back(i);
    } else if (judge_consistency(candidate, sem_pl, cfg)) {
      kept.push_back(i);
    }
  }
  std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
    return inst.instances[a].score > inst.instances[b].score;
  });
  return kept;
}

InstanceSet regularize_instances(const InstanceSet& inst,
                                 const SemanticProbMap& sem,
                                 const SemanticLabelMap& sem_pl,
                                 const InstanceSet& inst_pl,
                                 const ItrConfig& cfg) {
  require_same_dims(inst.height, inst.width, inst_pl.height, inst_pl.width,
                    "regularize_instances");
  // Resolve each selected instance to a distinct member of `inst`.
  std::vector<bool> used(inst.instances.size(), false);
  std::vector<std::size_t> selected;
  for (const auto& pl : inst_pl.instances) {
    bool found = false;
    for (std::size_t i = 0; i < inst.instances.size(); ++i) {
      if (!used[i] && inst.instances[i] == pl) {
        used[i] = true;
        selected.push_back(i);
        found = true;
        break;
      }
    }
    if (!found) {
      throw ValidationError(
          "regularize_instances: pseudo-label instance not found in the "
          "prediction set");
    }
  }
  InstanceSet out;
  out.height = inst.height;
  out.width = inst.width;
  for (std::size_t i :
       regularize_instance_indices(inst, sem, sem_pl, selected, cfg)) {
    out.instances.push_back(inst.instances[i]);
  }
  return out;
}

SemanticLabelMap to_semantic(const InstanceSet& inst, CategoryId void_id) {
  SemanticLabelMap out = make_void_labels(inst.height, inst.width, void_id);
  std::vector<double> best(out.labels.size(), 2.0);
  for (const auto& i : inst.instances) {
    require_same_dims(i.mask.height(), i.mask.width(), inst.height, inst.width,
                      "to_semantic");
    const double e = instance_entropy(i);
    for_each_pixel(i.mask, [&](std::size_t p) {
      if (e < best[p]) {
        best[p] = e;
        out.labels[p] = i.category;
      }
    });
  }
  return out;
}

SemanticLabelMap regularize_semantic(const SemanticProbMap& sem,
                                     const SemanticLabelMap& sem_pl,
                                     const InstanceSet& inst_pl,
                                     CategoryId void_id) {
  require_same_dims(sem.height(), sem.width(), sem_pl.height, sem_pl.width,
                    "regularize_semantic");
  require_same_dims(sem.height(), sem.width(), inst_pl.height, inst_pl.width,
                    "regularize_semantic");
  const EntropyMap sem_entropy = semantic_entropy_map(sem);
  const EntropyMap inst_entropy = instance_entropy_map(inst_pl);
  const SemanticLabelMap inst_labels = to_semantic(inst_pl, void_id);

  SemanticLabelMap out = make_void_labels(sem.height(), sem.width(), void_id);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const double es = sem_entropy.values[i];
    const double ei = inst_entropy.values[i];
    if (es < ei) {
      out.labels[i] = sem_pl.labels[i];
    } else if (ei < es) {
      out.labels[i] = inst_labels.labels[i];
    }
  }
  return out;
}

}  // namespace cvreg
