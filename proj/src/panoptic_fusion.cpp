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

#include "cvreg/panoptic_fusion.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "cvreg/errors.hpp"

namespace cvreg {

void FusionConfig::validate() const {
  if (!(instance_score_min >= 0.0 && instance_score_min <= 1.0)) {
    throw ValidationError("fusion: instance_score_min must be in [0,1]");
  }
  if (!(overlap_keep_fraction > 0.0 && overlap_keep_fraction <= 1.0)) {
    throw ValidationError("fusion: overlap_keep_fraction must be in (0,1]");
  }
}

PanopticMap fuse_panoptic(const InstanceSet& inst, const SemanticLabelMap& sem,
                          const FusionConfig& cfg, const ClassCatalog& catalog) {
  cfg.validate();
  catalog.require_things_and_stuff();
  if (inst.height != sem.height || inst.width != sem.width) {
    throw ValidationError("fuse_panoptic: dimension mismatch");
  }
  PanopticMap out = make_void_panoptic(sem.height, sem.width, catalog.void_id());
  const std::size_t n = out.pixels();

  std::vector<std::size_t> order;
  std::vector<std::size_t> areas(inst.instances.size());
  for (std::size_t i = 0; i < inst.instances.size(); ++i) {
    const auto& m = inst.instances[i].mask;
    if (m.height() != sem.height || m.width() != sem.width) {
      throw ValidationError("fuse_panoptic: instance mask dimension mismatch");
    }
    areas[i] = m.area();
    if (inst.instances[i].score >= cfg.instance_score_min && areas[i] > 0) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     const double sa = inst.instances[a].score;
                     const double sb = inst.instances[b].score;
                     if (sa != sb) return sa > sb;
                     return areas[a] > areas[b];
                   });

  std::vector<bool> claimed(n, false);
  std::vector<std::size_t> free_pixels;
  std::uint16_t next_id = 1;
  for (std::size_t idx : order) {
    const auto& instance = inst.instances[idx];
    free_pixels.clear();
    const auto& runs = instance.mask.runs();
    std::size_t pos = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (r % 2 == 1) {
        for (std::size_t p = pos; p < pos + runs[r]; ++p) {
          if (!claimed[p]) free_pixels.push_back(p);
        }
      }
      pos += runs[r];
    }
    const double free_fraction = static_cast<double>(free_pixels.size()) /
                                 static_cast<double>(areas[idx]);
    if (free_fraction < cfg.overlap_keep_fraction) continue;
    if (next_id > kMaxInstanceId) {
      throw ValidationError("fuse_panoptic: more than " +
                            std::to_string(kMaxInstanceId) +
                            " instances survive fusion");
    }
    for (std::size_t p : free_pixels) {
      claimed[p] = true;
      out.segments[p] = PanopticLabel{instance.category, next_id};
    }
    ++next_id;
  }

  std::vector<std::size_t> stuff_area(catalog.size(), 0);
  for (std::size_t p = 0; p < n; ++p) {
    if (!claimed[p] && catalog.is_stuff(sem.labels[p])) {
      ++stuff_area[sem.labels[p]];
    }
  }
  for (std::size_t p = 0; p < n; ++p) {
    if (claimed[p]) continue;
    const CategoryId c = sem.labels[p];
    if (catalog.is_stuff(c) && stuff_area[c] >= cfg.stuff_min_area) {
      out.segments[p] = PanopticLabel{c, 0};
    }
  }
  return out;
}

}  // namespace cvreg
