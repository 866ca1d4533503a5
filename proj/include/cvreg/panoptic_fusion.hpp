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

#ifndef CVREG_PANOPTIC_FUSION_HPP_
#define CVREG_PANOPTIC_FUSION_HPP_

#include <cstddef>

#include "cvreg/label_core.hpp"

namespace cvreg {

struct FusionConfig {
  double instance_score_min = 0.5;     // in [0, 1]
  double overlap_keep_fraction = 0.5;  // in (0, 1]
  std::size_t stuff_min_area = 2048;   // pixels

  void validate() const;
  bool operator==(const FusionConfig&) const = default;
};

// Greedy things-then-stuff fusion.
//
// Instances scoring below instance_score_min are dropped. The rest are
// pasted in descending score order (larger mask first, then input order, on
// ties); each claims its still-unclaimed pixels and is discarded when fewer
// than overlap_keep_fraction of its pixels were unclaimed. Survivors get ids
// 1, 2, ... in paste order. Remaining pixels take their semantic label when
// it is a stuff category whose remaining area reaches stuff_min_area, and
// are void otherwise.
PanopticMap fuse_panoptic(const InstanceSet& inst, const SemanticLabelMap& sem,
                          const FusionConfig& cfg, const ClassCatalog& catalog);

}  // namespace cvreg

#endif  // CVREG_PANOPTIC_FUSION_HPP_
