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

// Panoptic quality. A predicted and a ground-truth segment match when they
// share a category and their IoU exceeds 0.5; with that threshold a segment
// can match at most one counterpart, so no assignment problem arises.
//
//   SQ = sum of matched IoUs / |TP|
//   RQ = |TP| / (|TP| + |FP| / 2 + |FN| / 2)
//   PQ = SQ * RQ
//
// Ground-truth void pixels are excluded from IoU, and a predicted segment
// lying mostly (> 50%) on ground-truth void is ignored rather than counted
// as a false positive. Stuff forms one segment per category and image.

#ifndef CVREG_PANOPTIC_EVAL_HPP_
#define CVREG_PANOPTIC_EVAL_HPP_

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cvreg/label_core.hpp"

namespace cvreg {

inline constexpr double kMatchIou = 0.5;

struct SegmentMatch {
  PanopticLabel pred;
  PanopticLabel gt;
  double iou = 0.0;
};

struct SegmentMatching {
  std::vector<SegmentMatch> matches;        // ascending gt label
  std::vector<PanopticLabel> false_positives;  // ascending label
  std::vector<PanopticLabel> false_negatives;  // ascending label
  std::vector<PanopticLabel> ignored_pred;  // mostly over ground-truth void
};

SegmentMatching match_segments(const PanopticMap& pred, const PanopticMap& gt,
                               const ClassCatalog& catalog);

struct CategoryQuality {
  double sq = 0.0;
  double rq = 0.0;
  double pq = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double iou_sum = 0.0;

  bool operator==(const CategoryQuality&) const = default;
};

struct PQReport {
  // Only categories with at least one TP, FP or FN.
  std::map<CategoryId, CategoryQuality> per_category;
  double msq = 0.0;
  double mrq = 0.0;
  double mpq = 0.0;

  bool operator==(const PQReport&) const = default;
};

// Merges per-image matchings by summing counts, then derives qualities.
class PQAccumulator {
 public:
  void add(const SegmentMatching& matching);
  void merge(const PQAccumulator& other);
  PQReport report() const;

 private:
  std::map<CategoryId, CategoryQuality> stats_;
};

PQReport pq_per_class(const SegmentMatching& matching);

PQReport evaluate_dataset(
    std::span<const std::pair<PanopticMap, PanopticMap>> pred_gt_pairs,
    const ClassCatalog& catalog);

// Means over the categories of `report` accepted by `keep`; zeros when none.
struct MeanQuality {
  double msq = 0.0;
  double mrq = 0.0;
  double mpq = 0.0;
  std::size_t categories = 0;
};
MeanQuality mean_quality(const PQReport& report,
                         const std::function<bool(CategoryId)>& keep);

}  // namespace cvreg

#endif  // CVREG_PANOPTIC_EVAL_HPP_
