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

#include "cvreg/panoptic_eval.hpp"

#include <stdexcept>

#include "cvreg/errors.hpp"

namespace cvreg {

SegmentMatching match_segments(const PanopticMap& pred, const PanopticMap& gt,
                               const ClassCatalog& catalog) {
  if (pred.height != gt.height || pred.width != gt.width ||
      pred.segments.size() != gt.segments.size()) {
    throw ValidationError("match_segments: dimension mismatch");
  }
  const CategoryId void_id = catalog.void_id();
  std::map<PanopticLabel, std::size_t> pred_area, gt_area, pred_on_void;
  std::map<std::pair<PanopticLabel, PanopticLabel>, std::size_t> overlap;
  for (std::size_t i = 0; i < pred.segments.size(); ++i) {
    const PanopticLabel p = pred.segments[i];
    const PanopticLabel g = gt.segments[i];
    const bool p_void = p.category == void_id;
    const bool g_void = g.category == void_id;
    if (!p_void) ++pred_area[p];
    if (!g_void) ++gt_area[g];
    if (!p_void && g_void) ++pred_on_void[p];
    if (!p_void && !g_void && p.category == g.category) ++overlap[{g, p}];
  }

  SegmentMatching out;
  std::map<PanopticLabel, bool> pred_matched;
  for (const auto& [g, g_area] : gt_area) {
    bool matched = false;
    auto it = overlap.lower_bound({g, PanopticLabel{0, 0}});
    for (; it != overlap.end() && it->first.first == g; ++it) {
      const PanopticLabel p = it->first.second;
      const std::size_t inter = it->second;
      const std::size_t void_part =
          pred_on_void.count(p) ? pred_on_void.at(p) : 0;
      const std::size_t uni = pred_area.at(p) + g_area - inter - void_part;
      const double iou = static_cast<double>(inter) / static_cast<double>(uni);
      if (iou > kMatchIou) {
        if (matched || pred_matched[p]) {
          throw std::logic_error("match_segments: non-unique match");
        }
        matched = true;
        pred_matched[p] = true;
        out.matches.push_back({p, g, iou});
      }
    }
    if (!matched) out.false_negatives.push_back(g);
  }
  for (const auto& [p, area] : pred_area) {
    if (pred_matched.count(p) && pred_matched.at(p)) continue;
    const std::size_t void_part =
        pred_on_void.count(p) ? pred_on_void.at(p) : 0;
    if (static_cast<double>(void_part) / static_cast<double>(area) > 0.5) {
      out.ignored_pred.push_back(p);
    } else {
      out.false_positives.push_back(p);
    }
  }
  return out;
}

void PQAccumulator::add(const SegmentMatching& matching) {
  for (const auto& m : matching.matches) {
    auto& s = stats_[m.gt.category];
    ++s.tp;
    s.iou_sum += m.iou;
  }
  for (const auto& p : matching.false_positives) ++stats_[p.category].fp;
  for (const auto& g : matching.false_negatives) ++stats_[g.category].fn;
}

void PQAccumulator::merge(const PQAccumulator& other) {
  for (const auto& [c, o] : other.stats_) {
    auto& s = stats_[c];
    s.tp += o.tp;
    s.fp += o.fp;
    s.fn += o.fn;
    s.iou_sum += o.iou_sum;
  }
}

PQReport PQAccumulator::report() const {
  PQReport r;
  for (const auto& [c, s] : stats_) {
    if (s.tp + s.fp + s.fn == 0) continue;
    CategoryQuality q = s;
    if (q.tp > 0) {
      const double tp = static_cast<double>(q.tp);
      q.sq = q.iou_sum / tp;
      q.rq = tp / (tp + 0.5 * static_cast<double>(q.fp) +
                   0.5 * static_cast<double>(q.fn));
      q.pq = q.sq * q.rq;
    }
    r.per_category[c] = q;
  }
  const MeanQuality m = mean_quality(r, [](CategoryId) { return true; });
  r.msq = m.msq;
  r.mrq = m.mrq;
  r.mpq = m.mpq;
  return r;
}

PQReport pq_per_class(const SegmentMatching& matching) {
  PQAccumulator acc;
  acc.add(matching);
  return acc.report();
}

PQReport evaluate_dataset(
    std::span<const std::pair<PanopticMap, PanopticMap>> pred_gt_pairs,
    const ClassCatalog& catalog) {
  if (pred_gt_pairs.empty()) {
    throw ValidationError("evaluate_dataset: empty list of image pairs");
  }
  PQAccumulator acc;
  for (const auto& [pred, gt] : pred_gt_pairs) {
    acc.add(match_segments(pred, gt, catalog));
  }
  return acc.report();
}

MeanQuality mean_quality(const PQReport& report,
                         const std::function<bool(CategoryId)>& keep) {
  MeanQuality m;
  for (const auto& [c, q] : report.per_category) {
    if (!keep(c)) continue;
    m.msq += q.sq;
    m.mrq += q.rq;
    m.mpq += q.pq;
    ++m.categories;
  }
  if (m.categories > 0) {
    const double n = static_cast<double>(m.categories);
    m.msq /= n;
    m.mrq /= n;
    m.mpq /= n;
  }
  return m;
}

}  // namespace cvreg
