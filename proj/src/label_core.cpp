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

#include "cvreg/label_core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "cvreg/errors.hpp"

namespace cvreg {
namespace {

void require_dims(int height, int width, const char* what) {
  if (height <= 0 || width <= 0) {
    throw ValidationError(std::string(what) + ": dimensions must be positive");
  }
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

}  // namespace

ClassCatalog::ClassCatalog(std::vector<Category> categories, CategoryId void_id)
    : categories_(std::move(categories)), void_id_(void_id) {
  if (categories_.empty()) {
    throw ValidationError("catalog: no categories");
  }
  for (std::size_t i = 0; i < categories_.size(); ++i) {
    if (categories_[i].id != i) {
      throw ValidationError("catalog: ids must be contiguous from 0, got id " +
                            std::to_string(categories_[i].id) +
                            " at position " + std::to_string(i));
    }
  }
  if (void_id_ < categories_.size()) {
    throw ValidationError("catalog: void_id " + std::to_string(void_id_) +
                          " collides with a category id");
  }
  if (static_cast<int>(void_id_) * kPanopticLabelDivisor > 65535) {
    throw ValidationError("catalog: void_id " + std::to_string(void_id_) +
                          " does not fit the panoptic u16 encoding");
  }
  if ((categories_.size() - 1) * kPanopticLabelDivisor + kMaxInstanceId >
      65535) {
    throw ValidationError("catalog: too many categories for u16 panoptic ids");
  }
  thing_index_.assign(categories_.size(), -1);
  for (const auto& c : categories_) {
    if (c.is_thing) {
      thing_index_[c.id] = static_cast<int>(thing_ids_.size());
      thing_ids_.push_back(c.id);
    }
  }
}

const Category& ClassCatalog::at(CategoryId id) const {
  if (!contains(id)) {
    throw ValidationError("catalog: unknown category " + std::to_string(id));
  }
  return categories_[id];
}

bool ClassCatalog::is_thing(CategoryId id) const {
  return contains(id) && categories_[id].is_thing;
}

bool ClassCatalog::is_stuff(CategoryId id) const {
  return contains(id) && !categories_[id].is_thing;
}

std::vector<CategoryId> ClassCatalog::stuff_ids() const {
  std::vector<CategoryId> out;
  for (const auto& c : categories_) {
    if (!c.is_thing) out.push_back(c.id);
  }
  return out;
}

int ClassCatalog::thing_index(CategoryId id) const {
  return contains(id) ? thing_index_[id] : -1;
}

void ClassCatalog::require_things_and_stuff() const {
  if (thing_ids_.empty() || thing_ids_.size() == categories_.size()) {
    throw ValidationError(
        "catalog: fusion requires at least one thing and one stuff category");
  }
}

SemanticProbMap::SemanticProbMap(int height, int width, int num_categories,
                                 std::vector<float> probs)
    : height_(height),
      width_(width),
      num_categories_(num_categories),
      probs_(std::move(probs)) {
  require_dims(height, width, "semantic_probs");
  if (num_categories <= 0) {
    throw ValidationError("semantic_probs: need at least one category");
  }
  const std::size_t n = pixels();
  if (probs_.size() != n * num_categories_) {
    throw ValidationError("semantic_probs: expected " +
                          std::to_string(n * num_categories_) +
                          " values, got " + std::to_string(probs_.size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int c = 0; c < num_categories_; ++c) {
      const float v = prob(c, i);
      if (!(v >= 0.0f && v <= 1.0f)) {
        throw ValidationError("semantic_probs: value out of [0,1] at pixel " +
                              std::to_string(i));
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      throw ValidationError("semantic_probs: distribution at pixel " +
                            std::to_string(i) + " sums to " +
                            std::to_string(sum));
    }
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(
      std::count_if(bits.begin(), bits.end(), [](std::uint8_t b) { return b; }));
}

RleMask::RleMask(int height, int width, std::vector<std::uint32_t> runs)
    : height_(height), width_(width), runs_(std::move(runs)) {
  require_dims(height, width, "rle");
  std::uint64_t total = 0;
  for (auto r : runs_) total += r;
  if (runs_.empty() || total != static_cast<std::uint64_t>(height) * width) {
    throw ValidationError("rle: runs sum to " + std::to_string(total) +
                          ", expected " +
                          std::to_string(static_cast<std::uint64_t>(height) *
                                         width));
  }
}

std::size_t RleMask::area() const {
  std::size_t a = 0;
  for (std::size_t i = 1; i < runs_.size(); i += 2) a += runs_[i];
  return a;
}

void validate(const SemanticProbMap& probs, const ClassCatalog& catalog) {
  if (static_cast<std::size_t>(probs.num_categories()) != catalog.size()) {
    throw ValidationError("semantic_probs: " +
                          std::to_string(probs.num_categories()) +
                          " categories, catalog has " +
                          std::to_string(catalog.size()));
  }
}

void validate(const SemanticLabelMap& labels, const ClassCatalog& catalog) {
  require_dims(labels.height, labels.width, "semantic_labels");
  if (labels.labels.size() != labels.pixels()) {
    throw ValidationError("semantic_labels: size does not match dimensions");
  }
  for (std::size_t i = 0; i < labels.labels.size(); ++i) {
    const CategoryId l = labels.labels[i];
    if (l != catalog.void_id() && !catalog.contains(l)) {
      throw ValidationError("semantic_labels: invalid label " +
                            std::to_string(l) + " at pixel " +
                            std::to_string(i));
    }
  }
}

void validate(const Instance& instance, const ClassCatalog& catalog) {
  if (!catalog.is_thing(instance.category)) {
    throw ValidationError("instance: category " +
                          std::to_string(instance.category) +
                          " is not a thing category");
  }
  if (!(instance.score >= 0.0 && instance.score <= 1.0)) {
    throw ValidationError("instance: score out of [0,1]");
  }
  if (instance.mask.area() == 0) {
    throw ValidationError("instance: empty mask");
  }
  if (instance.class_dist) {
    const auto& d = *instance.class_dist;
    if (d.size() != catalog.thing_ids().size() + 1) {
      throw ValidationError("instance: class_dist has " +
                            std::to_string(d.size()) + " entries, expected " +
                            std::to_string(catalog.thing_ids().size() + 1));
    }
    double sum = 0.0;
    for (double v : d) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw ValidationError("instance: class_dist value out of [0,1]");
      }
      sum += v;
    }
    if (std::abs(sum - 1.0) > kProbSumTolerance) {
      throw ValidationError("instance: class_dist sums to " +
                            std::to_string(sum));
    }
    const auto things = d.size() - 1;
    const auto best = static_cast<std::size_t>(
        std::max_element(d.begin(), d.begin() + things) - d.begin());
    if (catalog.thing_ids()[best] != instance.category) {
      throw ValidationError(
          "instance: class_dist argmax disagrees with category");
    }
  }
}

void validate(const InstanceSet& set, const ClassCatalog& catalog) {
  require_dims(set.height, set.width, "instance_set");
  for (std::size_t i = 0; i < set.instances.size(); ++i) {
    const auto& inst = set.instances[i];
    if (inst.mask.height() != set.height || inst.mask.width() != set.width) {
      throw ValidationError("instance_set: mask " + std::to_string(i) +
                            " has mismatched dimensions");
    }
    validate(inst, catalog);
  }
}

void validate(const PanopticMap& map, const ClassCatalog& catalog) {
  require_dims(map.height, map.width, "panoptic");
  if (map.segments.size() != map.pixels()) {
    throw ValidationError("panoptic: size does not match dimensions");
  }
  std::vector<std::pair<std::uint16_t, CategoryId>> owners;
  for (const auto& s : map.segments) {
    if (s.category == catalog.void_id()) {
      if (s.instance != 0) {
        throw ValidationError("panoptic: void pixel with nonzero instance id");
      }
      continue;
    }
    if (!catalog.contains(s.category)) {
      throw ValidationError("panoptic: invalid category " +
                            std::to_string(s.category));
    }
    if (s.instance > kMaxInstanceId) {
      throw ValidationError("panoptic: instance id exceeds encoding range");
    }
    if (s.instance != 0) {
      if (!catalog.is_thing(s.category)) {
        throw ValidationError("panoptic: stuff category with instance id");
      }
      owners.emplace_back(s.instance, s.category);
    }
  }
  std::sort(owners.begin(), owners.end());
  owners.erase(std::unique(owners.begin(), owners.end()), owners.end());
  for (std::size_t i = 1; i < owners.size(); ++i) {
    if (owners[i].first == owners[i - 1].first) {
      throw ValidationError("panoptic: instance id " +
                            std::to_string(owners[i].first) +
                            " used by more than one category");
    }
  }
}

SemanticLabelMap make_void_labels(int height, int width, CategoryId void_id) {
  SemanticLabelMap m;
  m.height = height;
  m.width = width;
  m.labels.assign(m.pixels(), void_id);
  return m;
}

PanopticMap make_void_panoptic(int height, int width, CategoryId void_id) {
  PanopticMap m;
  m.height = height;
  m.width = width;
  m.segments.assign(m.pixels(), PanopticLabel{void_id, 0});
  return m;
}

double normalized_entropy(std::span<const double> dist) {
  if (dist.size() <= 1) return 0.0;
  double h = 0.0;
  for (double p : dist) h -= xlogx(p);
  const double e = h / std::log(static_cast<double>(dist.size()));
  return std::clamp(e, 0.0, 1.0);
}

SemanticLabelMap argmax_label(const SemanticProbMap& probs) {
  SemanticLabelMap out;
  out.height = probs.height();
  out.width = probs.width();
  out.labels.resize(probs.pixels());
  const int c_count = probs.num_categories();
  for (std::size_t i = 0; i < probs.pixels(); ++i) {
    int best = 0;
    float best_p = probs.prob(0, i);
    for (int c = 1; c < c_count; ++c) {
      const float p = probs.prob(c, i);
      if (p > best_p) {
        best = c;
        best_p = p;
      }
    }
    out.labels[i] = static_cast<CategoryId>(best);
  }
  return out;
}

EntropyMap semantic_entropy_map(const SemanticProbMap& probs) {
  EntropyMap out;
  out.height = probs.height();
  out.width = probs.width();
  out.values.resize(probs.pixels());
  const int c_count = probs.num_categories();
  if (c_count == 1) return out;
  const double norm = std::log(static_cast<double>(c_count));
  for (std::size_t i = 0; i < probs.pixels(); ++i) {
    double h = 0.0;
    for (int c = 0; c < c_count; ++c) h -= xlogx(probs.prob(c, i));
    out.values[i] = std::clamp(h / norm, 0.0, 1.0);
  }
  return out;
}

double instance_entropy(const Instance& instance) {
  if (instance.class_dist) return normalized_entropy(*instance.class_dist);
  const double s = instance.score;
  const double pair[2] = {s, 1.0 - s};
  return normalized_entropy(pair);
}

EntropyMap instance_entropy_map(const InstanceSet& set) {
  EntropyMap out;
  out.height = set.height;
  out.width = set.width;
  out.values.assign(static_cast<std::size_t>(set.height) * set.width, 1.0);
  for (const auto& inst : set.instances) {
    const double e = instance_entropy(inst);
    const auto& runs = inst.mask.runs();
    std::size_t pos = 0;
    for (std::size_t r = 0; r < runs.size(); ++r) {
      if (r % 2 == 1) {
        for (std::size_t i = pos; i < pos + runs[r]; ++i) {
          out.values[i] = std::min(out.values[i], e);
        }
      }
      pos += runs[r];
    }
  }
  return out;
}

RleMask rle_encode(const BinaryMask& mask) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::uint8_t b : mask.bits) {
    const std::uint8_t v = b ? 1 : 0;
    if (v != current) {
      runs.push_back(length);
      length = 0;
      current = v;
    }
    ++length;
  }
  runs.push_back(length);
  return RleMask(mask.height, mask.width, std::move(runs));
}

BinaryMask rle_decode(const RleMask& rle) {
  BinaryMask out(rle.height(), rle.width());
  std::size_t pos = 0;
  const auto& runs = rle.runs();
  for (std::size_t r = 0; r < runs.size(); ++r) {
    if (r % 2 == 1) {
      std::fill_n(out.bits.begin() + static_cast<std::ptrdiff_t>(pos),
                  runs[r], std::uint8_t{1});
    }
    pos += runs[r];
  }
  return out;
}

std::size_t rle_intersection_area(const RleMask& a, const RleMask& b) {
  if (a.height() != b.height() || a.width() != b.width()) {
    throw ValidationError("mask_iou: dimension mismatch");
  }
  // Walk both run lists in lockstep over shared breakpoints.
  const auto& ra = a.runs();
  const auto& rb = b.runs();
  std::size_t ia = 0, ib = 0;
  std::uint64_t left_a = ra[0], left_b = rb[0];
  std::size_t inter = 0;
  while (ia < ra.size() && ib < rb.size()) {
    if (left_a == 0) {
      if (++ia < ra.size()) left_a = ra[ia];
      continue;
    }
    if (left_b == 0) {
      if (++ib < rb.size()) left_b = rb[ib];
      continue;
    }
    const std::uint64_t step = std::min(left_a, left_b);
    if ((ia % 2 == 1) && (ib % 2 == 1)) inter += step;
    left_a -= step;
    left_b -= step;
  }
  return inter;
}

double mask_iou(const RleMask& a, const RleMask& b) {
  const std::size_t inter = rle_intersection_area(a, b);
  const std::size_t uni = a.area() + b.area() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

}  // namespace cvreg
