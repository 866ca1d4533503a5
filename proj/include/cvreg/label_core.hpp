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

// Dense label-map and mask types shared by every stage of the pseudo-label
// pipeline, plus the entropy, IoU and run-length primitives built on them.

#ifndef CVREG_LABEL_CORE_HPP_
#define CVREG_LABEL_CORE_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cvreg {

using CategoryId = std::uint16_t;

// Tolerance on the sum of a per-pixel categorical distribution.
inline constexpr double kProbSumTolerance = 1e-5;

// Panoptic u16 encoding stores category * 1000 + instance id.
inline constexpr int kPanopticLabelDivisor = 1000;
inline constexpr int kMaxInstanceId = kPanopticLabelDivisor - 1;

struct Category {
  CategoryId id = 0;
  std::string name;
  bool is_thing = false;

  bool operator==(const Category&) const = default;
};

class ClassCatalog {
 public:
  // Ids must be unique and contiguous from 0 (in order); void_id must not be
  // a category id and must fit the panoptic u16 encoding.
  ClassCatalog(std::vector<Category> categories, CategoryId void_id);

  std::size_t size() const { return categories_.size(); }
  CategoryId void_id() const { return void_id_; }
  const std::vector<Category>& categories() const { return categories_; }
  const Category& at(CategoryId id) const;

  bool contains(CategoryId id) const { return id < categories_.size(); }
  bool is_thing(CategoryId id) const;
  bool is_stuff(CategoryId id) const;

  // Thing categories in ascending id order. This order also defines the
  // layout of Instance::class_dist (thing entries, then background).
  const std::vector<CategoryId>& thing_ids() const { return thing_ids_; }
  std::vector<CategoryId> stuff_ids() const;
  // Position of a thing category inside class_dist, or -1 for stuff.
  int thing_index(CategoryId id) const;

  // Fusion needs both kinds of category.
  void require_things_and_stuff() const;

  bool operator==(const ClassCatalog&) const = default;

 private:
  std::vector<Category> categories_;
  CategoryId void_id_;
  std::vector<CategoryId> thing_ids_;
  std::vector<int> thing_index_;
};

// Per-pixel categorical distributions, stored category-major: the value for
// category c at pixel i lives at c * height * width + i.
class SemanticProbMap {
 public:
  SemanticProbMap(int height, int width, int num_categories,
                  std::vector<float> probs);

  int height() const { return height_; }
  int width() const { return width_; }
  int num_categories() const { return num_categories_; }
  std::size_t pixels() const {
    return static_cast<std::size_t>(height_) * width_;
  }
  float prob(int category, std::size_t pixel) const {
    return probs_[static_cast<std::size_t>(category) * pixels() + pixel];
  }
  std::span<const float> data() const { return probs_; }

  bool operator==(const SemanticProbMap&) const = default;

 private:
  int height_;
  int width_;
  int num_categories_;
  std::vector<float> probs_;
};

struct SemanticLabelMap {
  int height = 0;
  int width = 0;
  std::vector<CategoryId> labels;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool operator==(const SemanticLabelMap&) const = default;
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;

  BinaryMask() = default;
  BinaryMask(int h, int w)
      : height(h), width(w), bits(static_cast<std::size_t>(h) * w, 0) {}

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  std::size_t count() const;
  bool operator==(const BinaryMask&) const = default;
};

// Row-major run lengths alternating zero-runs and one-runs, always starting
// with a (possibly empty) zero-run.
class RleMask {
 public:
  RleMask() = default;
  RleMask(int height, int width, std::vector<std::uint32_t> runs);

  int height() const { return height_; }
  int width() const { return width_; }
  const std::vector<std::uint32_t>& runs() const { return runs_; }
  std::size_t area() const;

  bool operator==(const RleMask&) const = default;

 private:
  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint32_t> runs_;
};

struct Instance {
  CategoryId category = 0;
  double score = 0.0;
  // Thing categories in catalog order followed by background.
  std::optional<std::vector<double>> class_dist;
  RleMask mask;

  bool operator==(const Instance&) const = default;
};

struct InstanceSet {
  int height = 0;
  int width = 0;
  std::vector<Instance> instances;

  bool operator==(const InstanceSet&) const = default;
};

struct PanopticLabel {
  CategoryId category = 0;
  std::uint16_t instance = 0;

  auto operator<=>(const PanopticLabel&) const = default;
};

struct PanopticMap {
  int height = 0;
  int width = 0;
  std::vector<PanopticLabel> segments;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  bool operator==(const PanopticMap&) const = default;
};

struct EntropyMap {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  bool operator==(const EntropyMap&) const = default;
};

// Invariant checks; each throws ValidationError naming the violation.
void validate(const SemanticProbMap& probs, const ClassCatalog& catalog);
void validate(const SemanticLabelMap& labels, const ClassCatalog& catalog);
void validate(const Instance& instance, const ClassCatalog& catalog);
void validate(const InstanceSet& set, const ClassCatalog& catalog);
void validate(const PanopticMap& map, const ClassCatalog& catalog);

SemanticLabelMap make_void_labels(int height, int width, CategoryId void_id);
PanopticMap make_void_panoptic(int height, int width, CategoryId void_id);

// Shannon entropy divided by ln(n) for a distribution of n entries, with
// 0 * ln 0 taken as 0. A single-entry distribution has entropy 0.
double normalized_entropy(std::span<const double> dist);

SemanticLabelMap argmax_label(const SemanticProbMap& probs);

EntropyMap semantic_entropy_map(const SemanticProbMap& probs);

// Normalized entropy of class_dist when present, otherwise the Bernoulli
// entropy of (score, 1 - score) over ln 2.
double instance_entropy(const Instance& instance);

// Per pixel minimum instance entropy over covering instances; 1 where no
// instance covers the pixel.
EntropyMap instance_entropy_map(const InstanceSet& set);

RleMask rle_encode(const BinaryMask& mask);
BinaryMask rle_decode(const RleMask& rle);

std::size_t rle_intersection_area(const RleMask& a, const RleMask& b);
double mask_iou(const RleMask& a, const RleMask& b);

}  // namespace cvreg

#endif  // CVREG_LABEL_CORE_HPP_
