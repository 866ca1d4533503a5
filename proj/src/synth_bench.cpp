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

#include "cvreg/synth_bench.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cvreg/errors.hpp"
#include "cvreg/random.hpp"

namespace cvreg {
namespace {

constexpr std::uint64_t kSceneStream = 1;
constexpr std::uint64_t kSemanticStream = 2;
constexpr std::uint64_t kInstanceStream = 3;
constexpr int kPlacementAttempts = 500;
constexpr int kThingGap = 2;

// Peak-mass skew: correct pixels lean towards a confident peak, wrong pixels
// towards a hesitant one, so confidence carries information about accuracy.
constexpr double kCorrectPeakExponent = 0.5;
constexpr double kWrongPeakExponent = 2.0;

struct Box {
  int top, left, height, width;
};

bool inside_shape(const Box& b, ThingShape shape, int y, int x) {
  if (y < b.top || y >= b.top + b.height || x < b.left || x >= b.left + b.width) {
    return false;
  }
  if (shape == ThingShape::kRectangle) return true;
  const double cy = b.top + (b.height - 1) / 2.0;
  const double cx = b.left + (b.width - 1) / 2.0;
  const double ry = b.height / 2.0;
  const double rx = b.width / 2.0;
  const double dy = (y - cy) / ry;
  const double dx = (x - cx) / rx;
  return dy * dy + dx * dx <= 1.0;
}

int min_thing_size(const SceneSpec& spec) {
  return std::max(8, std::min(spec.height, spec.width) / 8);
}

int max_thing_size(const SceneSpec& spec) {
  return std::max(min_thing_size(spec), std::min(spec.height, spec.width) / 4);
}

int placement_margin(const SceneSpec& spec) {
  return jitter_radius_bound(spec.noise.instance_boundary_jitter) + 1;
}

Box random_box(Rng& rng, const SceneSpec& spec) {
  const int lo = min_thing_size(spec);
  const int hi = max_thing_size(spec);
  const int margin = placement_margin(spec);
  Box b{};
  b.height = static_cast<int>(rng.uniform_int(lo, hi));
  b.width = static_cast<int>(rng.uniform_int(lo, hi));
  const int max_top = spec.height - margin - b.height;
  const int max_left = spec.width - margin - b.width;
  if (max_top < margin || max_left < margin) {
    throw ValidationError("generate_scene: image too small for things");
  }
  b.top = static_cast<int>(rng.uniform_int(margin, max_top));
  b.left = static_cast<int>(rng.uniform_int(margin, max_left));
  return b;
}

bool boxes_clear(const Box& a, const Box& b) {
  return a.top + a.height + kThingGap <= b.top ||
         b.top + b.height + kThingGap <= a.top ||
         a.left + a.width + kThingGap <= b.left ||
         b.left + b.width + kThingGap <= a.left;
}

std::array<int, 3> base_color(CategoryId category) {
  const std::uint64_t h = splitmix64(0xc01012ULL + category);
  return {static_cast<int>(40 + h % 176), static_cast<int>(40 + (h >> 8) % 176),
          static_cast<int>(40 + (h >> 16) % 176)};
}

BinaryMask shape_mask(const Box& b, ThingShape shape, int height, int width) {
  BinaryMask m(height, width);
  for (int y = b.top; y < b.top + b.height; ++y) {
    for (int x = b.left; x < b.left + b.width; ++x) {
      if (inside_shape(b, shape, y, x)) {
        m.bits[static_cast<std::size_t>(y) * width + x] = 1;
      }
    }
  }
  return m;
}

}  // namespace

void SceneSpec::validate() const {
  if (height < 16 || width < 16) {
    throw ValidationError("scene: dimensions must be at least 16");
  }
  if (n_stuff_regions < 1) {
    throw ValidationError("scene: need at least one stuff region");
  }
  if (n_things < 0) {
    throw ValidationError("scene: n_things must be nonnegative");
  }
  const double values[] = {noise.semantic_stuff_acc, noise.semantic_thing_acc,
                           noise.instance_thing_recall,
                           noise.instance_score_noise,
                           noise.instance_boundary_jitter};
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("scene: noise parameters must be in [0,1]");
    }
  }
}

ClassCatalog default_catalog() {
  return ClassCatalog({{0, "road", false},
                       {1, "sidewalk", false},
                       {2, "building", false},
                       {3, "vegetation", false},
                       {4, "sky", false},
                       {5, "person", true},
                       {6, "rider", true},
                       {7, "car", true}},
                      8);
}

int jitter_radius_bound(double jitter) {
  return static_cast<int>(std::lround(jitter * 10.0));
}

BinaryMask dilate_or_erode(const BinaryMask& mask, int radius) {
  if (radius == 0) return mask;
  const int h = mask.height;
  const int w = mask.width;
  const int r = std::abs(radius);
  // Dilation is a box max; erosion is a box min with background outside.
  const bool dilate = radius > 0;
  auto pass = [&](const std::vector<std::uint8_t>& in, bool rows) {
    std::vector<std::uint8_t> out(in.size());
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        std::uint8_t acc = dilate ? 0 : 1;
        for (int d = -r; d <= r; ++d) {
          const int yy = rows ? y : y + d;
          const int xx = rows ? x + d : x;
          std::uint8_t v = 0;
          if (yy >= 0 && yy < h && xx >= 0 && xx < w) {
            v = in[static_cast<std::size_t>(yy) * w + xx] ? 1 : 0;
          }
          acc = dilate ? (acc | v) : (acc & v);
        }
        out[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
    return out;
  };
  BinaryMask out = mask;
  out.bits = pass(pass(mask.bits, true), false);
  return out;
}

Scene generate_scene(const SceneSpec& spec, const ClassCatalog& catalog) {
  spec.validate();
  catalog.require_things_and_stuff();
  auto stuff = catalog.stuff_ids();
  const auto& things = catalog.thing_ids();
  if (static_cast<std::size_t>(spec.n_stuff_regions) > stuff.size()) {
    throw ValidationError("generate_scene: more stuff regions than stuff "
                          "categories");
  }
  if (spec.n_stuff_regions > spec.height / 2) {
    throw ValidationError("generate_scene: too many stuff bands");
  }
  Rng rng(derive_seed(spec.rng_seed, 0, kSceneStream));

  for (std::size_t i = stuff.size(); i > 1; --i) {
    std::swap(stuff[i - 1], stuff[static_cast<std::size_t>(
                                rng.uniform_int(0, static_cast<std::int64_t>(i) - 1))]);
  }

  // Band heights: an even split, each boundary nudged by up to a quarter band.
  const int n = spec.n_stuff_regions;
  std::vector<int> cuts{0};
  const double band = static_cast<double>(spec.height) / n;
  for (int b = 1; b < n; ++b) {
    const double jitter = rng.uniform(-0.25, 0.25) * band;
    cuts.push_back(static_cast<int>(std::lround(b * band + jitter)));
  }
  cuts.push_back(spec.height);

  Scene scene;
  scene.gt = make_void_panoptic(spec.height, spec.width, catalog.void_id());
  for (int b = 0; b < n; ++b) {
    for (int y = cuts[b]; y < cuts[b + 1]; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        scene.gt.segments[static_cast<std::size_t>(y) * spec.width + x] =
            PanopticLabel{stuff[b], 0};
      }
    }
  }

  std::vector<Box> placed;
  for (int t = 0; t < spec.n_things; ++t) {
    bool ok = false;
    Box box{};
    for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
      box = random_box(rng, spec);
      ok = std::all_of(placed.begin(), placed.end(),
                       [&](const Box& o) { return boxes_clear(box, o); });
    }
    if (!ok) {
      throw ValidationError("generate_scene: could not place thing " +
                            std::to_string(t + 1) + " without overlap");
    }
    placed.push_back(box);
    const CategoryId category = things[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<std::int64_t>(things.size()) - 1))];
    const auto id = static_cast<std::uint16_t>(t + 1);
    for (int y = box.top; y < box.top + box.height; ++y) {
      for (int x = box.left; x < box.left + box.width; ++x) {
        if (inside_shape(box, spec.thing_shape, y, x)) {
          scene.gt.segments[static_cast<std::size_t>(y) * spec.width + x] =
              PanopticLabel{category, id};
        }
      }
    }
  }
  for (int b = 0; b < n; ++b) {
    const PanopticLabel label{stuff[b], 0};
    if (std::find(scene.gt.segments.begin(), scene.gt.segments.end(), label) ==
        scene.gt.segments.end()) {
      throw ValidationError("generate_scene: a stuff band is fully occluded");
    }
  }

  scene.image.height = spec.height;
  scene.image.width = spec.width;
  scene.image.samples.resize(scene.gt.pixels() * 3);
  for (std::size_t i = 0; i < scene.gt.pixels(); ++i) {
    const PanopticLabel s = scene.gt.segments[i];
    const auto color = base_color(s.category);
    const int shade = s.instance == 0 ? 0 : static_cast<int>((s.instance * 37) % 41) - 20;
    for (int c = 0; c < 3; ++c) {
      const int noise = static_cast<int>(rng.uniform_int(-12, 12));
      scene.image.samples[3 * i + c] =
          static_cast<std::uint8_t>(std::clamp(color[c] + shade + noise, 0, 255));
    }
  }
  return scene;
}

SemanticProbMap simulate_semantic_predictor(const PanopticMap& gt,
                                            const SceneSpec& spec,
                                            const ClassCatalog& catalog,
                                            std::uint64_t view) {
  spec.validate();
  Rng rng(derive_seed(spec.rng_seed, view, kSemanticStream));
  const int c_count = static_cast<int>(catalog.size());
  const std::size_t n = gt.pixels();
  std::vector<float> probs(n * c_count, 0.0f);
  std::vector<double> dist(c_count);
  for (std::size_t i = 0; i < n; ++i) {
    const CategoryId truth = gt.segments[i].category;
    const bool known = catalog.contains(truth);
    const double acc = catalog.is_thing(truth) ? spec.noise.semantic_thing_acc
                                               : spec.noise.semantic_stuff_acc;
    const bool correct = known && rng.bernoulli(acc);
    int peak;
    if (correct) {
      peak = truth;
    } else if (known && c_count > 1) {
      peak = static_cast<int>(rng.uniform_int(0, c_count - 2));
      if (peak >= truth) ++peak;
    } else {
      peak = static_cast<int>(rng.uniform_int(0, c_count - 1));
    }
    const double exponent = correct ? kCorrectPeakExponent : kWrongPeakExponent;
    const double mass =
        c_count == 1 ? 1.0
                     : 0.5 + 0.5 * std::pow(rng.uniform_open_closed(), exponent);
    double rest = 0.0;
    for (int c = 0; c < c_count; ++c) {
      dist[c] = c == peak ? 0.0 : rng.uniform_open_closed();
      rest += dist[c];
    }
    for (int c = 0; c < c_count; ++c) {
      const double v = c == peak ? mass : (1.0 - mass) * dist[c] / rest;
      probs[static_cast<std::size_t>(c) * n + i] = static_cast<float>(v);
    }
  }
  return SemanticProbMap(gt.height, gt.width, c_count, std::move(probs));
}

namespace {

// The score on the instance's own entry, the rest spread evenly over the
// other thing entries and background. Left out when that would not peak on
// the instance's category.
std::optional<std::vector<double>> peaked_class_dist(
    CategoryId category, double score, const ClassCatalog& catalog) {
  const std::size_t entries = catalog.thing_ids().size() + 1;
  const double other = (1.0 - score) / static_cast<double>(entries - 1);
  if (!(score > other)) return std::nullopt;
  std::vector<double> dist(entries, other);
  dist[static_cast<std::size_t>(catalog.thing_index(category))] = score;
  return dist;
}

}  // namespace

InstanceSet simulate_instance_predictor(const PanopticMap& gt,
                                        const SceneSpec& spec,
                                        const ClassCatalog& catalog,
                                        std::uint64_t view) {
  spec.validate();
  Rng rng(derive_seed(spec.rng_seed, view, kInstanceStream));
  const auto& things = catalog.thing_ids();
  const int bound = jitter_radius_bound(spec.noise.instance_boundary_jitter);
  const double recall = spec.noise.instance_thing_recall;
  const double fp_rate = (1.0 - recall) / 2.0;

  std::map<PanopticLabel, BinaryMask> gt_things;
  for (std::size_t i = 0; i < gt.pixels(); ++i) {
    const PanopticLabel s = gt.segments[i];
    if (s.instance == 0 || !catalog.is_thing(s.category)) continue;
    auto it = gt_things.find(s);
    if (it == gt_things.end()) {
      it = gt_things.emplace(s, BinaryMask(gt.height, gt.width)).first;
    }
    it->second.bits[i] = 1;
  }

  InstanceSet out;
  out.height = gt.height;
  out.width = gt.width;
  for (const auto& [label, mask] : gt_things) {
    if (rng.bernoulli(recall)) {
      const int radius = static_cast<int>(rng.uniform_int(-bound, bound));
      BinaryMask jittered = dilate_or_erode(mask, radius);
      if (jittered.count() == 0) jittered = mask;
      Instance inst;
      inst.category = label.category;
      inst.score = 1.0 - rng.uniform() * spec.noise.instance_score_noise;
      inst.class_dist = peaked_class_dist(inst.category, inst.score, catalog);
      inst.mask = rle_encode(jittered);
      out.instances.push_back(std::move(inst));
    }
    if (rng.bernoulli(fp_rate)) {
      const Box box = random_box(rng, spec);
      Instance fp;
      fp.category = things[static_cast<std::size_t>(
          rng.uniform_int(0, static_cast<std::int64_t>(things.size()) - 1))];
      fp.score =
          1.0 - rng.uniform() * std::min(1.0, 2.0 * spec.noise.instance_score_noise);
      fp.class_dist = peaked_class_dist(fp.category, fp.score, catalog);
      fp.mask = rle_encode(shape_mask(box, spec.thing_shape, gt.height, gt.width));
      out.instances.push_back(std::move(fp));
    }
  }
  return out;
}

PanopticMap panoptic_from_semantic(const SemanticLabelMap& labels,
                                   const ClassCatalog& catalog) {
  PanopticMap out =
      make_void_panoptic(labels.height, labels.width, catalog.void_id());
  const int h = labels.height;
  const int w = labels.width;
  std::vector<bool> seen(out.pixels(), false);
  std::vector<std::size_t> stack;
  int next_id = 1;
  for (std::size_t start = 0; start < out.pixels(); ++start) {
    const CategoryId c = labels.labels[start];
    if (catalog.is_stuff(c)) {
      out.segments[start] = PanopticLabel{c, 0};
      continue;
    }
    if (!catalog.is_thing(c) || seen[start]) continue;
    const bool assign = next_id <= kMaxInstanceId;
    const auto id = static_cast<std::uint16_t>(assign ? next_id++ : 0);
    stack.assign(1, start);
    seen[start] = true;
    while (!stack.empty()) {
      const std::size_t p = stack.back();
      stack.pop_back();
      if (assign) out.segments[p] = PanopticLabel{c, id};
      const int y = static_cast<int>(p / w);
      const int x = static_cast<int>(p % w);
      const int ny[4] = {y - 1, y + 1, y, y};
      const int nx[4] = {x, x, x - 1, x + 1};
      for (int k = 0; k < 4; ++k) {
        if (ny[k] < 0 || ny[k] >= h || nx[k] < 0 || nx[k] >= w) continue;
        const std::size_t q = static_cast<std::size_t>(ny[k]) * w + nx[k];
        if (!seen[q] && labels.labels[q] == c) {
          seen[q] = true;
          stack.push_back(q);
        }
      }
    }
  }
  return out;
}

}  // namespace cvreg
