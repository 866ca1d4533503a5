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


#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "cvreg/errors.hpp"
#include "cvreg/label_core.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace cvreg;
using namespace cvreg::testing;

namespace {

SemanticProbMap pixel(std::vector<float> p) {
  const int c = static_cast<int>(p.size());
  return SemanticProbMap(1, 1, c, std::move(p));
}

RleMask rect_mask(int h, int w, int y0, int x0, int y1, int x1) {
  BinaryMask m(h, w);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) m.bits[static_cast<std::size_t>(y) * w + x] = 1;
  }
  return rle_encode(m);
}

}  // namespace

TEST_CASE("catalog rejects bad ids") {
  CHECK_THROWS_AS(ClassCatalog({{1, "a", false}}, 5), ValidationError);
  CHECK_THROWS_AS(ClassCatalog({{0, "a", false}}, 0), ValidationError);
  CHECK_THROWS_AS(ClassCatalog({{0, "a", false}}, 70), ValidationError);
  ClassCatalog ok({{0, "road", false}, {1, "car", true}}, 2);
  CHECK(ok.is_thing(1));
  CHECK(ok.is_stuff(0));
  CHECK_FALSE(ok.is_thing(2));
  CHECK(ok.thing_index(1) == 0);
  CHECK(ok.thing_index(0) == -1);
  CHECK_THROWS_AS(ClassCatalog({{0, "road", false}}, 1).require_things_and_stuff(),
                  ValidationError);
}

TEST_CASE("probability maps are checked on construction") {
  CHECK_THROWS_AS(pixel({0.7f, 0.2f}), ValidationError);
  CHECK_THROWS_AS(SemanticProbMap(1, 2, 2, {0.5f, 0.5f, 0.5f}), ValidationError);
  CHECK_NOTHROW(pixel({0.7f, 0.3f}));
}

TEST_CASE("argmax examples") {
  CHECK(argmax_label(pixel({0.7f, 0.3f})).labels[0] == 0);
  CHECK(argmax_label(pixel({0.5f, 0.5f})).labels[0] == 0);
  CHECK(argmax_label(pixel({0.2f, 0.4f, 0.4f})).labels[0] == 1);
}

TEST_CASE("argmax matches a per-pixel scan and survives monotone rescaling") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int c = static_cast<int>(rng.uniform_int(2, 5));
    const SemanticProbMap p = random_probs(rng, 2, 2, c);
    const SemanticLabelMap l = argmax_label(p);
    for (std::size_t i = 0; i < p.pixels(); ++i) {
      int best = 0;
      for (int k = 1; k < c; ++k) {
        if (p.prob(k, i) > p.prob(best, i)) best = k;
      }
      REQUIRE(l.labels[i] == best);
    }
    // Squaring is strictly monotone on [0, 1]; renormalize and recheck.
    std::vector<float> sq(p.data().begin(), p.data().end());
    for (std::size_t i = 0; i < p.pixels(); ++i) {
      double sum = 0.0;
      for (int k = 0; k < c; ++k) {
        const double v = static_cast<double>(p.prob(k, i));
        sum += v * v;
      }
      for (int k = 0; k < c; ++k) {
        const double v = static_cast<double>(p.prob(k, i));
        sq[static_cast<std::size_t>(k) * p.pixels() + i] =
            static_cast<float>(v * v / sum);
      }
    }
    const SemanticProbMap q(2, 2, c, sq);
    const SemanticLabelMap lq = argmax_label(q);
    for (std::size_t i = 0; i < p.pixels(); ++i) {
      // Only compare pixels where the maximum is not tied after rounding.
      int ties = 0;
      for (int k = 0; k < c; ++k) ties += q.prob(k, i) == q.prob(lq.labels[i], i);
      if (ties == 1) CHECK(lq.labels[i] == l.labels[i]);
    }
  }
}

TEST_CASE("semantic entropy examples") {
  CHECK(semantic_entropy_map(pixel({1.0f, 0.0f, 0.0f})).values[0] == 0.0);
  CHECK(semantic_entropy_map(pixel({0.25f, 0.25f, 0.25f, 0.25f})).values[0] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(semantic_entropy_map(pixel({0.2f, 0.2f, 0.2f, 0.2f, 0.2f})).values[0] ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(semantic_entropy_map(pixel({0.5f, 0.5f, 0.0f, 0.0f})).values[0] ==
        doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("entropy properties") {
  Rng rng(12);
  for (int trial = 0; trial < 300; ++trial) {
    const int c = static_cast<int>(rng.uniform_int(2, 6));
    const SemanticProbMap p = random_probs(rng, 3, 3, c);
    const EntropyMap e = semantic_entropy_map(p);
    for (std::size_t i = 0; i < p.pixels(); ++i) {
      REQUIRE(e.values[i] >= 0.0);
      REQUIRE(e.values[i] <= 1.0);
      REQUIRE(e.values[i] == doctest::Approx(oracle_pixel_entropy(p, i)).epsilon(1e-12));
      // Reversing the categories permutes the distribution.
      std::vector<double> rev = pixel_dist(p, i);
      std::reverse(rev.begin(), rev.end());
      REQUIRE(normalized_entropy(rev) ==
              doctest::Approx(e.values[i]).epsilon(1e-12));
    }
  }
  for (int c = 2; c < 8; ++c) {
    std::vector<double> one_hot(static_cast<std::size_t>(c), 0.0);
    one_hot[static_cast<std::size_t>(c / 2)] = 1.0;
    CHECK(normalized_entropy(one_hot) == 0.0);
  }
}

TEST_CASE("instance entropy examples") {
  Instance i;
  i.category = 1;
  i.mask = rect_mask(2, 2, 0, 0, 1, 1);
  i.score = 1.0;
  CHECK(instance_entropy(i) == 0.0);
  i.score = 0.5;
  CHECK(instance_entropy(i) == doctest::Approx(1.0).epsilon(1e-12));
  i.class_dist = std::vector<double>{0.25, 0.25, 0.25, 0.25};
  CHECK(instance_entropy(i) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("instance entropy map examples") {
  InstanceSet empty{4, 4, {}};
  for (double v : instance_entropy_map(empty).values) CHECK(v == 1.0);

  InstanceSet full{4, 4, {}};
  Instance a;
  a.category = 1;
  a.score = 1.0;
  a.mask = rect_mask(4, 4, 0, 0, 4, 4);
  full.instances.push_back(a);
  for (double v : instance_entropy_map(full).values) CHECK(v == 0.0);

  // Entropies 0.3 and 0.6 via class_dist over two entries.
  auto dist_with_entropy = [](double target) {
    double lo = 0.5, hi = 1.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (normalized_entropy(std::vector<double>{mid, 1.0 - mid}) > target ? lo : hi) = mid;
    }
    return std::vector<double>{lo, 1.0 - lo};
  };
  InstanceSet two{4, 4, {}};
  Instance b;
  b.category = 1;
  b.score = 0.9;
  b.class_dist = dist_with_entropy(0.3);
  b.mask = rect_mask(4, 4, 0, 0, 2, 4);
  Instance c = b;
  c.class_dist = dist_with_entropy(0.6);
  c.mask = rect_mask(4, 4, 1, 0, 4, 4);
  two.instances = {c, b};
  const EntropyMap e = instance_entropy_map(two);
  CHECK(e.values[4] == doctest::Approx(0.3).epsilon(1e-9));   // row 1: overlap
  CHECK(e.values[0] == doctest::Approx(0.3).epsilon(1e-9));   // only b
  CHECK(e.values[12] == doctest::Approx(0.6).epsilon(1e-9));  // only c
}

TEST_CASE("mask iou examples") {
  const RleMask a = rect_mask(8, 8, 0, 0, 4, 4);
  CHECK(mask_iou(a, a) == 1.0);
  CHECK(mask_iou(a, rect_mask(8, 8, 4, 4, 8, 8)) == 0.0);
  // 16 px each, sharing 12.
  const RleMask b = rect_mask(8, 8, 1, 0, 5, 4);
  CHECK(mask_iou(a, b) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(mask_iou(rect_mask(8, 8, 0, 0, 0, 0), rect_mask(8, 8, 0, 0, 0, 0)) == 0.0);
  CHECK_THROWS_AS(mask_iou(a, rect_mask(4, 4, 0, 0, 1, 1)), ValidationError);
}

TEST_CASE("mask iou properties") {
  Rng rng(13);
  for (int trial = 0; trial < 500; ++trial) {
    const RleMask a = rle_encode(random_bits(rng, 6, 7, rng.uniform()));
    const RleMask b = rle_encode(random_bits(rng, 6, 7, rng.uniform()));
    REQUIRE(mask_iou(a, b) == mask_iou(b, a));
    REQUIRE(mask_iou(a, b) == doctest::Approx(oracle_iou(a, b)).epsilon(1e-15));
    REQUIRE(rle_intersection_area(a, b) == rle_intersection_area(b, a));
    if (a.area() > 0) REQUIRE(mask_iou(a, a) == 1.0);
    // Adding intersection pixels to both masks cannot lower the IoU.
    BinaryMask da = rle_decode(a), db = rle_decode(b);
    const std::size_t p = static_cast<std::size_t>(rng.uniform_int(0, 41));
    const double before = mask_iou(a, b);
    da.bits[p] = db.bits[p] = 1;
    REQUIRE(mask_iou(rle_encode(da), rle_encode(db)) >= before);
  }
}

TEST_CASE("rle examples") {
  CHECK(rle_encode(BinaryMask(2, 2)).runs() == std::vector<std::uint32_t>{4});
  BinaryMask ones(2, 2);
  std::fill(ones.bits.begin(), ones.bits.end(), 1);
  CHECK(rle_encode(ones).runs() == std::vector<std::uint32_t>{0, 4});
  CHECK_THROWS_AS(RleMask(2, 2, {1, 2}), ValidationError);
}

TEST_CASE("rle round trip over 1000 seeds") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const BinaryMask m = random_bits(rng, 8, 8, rng.uniform());
    const RleMask r = rle_encode(m);
    REQUIRE(rle_decode(r) == m);
    REQUIRE(r.area() == m.count());
    const auto oracle = decode_runs(r);
    for (std::size_t i = 0; i < m.pixels(); ++i) REQUIRE(oracle[i] == (m.bits[i] != 0));
  }
}

TEST_CASE("instance and panoptic validation") {
  const ClassCatalog cat = small_catalog();
  Instance i;
  i.category = 0;  // stuff
  i.score = 0.5;
  i.mask = rect_mask(2, 2, 0, 0, 1, 1);
  CHECK_THROWS_AS(validate(i, cat), ValidationError);
  i.category = 2;
  CHECK_NOTHROW(validate(i, cat));
  i.class_dist = std::vector<double>{0.1, 0.8, 0.1};  // peaks on category 3
  CHECK_THROWS_AS(validate(i, cat), ValidationError);
  i.class_dist = std::vector<double>{0.8, 0.1, 0.1};
  CHECK_NOTHROW(validate(i, cat));
  i.mask = rect_mask(2, 2, 0, 0, 0, 0);
  CHECK_THROWS_AS(validate(i, cat), ValidationError);

  PanopticMap p = make_void_panoptic(1, 2, cat.void_id());
  CHECK_NOTHROW(validate(p, cat));
  p.segments[0] = {2, 1};
  p.segments[1] = {3, 1};  // id 1 under two categories
  CHECK_THROWS_AS(validate(p, cat), ValidationError);
  p.segments[1] = {0, 4};  // stuff with an id
  CHECK_THROWS_AS(validate(p, cat), ValidationError);
}
