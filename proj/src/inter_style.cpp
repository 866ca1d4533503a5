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

#include "cvreg/inter_style.hpp"

#include <algorithm>
#include <string>
#include <tuple>

#include "cvreg/errors.hpp"
#include "cvreg/random.hpp"

namespace cvreg {
namespace {

void require_same_dims(int h1, int w1, int h2, int w2, const char* what) {
  if (h1 != h2 || w1 != w2) {
    throw ValidationError(std::string(what) + ": dimension mismatch");
  }
}

std::array<std::array<std::uint64_t, 256>, 3> channel_histograms(
    const RgbImage& img) {
  std::array<std::array<std::uint64_t, 256>, 3> h{};
  for (std::size_t i = 0; i < img.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) ++h[c][img.samples[3 * i + c]];
  }
  return h;
}

}  // namespace

void RgbImage::validate() const {
  if (height <= 0 || width <= 0) {
    throw ValidationError("image: dimensions must be positive");
  }
  if (samples.size() != pixels() * 3) {
    throw ValidationError("image: expected " + std::to_string(pixels() * 3) +
                          " samples, got " + std::to_string(samples.size()));
  }
}

void IsrConfig::validate() const {
  if (!(instance_merge_iou > 0.0 && instance_merge_iou <= 1.0)) {
    throw ValidationError("isr: instance_merge_iou must be in (0,1]");
  }
}

ChannelLut histogram_matching_lut(const std::array<std::uint64_t, 256>& src_hist,
                                  const std::array<std::uint64_t, 256>& ref_hist) {
  std::array<std::uint64_t, 256> src_cum{}, ref_cum{};
  std::uint64_t s = 0, r = 0;
  for (int v = 0; v < 256; ++v) {
    s += src_hist[v];
    r += ref_hist[v];
    src_cum[v] = s;
    ref_cum[v] = r;
  }
  if (s == 0 || r == 0) {
    throw ValidationError("match_histograms: empty histogram");
  }
  // CDFs compared exactly: ref_cum/r >= src_cum/s  <=>  ref_cum*s >= src_cum*r.
  ChannelLut lut{};
  int ref_value = 0;
  for (int v = 0; v < 256; ++v) {
    while (ref_value < 255 && ref_cum[ref_value] * s < src_cum[v] * r) {
      ++ref_value;
    }
    lut[v] = static_cast<std::uint8_t>(ref_value);
  }
  return lut;
}

std::array<ChannelLut, 3> histogram_matching_luts(const RgbImage& src,
                                                  const RgbImage& ref) {
  src.validate();
  ref.validate();
  const auto sh = channel_histograms(src);
  const auto rh = channel_histograms(ref);
  return {histogram_matching_lut(sh[0], rh[0]),
          histogram_matching_lut(sh[1], rh[1]),
          histogram_matching_lut(sh[2], rh[2])};
}

RgbImage match_histograms(const RgbImage& src, const RgbImage& ref) {
  const auto luts = histogram_matching_luts(src, ref);
  RgbImage out = src;
  for (std::size_t i = 0; i < out.pixels(); ++i) {
    for (int c = 0; c < 3; ++c) {
      out.samples[3 * i + c] = luts[c][src.samples[3 * i + c]];
    }
  }
  return out;
}

std::size_t pick_reference(std::size_t pool_size, std::uint64_t seed) {
  if (pool_size == 0) {
    throw ValidationError("pick_reference: empty reference pool");
  }
  Rng rng(seed);
  return static_cast<std::size_t>(
      rng.uniform_int(0, static_cast<std::int64_t>(pool_size) - 1));
}

SemanticLabelMap unify_semantic(const SemanticProbMap& view,
                                const SemanticProbMap& other_view,
                                const ClassBalancedWeights& weights) {
  require_same_dims(view.height(), view.width(), other_view.height(),
                    other_view.width(), "unify_semantic");
  if (view.num_categories() != other_view.num_categories()) {
    throw ValidationError("unify_semantic: category count mismatch");
  }
  const SemanticLabelMap a = select_semantic(view, weights);
  const SemanticLabelMap b = select_semantic(other_view, weights);
  const EntropyMap ea_map = semantic_entropy_map(view);
  const EntropyMap eb_map = semantic_entropy_map(other_view);
  SemanticLabelMap out =
      make_void_labels(view.height(), view.width(), weights.void_id);
  for (std::size_t i = 0; i < out.labels.size(); ++i) {
    const double ea = ea_map.values[i];
    const double eb = eb_map.values[i];
    if (ea < eb) {
      out.labels[i] = a.labels[i];
    } else if (eb < ea) {
      out.labels[i] = b.labels[i];
    }
  }
  return out;
}

SemanticProbMap min_entropy_view(const SemanticProbMap& view,
                                 const SemanticProbMap& other_view) {
  require_same_dims(view.height(), view.width(), other_view.height(),
                    other_view.width(), "min_entropy_view");
  if (view.num_categories() != other_view.num_categories()) {
    throw ValidationError("min_entropy_view: category count mismatch");
  }
  std::vector<float> probs(view.data().begin(), view.data().end());
  const std::size_t n = view.pixels();
  const EntropyMap ea = semantic_entropy_map(view);
  const EntropyMap eb = semantic_entropy_map(other_view);
  for (std::size_t i = 0; i < n; ++i) {
    if (eb.values[i] < ea.values[i]) {
      for (int c = 0; c < view.num_categories(); ++c) {
        probs[static_cast<std::size_t>(c) * n + i] = other_view.prob(c, i);
      }
    }
  }
  return SemanticProbMap(view.height(), view.width(), view.num_categories(),
                         std::move(probs));
}

std::vector<std::pair<std::size_t, std::size_t>> match_cross_view(
    const InstanceSet& view, const InstanceSet& other_view,
    const IsrConfig& cfg) {
  cfg.validate();
  require_same_dims(view.height, view.width, other_view.height,
                    other_view.width, "unify_instances");
  struct Candidate {
    double iou;
    std::size_t a, b;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < view.instances.size(); ++i) {
    for (std::size_t j = 0; j < other_view.instances.size(); ++j) {
      const auto& x = view.instances[i];
      const auto& y = other_view.instances[j];
      if (x.category != y.category) continue;
      const double iou = mask_iou(x.mask, y.mask);
      if (iou >= cfg.instance_merge_iou) candidates.push_back({iou, i, j});
    }
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Candidate& l, const Candidate& r) {
              if (l.iou != r.iou) return l.iou > r.iou;
              return std::tie(l.a, l.b) < std::tie(r.a, r.b);
            });
  std::vector<bool> used_a(view.instances.size(), false);
  std::vector<bool> used_b(other_view.instances.size(), false);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (const auto& c : candidates) {
    if (used_a[c.a] || used_b[c.b]) continue;
    used_a[c.a] = used_b[c.b] = true;
    pairs.emplace_back(c.a, c.b);
  }
  return pairs;
}

InstanceSet merge_views(const InstanceSet& view, const InstanceSet& other_view,
                        const IsrConfig& cfg) {
  const auto pairs = match_cross_view(view, other_view, cfg);
  std::vector<bool> keep_a(view.instances.size(), true);
  std::vector<bool> keep_b(other_view.instances.size(), true);
  for (const auto& [a, b] : pairs) {
    const double ea = instance_entropy(view.instances[a]);
    const double eb = instance_entropy(other_view.instances[b]);
    keep_a[a] = ea < eb;
    keep_b[b] = eb < ea;
  }
  struct Entry {
    const Instance* inst;
    int view_index;
    std::size_t index;
  };
  std::vector<Entry> entries;
  for (std::size_t i = 0; i < view.instances.size(); ++i) {
    if (keep_a[i]) entries.push_back({&view.instances[i], 0, i});
  }
  for (std::size_t j = 0; j < other_view.instances.size(); ++j) {
    if (keep_b[j]) entries.push_back({&other_view.instances[j], 1, j});
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& l, const Entry& r) {
                     return l.inst->score > r.inst->score;
                   });
  InstanceSet out;
  out.height = view.height;
  out.width = view.width;
  for (const auto& e : entries) out.instances.push_back(*e.inst);
  return out;
}

InstanceSet unify_instances(const InstanceSet& view,
                            const InstanceSet& other_view,
                            const ClassBalancedWeights& weights,
                            const ClassCatalog& catalog, const IsrConfig& cfg) {
  require_same_dims(view.height, view.width, other_view.height,
                    other_view.width, "unify_instances");
  return merge_views(select_instances(view, weights, catalog),
                     select_instances(other_view, weights, catalog), cfg);
}

}  // namespace cvreg
