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

// Inter-style regularization. An image is restyled by per-channel histogram
// matching against another image; the two views share geometry, so their
// pseudo labels can be unified by trusting whichever view is less uncertain.

#ifndef CVREG_INTER_STYLE_HPP_
#define CVREG_INTER_STYLE_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "cvreg/label_core.hpp"
#include "cvreg/pseudo_select.hpp"

namespace cvreg {

// Interleaved 8-bit RGB.
struct RgbImage {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> samples;

  std::size_t pixels() const {
    return static_cast<std::size_t>(height) * width;
  }
  void validate() const;
  bool operator==(const RgbImage&) const = default;
};

enum class ReferenceSelection { kExplicit, kSeededPool };

struct IsrConfig {
  ReferenceSelection reference_selection = ReferenceSelection::kExplicit;
  std::uint64_t reference_seed = 0;
  double instance_merge_iou = 0.5;  // in (0, 1]

  void validate() const;
  bool operator==(const IsrConfig&) const = default;
};

using ChannelLut = std::array<std::uint8_t, 256>;

// Value map for one channel: each source value goes to the smallest
// reference value whose reference CDF reaches the source CDF. Both
// histograms must be nonempty.
ChannelLut histogram_matching_lut(const std::array<std::uint64_t, 256>& src_hist,
                                  const std::array<std::uint64_t, 256>& ref_hist);

std::array<ChannelLut, 3> histogram_matching_luts(const RgbImage& src,
                                                  const RgbImage& ref);

RgbImage match_histograms(const RgbImage& src, const RgbImage& ref);

// Seeded uniform index into a pool of `pool_size` candidates.
std::size_t pick_reference(std::size_t pool_size, std::uint64_t seed);

// Whichever view has strictly lower entropy contributes its selected label;
// ties are void.
SemanticLabelMap unify_semantic(const SemanticProbMap& view,
                                const SemanticProbMap& other_view,
                                const ClassBalancedWeights& weights);

// Per pixel, the distribution of the lower-entropy view (first view on ties).
SemanticProbMap min_entropy_view(const SemanticProbMap& view,
                                 const SemanticProbMap& other_view);

// Greedy cross-view pairing: same-category pairs with mask IoU at least
// cfg.instance_merge_iou, taken in descending IoU order (then by index),
// each instance used at most once.
std::vector<std::pair<std::size_t, std::size_t>> match_cross_view(
    const InstanceSet& view, const InstanceSet& other_view,
    const IsrConfig& cfg);

// Pairs instances across views; a matched pair keeps its lower-entropy
// member (both dropped on a tie), unmatched instances pass through. Output
// is ordered by descending score, then view, then index.
InstanceSet merge_views(const InstanceSet& view, const InstanceSet& other_view,
                        const IsrConfig& cfg);

// Selects both views, then merges them.
InstanceSet unify_instances(const InstanceSet& view,
                            const InstanceSet& other_view,
                            const ClassBalancedWeights& weights,
                            const ClassCatalog& catalog, const IsrConfig& cfg);

}  // namespace cvreg

#endif  // CVREG_INTER_STYLE_HPP_
