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


// Prediction container: a directory holding manifest.json and one raw
// little-endian payload file per role. Every payload is hashed (SHA-256) in
// the manifest, and reads verify the hashes before decoding.

#ifndef CVREG_CONTAINER_HPP_
#define CVREG_CONTAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>

#include "cvreg/serialize.hpp"

namespace cvreg {

inline constexpr int kContainerFormatVersion = 1;
inline constexpr const char* kManifestName = "manifest.json";

struct PredictionContainer {
  explicit PredictionContainer(ClassCatalog c) : catalog(std::move(c)) {}

  ClassCatalog catalog;
  int height = 0;
  int width = 0;

  std::optional<SemanticProbMap> semantic_probs;
  std::optional<SemanticLabelMap> semantic_labels;
  std::optional<InstanceSet> instance_set;
  std::optional<PanopticMap> panoptic;
  std::optional<RgbImage> image;
  // Stored as f32; values that are not exactly representable are rounded.
  std::optional<EntropyMap> entropy;

  // Provenance carried in the manifest.
  std::optional<FittedWeights> weights;
  Json config;  // null when absent

  bool operator==(const PredictionContainer&) const = default;
};

std::uint16_t encode_panoptic(PanopticLabel label);
PanopticLabel decode_panoptic(std::uint16_t value);

std::string sha256_hex(std::span<const std::uint8_t> bytes);

// Replaces the manifest atomically: payloads first, each through a temporary
// name, manifest last. Throws ValidationError for inconsistent payloads and
// IoError when the directory cannot be written.
void write_container(const PredictionContainer& c,
                     const std::filesystem::path& dir);

// Throws IoError for missing files and ValidationError for a bad manifest,
// a hash mismatch (naming the entry), a shape or dtype mismatch, or a payload
// that fails validation against the catalog.
PredictionContainer read_container(const std::filesystem::path& dir);

}  // namespace cvreg

#endif  // CVREG_CONTAINER_HPP_
