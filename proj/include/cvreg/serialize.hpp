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


// JSON forms of the catalog, module configs, fitted weights and reports,
// plus the aligned text tables printed by the command-line tool.

#ifndef CVREG_SERIALIZE_HPP_
#define CVREG_SERIALIZE_HPP_

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

#include "cvreg/experiment.hpp"

namespace cvreg {

using Json = nlohmann::json;

// Every module config in one document. Missing keys keep their defaults,
// unknown keys are rejected.
struct RunConfig {
  ExperimentConfig modules;
  SceneSpec scene;
  std::uint64_t experiment_seed = 0;
  std::size_t experiment_scenes = 100;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

Json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const Json& j);

Json to_json(const ClassCatalog& catalog);
ClassCatalog catalog_from_json(const Json& j);

Json to_json(const FittedWeights& weights);
FittedWeights weights_from_json(const Json& j, const ClassCatalog& catalog);

Json to_json(const PQReport& report, const ClassCatalog& catalog);
// Columns: category, SQ, RQ, PQ, TP, FP, FN; then the means.
std::string format_table(const PQReport& report, const ClassCatalog& catalog);

Json to_json(const ExperimentResult& result, const ClassCatalog& catalog);
std::string format_table(const ExperimentResult& result);

}  // namespace cvreg

#endif  // CVREG_SERIALIZE_HPP_
