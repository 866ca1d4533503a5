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


#include "cvreg/serialize.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <vector>

#include "cvreg/errors.hpp"

namespace cvreg {
namespace {

// Reads the keys of one JSON object and complains about any it did not use.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string where)
      : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) {
      throw ValidationError(where_ + ": expected a JSON object");
    }
  }

  template <typename T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const Json::exception&) {
      throw ValidationError(where_ + "." + key + ": wrong type");
    }
  }

  const Json* child(const char* key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) {
        throw ValidationError(where_ + ": unknown key '" + key + "'");
      }
    }
  }

 private:
  const Json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

Json policy_json(const SelectionPolicy& p) {
  return {{"target_fraction", p.target_fraction},
          {"min_threshold", p.min_threshold}};
}

void read_policy(const Json* j, const std::string& where, SelectionPolicy& p) {
  if (!j) return;
  ObjectReader r(*j, where);
  r.read("target_fraction", p.target_fraction);
  r.read("min_threshold", p.min_threshold);
  r.finish();
}

template <typename E>
E enum_from(const std::string& s,
            std::initializer_list<std::pair<const char*, E>> names,
            const std::string& where) {
  for (const auto& [name, value] : names) {
    if (s == name) return value;
  }
  throw ValidationError(where + ": unknown value '" + s + "'");
}

const char* aggregation_name(RegionAggregation a) {
  return a == RegionAggregation::kMean ? "mean" : "median";
}

const char* reference_name(ReferenceSelection r) {
  return r == ReferenceSelection::kExplicit ? "explicit" : "seeded_pool";
}

const char* shape_name(ThingShape s) {
  return s == ThingShape::kRectangle ? "rectangle" : "ellipse";
}

std::string fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

// Left-aligned first column, right-aligned rest.
std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    widths.resize(std::max(widths.size(), row.size()), 0);
    for (std::size_t c = 0; c < row.size(); ++c) {
      widths[c] = std::max(widths[c], row[c].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::string pad(widths[c] - row[c].size(), ' ');
      if (c > 0) line += "  ";
      line += c == 0 ? row[c] + pad : pad + row[c];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

Json quality_json(const CategoryQuality& q) {
  return {{"sq", q.sq}, {"rq", q.rq}, {"pq", q.pq},
          {"tp", q.tp}, {"fp", q.fp}, {"fn", q.fn}};
}

}  // namespace

void RunConfig::validate() const {
  modules.validate();
  scene.validate();
  if (experiment_scenes < kMinExperimentScenes) {
    throw ValidationError("experiment.scenes must be at least " +
                          std::to_string(kMinExperimentScenes));
  }
}

Json to_json(const RunConfig& cfg) {
  const auto& m = cfg.modules;
  const auto& n = cfg.scene.noise;
  return {
      {"selection",
       {{"semantic", policy_json(m.semantic_policy)},
        {"instance", policy_json(m.instance_policy)}}},
      {"itr",
       {{"consistency_threshold", m.itr.consistency_threshold},
        {"region_aggregation", aggregation_name(m.itr.region_aggregation)}}},
      {"isr",
       {{"reference_selection", reference_name(m.isr.reference_selection)},
        {"reference_seed", m.isr.reference_seed},
        {"instance_merge_iou", m.isr.instance_merge_iou}}},
      {"fusion",
       {{"instance_score_min", m.fusion.instance_score_min},
        {"overlap_keep_fraction", m.fusion.overlap_keep_fraction},
        {"stuff_min_area", m.fusion.stuff_min_area}}},
      {"scene",
       {{"height", cfg.scene.height},
        {"width", cfg.scene.width},
        {"n_stuff_regions", cfg.scene.n_stuff_regions},
        {"n_things", cfg.scene.n_things},
        {"thing_shape", shape_name(cfg.scene.thing_shape)},
        {"rng_seed", cfg.scene.rng_seed},
        {"noise",
         {{"semantic_stuff_acc", n.semantic_stuff_acc},
          {"semantic_thing_acc", n.semantic_thing_acc},
          {"instance_thing_recall", n.instance_thing_recall},
          {"instance_score_noise", n.instance_score_noise},
          {"instance_boundary_jitter", n.instance_boundary_jitter}}}}},
      {"experiment",
       {{"seed", cfg.experiment_seed}, {"scenes", cfg.experiment_scenes}}},
  };
}

RunConfig run_config_from_json(const Json& j) {
  RunConfig cfg;
  auto& m = cfg.modules;
  ObjectReader top(j, "config");
  if (const Json* sel = top.child("selection")) {
    ObjectReader r(*sel, "config.selection");
    read_policy(r.child("semantic"), "config.selection.semantic",
                m.semantic_policy);
    read_policy(r.child("instance"), "config.selection.instance",
                m.instance_policy);
    r.finish();
  }
  if (const Json* itr = top.child("itr")) {
    ObjectReader r(*itr, "config.itr");
    r.read("consistency_threshold", m.itr.consistency_threshold);
    std::string agg = aggregation_name(m.itr.region_aggregation);
    r.read("region_aggregation", agg);
    m.itr.region_aggregation = enum_from<RegionAggregation>(
        agg,
        {{"mean", RegionAggregation::kMean},
         {"median", RegionAggregation::kMedian}},
        "config.itr.region_aggregation");
    r.finish();
  }
  if (const Json* isr = top.child("isr")) {
    ObjectReader r(*isr, "config.isr");
    std::string sel = reference_name(m.isr.reference_selection);
    r.read("reference_selection", sel);
    m.isr.reference_selection = enum_from<ReferenceSelection>(
        sel,
        {{"explicit", ReferenceSelection::kExplicit},
         {"seeded_pool", ReferenceSelection::kSeededPool}},
        "config.isr.reference_selection");
    r.read("reference_seed", m.isr.reference_seed);
    r.read("instance_merge_iou", m.isr.instance_merge_iou);
    r.finish();
  }
  if (const Json* fusion = top.child("fusion")) {
    ObjectReader r(*fusion, "config.fusion");
    r.read("instance_score_min", m.fusion.instance_score_min);
    r.read("overlap_keep_fraction", m.fusion.overlap_keep_fraction);
    r.read("stuff_min_area", m.fusion.stuff_min_area);
    r.finish();
  }
  if (const Json* scene = top.child("scene")) {
    auto& s = cfg.scene;
    ObjectReader r(*scene, "config.scene");
    r.read("height", s.height);
    r.read("width", s.width);
    r.read("n_stuff_regions", s.n_stuff_regions);
    r.read("n_things", s.n_things);
    std::string shape = shape_name(s.thing_shape);
    r.read("thing_shape", shape);
    s.thing_shape = enum_from<ThingShape>(
        shape,
        {{"rectangle", ThingShape::kRectangle},
         {"ellipse", ThingShape::kEllipse}},
        "config.scene.thing_shape");
    r.read("rng_seed", s.rng_seed);
    if (const Json* noise = r.child("noise")) {
      ObjectReader nr(*noise, "config.scene.noise");
      nr.read("semantic_stuff_acc", s.noise.semantic_stuff_acc);
      nr.read("semantic_thing_acc", s.noise.semantic_thing_acc);
      nr.read("instance_thing_recall", s.noise.instance_thing_recall);
      nr.read("instance_score_noise", s.noise.instance_score_noise);
      nr.read("instance_boundary_jitter", s.noise.instance_boundary_jitter);
      nr.finish();
    }
    r.finish();
  }
  if (const Json* exp = top.child("experiment")) {
    ObjectReader r(*exp, "config.experiment");
    r.read("seed", cfg.experiment_seed);
    r.read("scenes", cfg.experiment_scenes);
    r.finish();
  }
  top.finish();
  cfg.validate();
  return cfg;
}

Json to_json(const ClassCatalog& catalog) {
  Json cats = Json::array();
  for (const auto& c : catalog.categories()) {
    cats.push_back({{"id", c.id}, {"name", c.name}, {"is_thing", c.is_thing}});
  }
  return {{"categories", std::move(cats)}, {"void_id", catalog.void_id()}};
}

ClassCatalog catalog_from_json(const Json& j) {
  try {
    std::vector<Category> cats;
    for (const auto& c : j.at("categories")) {
      cats.push_back({c.at("id").get<CategoryId>(),
                      c.at("name").get<std::string>(),
                      c.at("is_thing").get<bool>()});
    }
    return ClassCatalog(std::move(cats), j.at("void_id").get<CategoryId>());
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("catalog: ") + e.what());
  }
}

Json to_json(const FittedWeights& weights) {
  return {{"semantic", {{"k", weights.semantic.k}}},
          {"instance", {{"k", weights.instance.k}}}};
}

FittedWeights weights_from_json(const Json& j, const ClassCatalog& catalog) {
  FittedWeights w;
  try {
    w.semantic.k = j.at("semantic").at("k").get<std::vector<double>>();
    w.instance.k = j.at("instance").at("k").get<std::vector<double>>();
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("weights: ") + e.what());
  }
  w.semantic.void_id = catalog.void_id();
  w.instance.void_id = catalog.void_id();
  w.semantic.validate(catalog);
  w.instance.validate(catalog);
  return w;
}

Json to_json(const PQReport& report, const ClassCatalog& catalog) {
  Json per = Json::array();
  for (const auto& [c, q] : report.per_category) {
    Json row = quality_json(q);
    row["id"] = c;
    row["name"] = catalog.contains(c) ? catalog.at(c).name : std::string();
    per.push_back(std::move(row));
  }
  return {{"per_category", std::move(per)},
          {"msq", report.msq},
          {"mrq", report.mrq},
          {"mpq", report.mpq}};
}

std::string format_table(const PQReport& report, const ClassCatalog& catalog) {
  std::vector<std::vector<std::string>> rows = {
      {"category", "SQ", "RQ", "PQ", "TP", "FP", "FN"}};
  for (const auto& [c, q] : report.per_category) {
    rows.push_back({catalog.contains(c) ? catalog.at(c).name
                                        : std::to_string(c),
                    fixed(q.sq), fixed(q.rq), fixed(q.pq),
                    std::to_string(q.tp), std::to_string(q.fp),
                    std::to_string(q.fn)});
  }
  rows.push_back({"mean", fixed(report.msq), fixed(report.mrq),
                  fixed(report.mpq), "", "", ""});
  return render(rows);
}

Json to_json(const ExperimentResult& result, const ClassCatalog& catalog) {
  Json variants = Json::array();
  for (const auto& v : result.table) {
    Json row = to_json(v.report, catalog);
    row["variant"] = std::string(variant_name(v.variant));
    variants.push_back(std::move(row));
  }
  Json scenes = Json::array();
  for (const auto& s : result.scenes) {
    Json mpq = Json::object();
    for (Variant v : kAllVariants) {
      mpq[std::string(variant_name(v))] =
          s.reports[static_cast<std::size_t>(v)].mpq;
    }
    scenes.push_back({{"seed", s.seed},
                      {"mpq", std::move(mpq)},
                      {"semantic_stuff_pq", s.semantic_stuff_pq},
                      {"instance_stuff_pq", s.instance_stuff_pq},
                      {"semantic_thing_pq", s.semantic_thing_pq},
                      {"instance_thing_pq", s.instance_thing_pq}});
  }
  return {{"variants", std::move(variants)},
          {"scenes", std::move(scenes)},
          {"weights", to_json(result.weights)},
          {"orderings",
           {{"scenes", result.scenes.size()},
            {"inter_task_beats_single", result.inter_task_beats_single()},
            {"inter_style_beats_single", result.inter_style_beats_single()},
            {"cross_view_beats_both", result.cross_view_beats_both()},
            {"complementarity_holds", result.complementarity_holds()}}}};
}

std::string format_table(const ExperimentResult& result) {
  std::vector<std::vector<std::string>> rows = {
      {"variant", "mSQ", "mRQ", "mPQ"}};
  for (const auto& v : result.table) {
    rows.push_back({std::string(variant_name(v.variant)), fixed(v.report.msq),
                    fixed(v.report.mrq), fixed(v.report.mpq)});
  }
  return render(rows);
}

}  // namespace cvreg
