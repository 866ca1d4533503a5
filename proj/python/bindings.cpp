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


// Python bindings. Arrays cross as numpy (probabilities f32 [C,H,W], labels
// u16 [H,W], panoptic maps u16 [H,W] in category * 1000 + instance form,
// images u8 [H,W,3]); catalogs, configs, weights and reports cross as JSON
// text that the Python wrapper parses.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

#include "cvreg/cli.hpp"
#include "cvreg/container.hpp"
#include "cvreg/errors.hpp"
#include "cvreg/experiment.hpp"
#include "cvreg/serialize.hpp"

namespace py = pybind11;
using namespace cvreg;

namespace {

template <typename T>
using Array = py::array_t<T, py::array::c_style | py::array::forcecast>;

ClassCatalog catalog_of(const std::string& text) {
  return catalog_from_json(Json::parse(text));
}

RunConfig config_of(const std::string& text) {
  RunConfig cfg = run_config_from_json(text.empty() ? Json::object() : Json::parse(text));
  cfg.validate();
  return cfg;
}

void require_ndim(const py::buffer_info& b, py::ssize_t ndim, const char* what) {
  if (b.ndim != ndim) {
    throw ValidationError(std::string(what) + ": expected " + std::to_string(ndim) +
                          " dimensions, got " + std::to_string(b.ndim));
  }
}

SemanticProbMap probs_in(const Array<float>& a) {
  const auto b = a.request();
  require_ndim(b, 3, "probs");
  const auto* p = static_cast<const float*>(b.ptr);
  return SemanticProbMap(static_cast<int>(b.shape[1]), static_cast<int>(b.shape[2]),
                         static_cast<int>(b.shape[0]),
                         std::vector<float>(p, p + b.size));
}

py::array_t<float> probs_out(const SemanticProbMap& m) {
  py::array_t<float> a({static_cast<py::ssize_t>(m.num_categories()),
                        static_cast<py::ssize_t>(m.height()),
                        static_cast<py::ssize_t>(m.width())});
  std::copy(m.data().begin(), m.data().end(), a.mutable_data());
  return a;
}

SemanticLabelMap labels_in(const Array<std::uint16_t>& a) {
  const auto b = a.request();
  require_ndim(b, 2, "labels");
  const auto* p = static_cast<const std::uint16_t*>(b.ptr);
  SemanticLabelMap m{static_cast<int>(b.shape[0]), static_cast<int>(b.shape[1]), {}};
  m.labels.assign(p, p + b.size);
  return m;
}

py::array_t<std::uint16_t> labels_out(const SemanticLabelMap& m) {
  py::array_t<std::uint16_t> a({static_cast<py::ssize_t>(m.height),
                                static_cast<py::ssize_t>(m.width)});
  std::copy(m.labels.begin(), m.labels.end(), a.mutable_data());
  return a;
}

PanopticMap panoptic_in(const Array<std::uint16_t>& a) {
  const auto b = a.request();
  require_ndim(b, 2, "panoptic");
  const auto* p = static_cast<const std::uint16_t*>(b.ptr);
  PanopticMap m{static_cast<int>(b.shape[0]), static_cast<int>(b.shape[1]), {}};
  m.segments.reserve(static_cast<std::size_t>(b.size));
  for (py::ssize_t i = 0; i < b.size; ++i) m.segments.push_back(decode_panoptic(p[i]));
  return m;
}

py::array_t<std::uint16_t> panoptic_out(const PanopticMap& m) {
  py::array_t<std::uint16_t> a({static_cast<py::ssize_t>(m.height),
                                static_cast<py::ssize_t>(m.width)});
  auto* p = a.mutable_data();
  for (std::size_t i = 0; i < m.segments.size(); ++i) p[i] = encode_panoptic(m.segments[i]);
  return a;
}

RgbImage image_in(const Array<std::uint8_t>& a) {
  const auto b = a.request();
  require_ndim(b, 3, "image");
  if (b.shape[2] != 3) throw ValidationError("image: last dimension must be 3");
  const auto* p = static_cast<const std::uint8_t*>(b.ptr);
  return RgbImage{static_cast<int>(b.shape[0]), static_cast<int>(b.shape[1]),
                  std::vector<std::uint8_t>(p, p + b.size)};
}

py::array_t<std::uint8_t> image_out(const RgbImage& img) {
  py::array_t<std::uint8_t> a({static_cast<py::ssize_t>(img.height),
                               static_cast<py::ssize_t>(img.width), py::ssize_t{3}});
  std::copy(img.samples.begin(), img.samples.end(), a.mutable_data());
  return a;
}

// Instances are dicts: category, score, mask (bool or integer [H,W]) and an
// optional class_dist list.
InstanceSet instances_in(const py::list& list, int height, int width) {
  InstanceSet s{height, width, {}};
  for (const auto& item : list) {
    const auto d = item.cast<py::dict>();
    Instance inst;
    inst.category = d["category"].cast<CategoryId>();
    inst.score = d["score"].cast<double>();
    if (d.contains("class_dist") && !d["class_dist"].is_none()) {
      inst.class_dist = d["class_dist"].cast<std::vector<double>>();
    }
    const auto mask = Array<std::uint8_t>::ensure(
        py::module_::import("numpy").attr("asarray")(d["mask"]).attr("astype")("uint8"));
    const auto b = mask.request();
    require_ndim(b, 2, "mask");
    if (b.shape[0] != height || b.shape[1] != width) {
      throw ValidationError("instance mask does not match the image size");
    }
    BinaryMask m(height, width);
    const auto* p = static_cast<const std::uint8_t*>(b.ptr);
    for (py::ssize_t i = 0; i < b.size; ++i) m.bits[static_cast<std::size_t>(i)] = p[i] ? 1 : 0;
    inst.mask = rle_encode(m);
    s.instances.push_back(std::move(inst));
  }
  return s;
}

py::list instances_out(const InstanceSet& s) {
  py::list out;
  for (const auto& inst : s.instances) {
    const BinaryMask m = rle_decode(inst.mask);
    py::array_t<bool> mask({static_cast<py::ssize_t>(s.height),
                            static_cast<py::ssize_t>(s.width)});
    auto* p = mask.mutable_data();
    for (std::size_t i = 0; i < m.bits.size(); ++i) p[i] = m.bits[i] != 0;
    py::dict d;
    d["category"] = inst.category;
    d["score"] = inst.score;
    d["mask"] = mask;
    d["class_dist"] = inst.class_dist ? py::cast(*inst.class_dist) : py::none();
    out.append(d);
  }
  return out;
}

py::object json_out(const Json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Json json_in(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

PseudoLabels pseudo_labels(const std::string& variant, const Array<float>& probs,
                           const py::list& instances, const std::string& weights,
                           const std::string& catalog, const std::string& config,
                           const std::optional<Array<float>>& probs_other,
                           const std::optional<py::list>& instances_other) {
  const ClassCatalog cat = catalog_of(catalog);
  const RunConfig cfg = config_of(config);
  const SemanticProbMap sem = probs_in(probs);
  validate(sem, cat);
  const InstanceSet inst = instances_in(instances, sem.height(), sem.width());
  const FittedWeights w = weights_from_json(Json::parse(weights), cat);
  if (variant == "single_task") return single_task_labels(sem, inst, w, cat);
  if (variant == "inter_task") return inter_task_labels(sem, inst, w, cfg.modules, cat);
  if (!probs_other || !instances_other) {
    throw ValidationError(variant + ": needs the other view's predictions");
  }
  const SemanticProbMap sem2 = probs_in(*probs_other);
  validate(sem2, cat);
  const InstanceSet inst2 = instances_in(*instances_other, sem2.height(), sem2.width());
  if (variant == "inter_style") {
    return inter_style_labels(sem, sem2, inst, inst2, w, cfg.modules, cat);
  }
  if (variant == "cross_view") {
    return cross_view_labels(sem, sem2, inst, inst2, w, cfg.modules, cat);
  }
  throw ValidationError("unknown variant '" + variant + "'");
}

py::dict container_out(const PredictionContainer& c) {
  py::dict d;
  d["catalog"] = json_out(to_json(c.catalog));
  d["height"] = c.height;
  d["width"] = c.width;
  if (c.semantic_probs) d["semantic_probs"] = probs_out(*c.semantic_probs);
  if (c.semantic_labels) d["semantic_labels"] = labels_out(*c.semantic_labels);
  if (c.instance_set) d["instance_set"] = instances_out(*c.instance_set);
  if (c.panoptic) d["panoptic"] = panoptic_out(*c.panoptic);
  if (c.image) d["image"] = image_out(*c.image);
  if (c.entropy) {
    py::array_t<double> e({static_cast<py::ssize_t>(c.entropy->height),
                           static_cast<py::ssize_t>(c.entropy->width)});
    std::copy(c.entropy->values.begin(), c.entropy->values.end(), e.mutable_data());
    d["entropy"] = e;
  }
  if (c.weights) d["weights"] = json_out(to_json(*c.weights));
  if (!c.config.is_null()) d["config"] = json_out(c.config);
  return d;
}

PredictionContainer container_in(const py::dict& d) {
  PredictionContainer c(catalog_from_json(json_in(d["catalog"])));
  c.height = d["height"].cast<int>();
  c.width = d["width"].cast<int>();
  auto has = [&](const char* k) { return d.contains(k) && !d[k].is_none(); };
  if (has("semantic_probs")) c.semantic_probs = probs_in(d["semantic_probs"].cast<Array<float>>());
  if (has("semantic_labels")) {
    c.semantic_labels = labels_in(d["semantic_labels"].cast<Array<std::uint16_t>>());
  }
  if (has("instance_set")) {
    c.instance_set = instances_in(d["instance_set"].cast<py::list>(), c.height, c.width);
  }
  if (has("panoptic")) c.panoptic = panoptic_in(d["panoptic"].cast<Array<std::uint16_t>>());
  if (has("image")) c.image = image_in(d["image"].cast<Array<std::uint8_t>>());
  if (has("entropy")) {
    const auto e = d["entropy"].cast<Array<double>>();
    const auto b = e.request();
    require_ndim(b, 2, "entropy");
    const auto* p = static_cast<const double*>(b.ptr);
    c.entropy = EntropyMap{static_cast<int>(b.shape[0]), static_cast<int>(b.shape[1]),
                           std::vector<double>(p, p + b.size)};
  }
  if (has("weights")) c.weights = weights_from_json(json_in(d["weights"]), c.catalog);
  if (has("config")) c.config = json_in(d["config"]);
  return c;
}

}  // namespace

PYBIND11_MODULE(_cvreg, m) {
  m.doc() = "Cross-view pseudo-label regularization for panoptic maps";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("PANOPTIC_LABEL_DIVISOR") = kPanopticLabelDivisor;

  m.def("default_catalog", [] { return to_json(default_catalog()).dump(); });
  m.def("check_catalog",
        [](const std::string& catalog) { return to_json(catalog_of(catalog)).dump(); });
  m.def("default_config", [] { return to_json(RunConfig{}).dump(); });
  m.def("check_config",
        [](const std::string& config) { return to_json(config_of(config)).dump(); });

  m.def("argmax_label", [](const Array<float>& probs) {
    return labels_out(argmax_label(probs_in(probs)));
  });
  m.def("semantic_entropy", [](const Array<float>& probs) {
    const EntropyMap e = semantic_entropy_map(probs_in(probs));
    py::array_t<double> a({static_cast<py::ssize_t>(e.height),
                           static_cast<py::ssize_t>(e.width)});
    std::copy(e.values.begin(), e.values.end(), a.mutable_data());
    return a;
  });

  m.def("fit_weights",
        [](const std::vector<Array<float>>& probs, const std::vector<py::list>& instances,
           const std::string& catalog, const std::string& config) {
          const ClassCatalog cat = catalog_of(catalog);
          const RunConfig cfg = config_of(config);
          if (probs.size() != instances.size()) {
            throw ValidationError("fit_weights: one instance list per probability map");
          }
          std::vector<SemanticProbMap> sem;
          std::vector<InstanceSet> inst;
          for (std::size_t i = 0; i < probs.size(); ++i) {
            sem.push_back(probs_in(probs[i]));
            inst.push_back(instances_in(instances[i], sem.back().height(), sem.back().width()));
          }
          const FittedWeights w{
              compute_class_balanced_weights(sem, cfg.modules.semantic_policy, cat),
              compute_instance_class_balanced_weights(inst, cfg.modules.instance_policy,
                                                      cat)};
          return to_json(w).dump();
        });

  m.def(
      "pseudo_labels",
      [](const std::string& variant, const Array<float>& probs, const py::list& instances,
         const std::string& weights, const std::string& catalog, const std::string& config,
         const std::optional<Array<float>>& probs_other,
         const std::optional<py::list>& instances_other) {
        PseudoLabels pl = pseudo_labels(variant, probs, instances, weights, catalog, config,
                                        probs_other, instances_other);
        return py::make_tuple(labels_out(pl.semantic), instances_out(pl.instances));
      },
      py::arg("variant"), py::arg("probs"), py::arg("instances"), py::arg("weights"),
      py::arg("catalog"), py::arg("config"), py::arg("probs_other") = py::none(),
      py::arg("instances_other") = py::none());

  m.def("match_histograms", [](const Array<std::uint8_t>& src, const Array<std::uint8_t>& ref) {
    return image_out(match_histograms(image_in(src), image_in(ref)));
  });

  m.def("fuse", [](const py::list& instances, const Array<std::uint16_t>& labels,
                   const std::string& catalog, const std::string& config) {
    const ClassCatalog cat = catalog_of(catalog);
    const RunConfig cfg = config_of(config);
    const SemanticLabelMap sem = labels_in(labels);
    validate(sem, cat);
    const InstanceSet inst = instances_in(instances, sem.height, sem.width);
    return panoptic_out(fuse_panoptic(inst, sem, cfg.modules.fusion, cat));
  });

  m.def("evaluate",
        [](const std::vector<std::pair<Array<std::uint16_t>, Array<std::uint16_t>>>& pairs,
           const std::string& catalog) {
          const ClassCatalog cat = catalog_of(catalog);
          std::vector<std::pair<PanopticMap, PanopticMap>> maps;
          for (const auto& [p, g] : pairs) maps.emplace_back(panoptic_in(p), panoptic_in(g));
          return to_json(evaluate_dataset(maps, cat), cat).dump();
        });

  m.def("run_experiment", [](const std::string& config, int jobs) {
    const RunConfig cfg = config_of(config);
    const ClassCatalog cat = default_catalog();
    const auto specs = seeded_specs(cfg.scene, cfg.experiment_seed, cfg.experiment_scenes);
    ExperimentResult r;
    {
      py::gil_scoped_release release;
      r = run_ablation_experiment(specs, cfg.modules, cat, jobs);
    }
    Json j = to_json(r, cat);
    j["config"] = to_json(cfg);
    return j.dump();
  }, py::arg("config") = "", py::arg("jobs") = 1);

  m.def("read_container",
        [](const std::string& path) { return container_out(read_container(path)); });
  m.def("write_container", [](const std::string& path, const py::dict& d) {
    write_container(container_in(d), path);
  });

  m.def("cli", [](const std::vector<std::string>& args) {
    std::ostringstream out, err;
    int code;
    {
      py::gil_scoped_release release;
      code = cli_dispatch(args, out, err);
    }
    return py::make_tuple(code, out.str(), err.str());
  });
}
