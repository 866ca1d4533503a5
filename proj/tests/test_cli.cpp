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

#include <sstream>

#include "cvreg/cli.hpp"
#include "cvreg/container.hpp"
#include "cvreg/experiment.hpp"
#include "support/tempdir.hpp"

using namespace cvreg;
using namespace cvreg::testing;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Every file under `dir`, relative path to contents.
std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) {
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
    }
  }
  return out;
}

// A small scene so the pipeline tests stay quick.
std::string small_config(const TempDir& dir) {
  const fs::path p = dir / "config.json";
  write_file(p, R"({"scene": {"height": 48, "width": 48, "n_things": 3},
                    "experiment": {"scenes": 20}})");
  return p.string();
}

FittedWeights fit_one(const PredictionContainer& c, const ExperimentConfig& cfg) {
  const std::vector<SemanticProbMap> sem{*c.semantic_probs};
  const std::vector<InstanceSet> inst{*c.instance_set};
  return {compute_class_balanced_weights(sem, cfg.semantic_policy, c.catalog),
          compute_instance_class_balanced_weights(inst, cfg.instance_policy,
                                                  c.catalog)};
}

}  // namespace

TEST_CASE("synth is deterministic and independent of jobs") {
  TempDir dir;
  const std::string cfg = small_config(dir);
  const std::string a = (dir / "a").string(), b = (dir / "b").string(),
                    c = (dir / "c").string(), d = (dir / "d").string();
  REQUIRE(cli({"synth", "--config", cfg, "--seed", "5", "--out", a, "--quiet"}).code == 0);
  REQUIRE(cli({"synth", "--config", cfg, "--seed", "5", "--out", b, "--jobs", "3",
               "--quiet"}).code == 0);
  REQUIRE(cli({"synth", "--config", cfg, "--seed", "6", "--out", c, "--quiet"}).code == 0);
  const auto sa = snapshot(a);
  CHECK(sa.size() == 11);  // gt: 3 files, each view: 4
  CHECK(sa == snapshot(b));
  CHECK_FALSE(sa == snapshot(c));

  // The seed lands in the echoed config.
  const PredictionContainer gt = read_container(fs::path(a) / "gt");
  CHECK(gt.config["scene"]["rng_seed"] == 5);
  CHECK(gt.config["scene"]["height"] == 48);

  const Run r = cli({"synth", "--config", cfg, "--out", d});
  CHECK(r.code == 0);
  CHECK(r.out.find("synth: wrote") != std::string::npos);
}

TEST_CASE("pipelines agree with the library") {
  TempDir dir;
  const std::string cfg = small_config(dir);
  const fs::path scene = dir / "scene";
  REQUIRE(cli({"synth", "--config", cfg, "--seed", "2", "--out", scene.string(),
               "--quiet"}).code == 0);
  const std::string v0 = (scene / "view0").string();
  const std::string v1 = (scene / "view1").string();
  const std::string gt = (scene / "gt").string();
  const PredictionContainer c0 = read_container(v0);
  const PredictionContainer c1 = read_container(v1);
  const ExperimentConfig ecfg;
  const ClassCatalog& cat = c0.catalog;
  const FittedWeights w = fit_one(c0, ecfg);

  SUBCASE("select") {
    const fs::path out = dir / "sel";
    REQUIRE(cli({"select", "--input", v0, "--out", out.string(), "--quiet"}).code == 0);
    const PredictionContainer s = read_container(out);
    CHECK(s.weights == w);
    CHECK(s.semantic_labels == select_semantic(*c0.semantic_probs, w.semantic));
    CHECK(s.instance_set == select_instances(*c0.instance_set, w.instance, cat));

    // Weights read back from that container reproduce the labels.
    const fs::path again = dir / "sel2";
    REQUIRE(cli({"select", "--input", v0, "--weights", out.string(), "--out",
                 again.string(), "--quiet"}).code == 0);
    CHECK(read_container(again) == s);
  }

  SUBCASE("cross-view itr, fuse, eval") {
    const fs::path cv = dir / "cv", pan = dir / "pan", rep = dir / "rep.json";
    REQUIRE(cli({"itr", "--input", v0, "--view", v1, "--out", cv.string(),
                 "--quiet"}).code == 0);
    REQUIRE(cli({"fuse", "--input", cv.string(), "--out", pan.string(),
                 "--quiet"}).code == 0);
    const Run r = cli({"eval", "--pred", pan.string(), "--gt", gt, "--out",
                       rep.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("mean") != std::string::npos);

    const PseudoLabels pl =
        cross_view_labels(*c0.semantic_probs, *c1.semantic_probs,
                          *c0.instance_set, *c1.instance_set, w, ecfg, cat);
    const PanopticMap want = fuse_panoptic(pl.instances, pl.semantic, ecfg.fusion, cat);
    const PredictionContainer got = read_container(pan);
    CHECK(got.panoptic == want);
    const PQReport report = pq_per_class(
        match_segments(want, *read_container(gt).panoptic, cat));
    const Json j = Json::parse(read_file(rep));
    CHECK(j["mpq"].get<double>() == report.mpq);
  }

  SUBCASE("single-view itr and isr") {
    const fs::path itr = dir / "itr", isr = dir / "isr";
    REQUIRE(cli({"itr", "--input", v0, "--out", itr.string(), "--quiet"}).code == 0);
    REQUIRE(cli({"isr", "--input", v0, "--view", v1, "--out", isr.string(),
                 "--quiet"}).code == 0);
    const PseudoLabels a =
        inter_task_labels(*c0.semantic_probs, *c0.instance_set, w, ecfg, cat);
    const PseudoLabels b =
        inter_style_labels(*c0.semantic_probs, *c1.semantic_probs,
                           *c0.instance_set, *c1.instance_set, w, ecfg, cat);
    const PredictionContainer ia = read_container(itr);
    const PredictionContainer ib = read_container(isr);
    CHECK(ia.semantic_labels == a.semantic);
    CHECK(ia.instance_set == a.instances);
    CHECK(ib.semantic_labels == b.semantic);
    CHECK(ib.instance_set == b.instances);
  }

  SUBCASE("stylize") {
    const fs::path out = dir / "sty";
    REQUIRE(cli({"stylize", "--input", v0, "--reference", gt, "--out",
                 out.string(), "--quiet"}).code == 0);
    const PredictionContainer s = read_container(out);
    CHECK(s.image == match_histograms(*c0.image, *read_container(gt).image));
    CHECK(s.semantic_probs == c0.semantic_probs);
  }

  SUBCASE("eval of a map against itself") {
    const Run r = cli({"eval", "--pred", gt, "--gt", gt, "--quiet", "--out",
                       (dir / "self.json").string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const Json j = Json::parse(read_file(dir / "self.json"));
    CHECK(j["mpq"] == 1.0);
    CHECK(j["msq"] == 1.0);
    CHECK(j["mrq"] == 1.0);
  }
}

TEST_CASE("multi-input runs are independent of jobs") {
  TempDir dir;
  const std::string cfg = small_config(dir);
  std::vector<std::string> inputs, views;
  for (int s = 0; s < 4; ++s) {
    const fs::path scene = dir / ("s" + std::to_string(s));
    REQUIRE(cli({"synth", "--config", cfg, "--seed", std::to_string(s), "--out",
                 scene.string(), "--quiet"}).code == 0);
    // Distinct leaf names, as outputs are keyed by input name.
    fs::rename(scene / "view0", dir / ("in" + std::to_string(s)));
    inputs.push_back((dir / ("in" + std::to_string(s))).string());
    views.push_back((scene / "view1").string());
  }
  auto run = [&](const std::string& cmd, const std::string& out, const std::string& jobs,
                 bool with_views) {
    std::vector<std::string> args{cmd, "--out", out, "--jobs", jobs, "--quiet"};
    for (std::size_t i = 0; i < inputs.size(); ++i) {
      args.insert(args.end(), {"--input", inputs[i]});
      if (with_views) args.insert(args.end(), {"--view", views[i]});
    }
    return cli(args).code;
  };
  for (const std::string cmd : {"select", "itr", "isr"}) {
    const bool views_needed = cmd == "isr";
    const std::string a = (dir / (cmd + "_1")).string();
    const std::string b = (dir / (cmd + "_8")).string();
    REQUIRE(run(cmd, a, "1", views_needed || cmd == "itr") == 0);
    REQUIRE(run(cmd, b, "8", views_needed || cmd == "itr") == 0);
    const auto sa = snapshot(a);
    CHECK(sa.size() == 4 * 3);  // manifest, labels, instances per input
    CHECK(sa == snapshot(b));
  }

  std::vector<std::string> pool_args{"stylize", "--seed", "9", "--quiet"};
  for (const auto& in : inputs) pool_args.insert(pool_args.end(), {"--input", in});
  for (const auto& v : views) pool_args.insert(pool_args.end(), {"--pool", v});
  auto sty = [&](const std::string& out, const std::string& jobs) {
    auto args = pool_args;
    args.insert(args.end(), {"--out", out, "--jobs", jobs});
    return cli(args).code;
  };
  REQUIRE(sty((dir / "sty_1").string(), "1") == 0);
  REQUIRE(sty((dir / "sty_8").string(), "8") == 0);
  CHECK(snapshot(dir / "sty_1") == snapshot(dir / "sty_8"));
}

TEST_CASE("experiment output is byte-identical across runs and jobs") {
  TempDir dir;
  const std::string cfg = small_config(dir);
  const std::string a = (dir / "a.json").string(), b = (dir / "b.json").string();
  const Run ra = cli({"experiment", "--config", cfg, "--seed", "1", "--out", a,
                      "--table", (dir / "a.txt").string()});
  REQUIRE(ra.code == 0);
  REQUIRE(cli({"experiment", "--config", cfg, "--seed", "1", "--out", b,
               "--jobs", "6", "--quiet", "--table", (dir / "b.txt").string()}).code == 0);
  CHECK(read_file(a) == read_file(b));
  CHECK(read_file(dir / "a.txt") == read_file(dir / "b.txt"));
  CHECK(ra.out == read_file(dir / "a.txt"));
  const Json j = Json::parse(read_file(a));
  CHECK(j["config"]["experiment"]["seed"] == 1);
  CHECK(j["scenes"].size() == 20);
  CHECK(j["variants"].size() == kVariantCount);

  CHECK(cli({"experiment", "--config", cfg, "--scenes", "5", "--out", a}).code == 1);
}

TEST_CASE("exit codes") {
  TempDir dir;
  const std::string cfg = small_config(dir);
  const fs::path scene = dir / "scene";
  REQUIRE(cli({"synth", "--config", cfg, "--out", scene.string(), "--quiet"}).code == 0);

  const Run help = cli({"--help"});
  CHECK(help.code == 0);
  CHECK(help.out.find("Usage") != std::string::npos);

  const Run unknown = cli({"synth", "--out", (dir / "x").string(), "--bogus"});
  CHECK(unknown.code == kExitValidation);
  CHECK(unknown.err.find("--bogus") != std::string::npos);
  CHECK(unknown.err.find("Usage") != std::string::npos);

  CHECK(cli({}).code == kExitValidation);
  CHECK(cli({"nonsense"}).code == kExitValidation);
  CHECK(cli({"select", "--out", (dir / "y").string()}).code == kExitValidation);
  CHECK(cli({"synth", "--out", (dir / "z").string(), "--jobs", "0"}).code ==
        kExitValidation);

  // Missing input container.
  const Run missing = cli({"select", "--input", (dir / "nothing").string(),
                           "--out", (dir / "o").string()});
  CHECK(missing.code == kExitIo);
  CHECK_FALSE(missing.err.empty());
  CHECK(cli({"synth", "--config", (dir / "absent.json").string(), "--out",
             (dir / "o").string()}).code == kExitIo);

  // Unknown config key, malformed config.
  write_file(dir / "bad.json", R"({"fusion": {"stuff_min_area": 3, "colour": 1}})");
  const Run bad = cli({"synth", "--config", (dir / "bad.json").string(), "--out",
                       (dir / "o").string()});
  CHECK(bad.code == kExitValidation);
  CHECK(bad.err.find("colour") != std::string::npos);
  write_file(dir / "broken.json", "{");
  CHECK(cli({"synth", "--config", (dir / "broken.json").string(), "--out",
             (dir / "o").string()}).code == kExitValidation);

  // Corrupted payload.
  std::string bytes = read_file(scene / "gt" / "panoptic.bin");
  bytes[0] = static_cast<char>(bytes[0] ^ 1);
  write_file(scene / "gt" / "panoptic.bin", bytes);
  const Run corrupt = cli({"eval", "--pred", (scene / "gt").string(), "--gt",
                           (scene / "gt").string()});
  CHECK(corrupt.code == kExitValidation);
  CHECK(corrupt.err.find("hash mismatch") != std::string::npos);

  // Wrong payload for the command.
  CHECK(cli({"fuse", "--input", (scene / "view0").string(), "--out",
             (dir / "f").string()}).code == kExitValidation);
  CHECK(cli({"isr", "--input", (scene / "view0").string(), "--out",
             (dir / "f").string()}).code == kExitValidation);
  CHECK(cli({"eval", "--pred", (scene / "view0").string(), "--pred",
             (scene / "view1").string(), "--gt", (scene / "gt").string()}).code ==
        kExitValidation);
}
