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


#include "cvreg/container.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string_view>
#include <vector>

#include "cvreg/errors.hpp"

namespace cvreg {
namespace fs = std::filesystem;

namespace {

using Bytes = std::vector<std::uint8_t>;

template <typename U>
void put_le(Bytes& out, U v) {
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
}

template <typename U>
U get_le(const std::uint8_t* p) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) {
    v |= static_cast<U>(static_cast<U>(p[b]) << (8 * b));
  }
  return v;
}

void put_f32(Bytes& out, float v) { put_le(out, std::bit_cast<std::uint32_t>(v)); }
float get_f32(const std::uint8_t* p) {
  return std::bit_cast<float>(get_le<std::uint32_t>(p));
}

struct Payload {
  std::string role;
  std::string dtype;
  std::vector<std::size_t> shape;
  std::string file;
  Bytes bytes;
};

Bytes encode_instances(const InstanceSet& set) {
  Json list = Json::array();
  for (const auto& inst : set.instances) {
    Json j = {{"category", inst.category},
              {"score", inst.score},
              {"runs", inst.mask.runs()}};
    if (inst.class_dist) j["class_dist"] = *inst.class_dist;
    list.push_back(std::move(j));
  }
  const std::string text = list.dump();
  return Bytes(text.begin(), text.end());
}

InstanceSet decode_instances(const Bytes& bytes, int height, int width) {
  InstanceSet set;
  set.height = height;
  set.width = width;
  Json list;
  try {
    list = Json::parse(bytes.begin(), bytes.end());
    if (!list.is_array()) throw ValidationError("instance_set: not a list");
    for (const auto& j : list) {
      Instance inst;
      inst.category = j.at("category").get<CategoryId>();
      inst.score = j.at("score").get<double>();
      if (auto it = j.find("class_dist"); it != j.end()) {
        inst.class_dist = it->get<std::vector<double>>();
      }
      inst.mask =
          RleMask(height, width, j.at("runs").get<std::vector<std::uint32_t>>());
      set.instances.push_back(std::move(inst));
    }
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("instance_set: ") + e.what());
  }
  return set;
}

std::vector<Payload> encode_payloads(const PredictionContainer& c) {
  const auto h = static_cast<std::size_t>(c.height);
  const auto w = static_cast<std::size_t>(c.width);
  auto check_dims = [&](int ph, int pw, const char* role) {
    if (ph != c.height || pw != c.width) {
      throw ValidationError(std::string(role) + ": dimensions " +
                            std::to_string(ph) + "x" + std::to_string(pw) +
                            " do not match container " +
                            std::to_string(c.height) + "x" +
                            std::to_string(c.width));
    }
  };
  std::vector<Payload> out;
  if (c.semantic_probs) {
    const auto& p = *c.semantic_probs;
    check_dims(p.height(), p.width(), "semantic_probs");
    validate(p, c.catalog);
    Payload pl{"semantic_probs", "f32",
               {static_cast<std::size_t>(p.num_categories()), h, w},
               "semantic_probs.bin", {}};
    pl.bytes.reserve(p.data().size() * 4);
    for (float v : p.data()) put_f32(pl.bytes, v);
    out.push_back(std::move(pl));
  }
  if (c.semantic_labels) {
    const auto& l = *c.semantic_labels;
    check_dims(l.height, l.width, "semantic_labels");
    validate(l, c.catalog);
    Payload pl{"semantic_labels", "u16", {h, w}, "semantic_labels.bin", {}};
    for (CategoryId v : l.labels) put_le<std::uint16_t>(pl.bytes, v);
    out.push_back(std::move(pl));
  }
  if (c.instance_set) {
    const auto& s = *c.instance_set;
    check_dims(s.height, s.width, "instance_set");
    validate(s, c.catalog);
    Bytes bytes = encode_instances(s);
    const std::size_t n = bytes.size();
    out.push_back({"instance_set", "u8", {n}, "instance_set.json",
                   std::move(bytes)});
  }
  if (c.panoptic) {
    const auto& m = *c.panoptic;
    check_dims(m.height, m.width, "panoptic");
    validate(m, c.catalog);
    Payload pl{"panoptic", "u16", {h, w}, "panoptic.bin", {}};
    for (const auto& s : m.segments) put_le(pl.bytes, encode_panoptic(s));
    out.push_back(std::move(pl));
  }
  if (c.image) {
    const auto& img = *c.image;
    check_dims(img.height, img.width, "image");
    img.validate();
    out.push_back({"image", "u8", {h, w, 3}, "image.bin", img.samples});
  }
  if (c.entropy) {
    const auto& e = *c.entropy;
    check_dims(e.height, e.width, "entropy");
    if (e.values.size() != h * w) {
      throw ValidationError("entropy: value count does not match dimensions");
    }
    Payload pl{"entropy", "f32", {h, w}, "entropy.bin", {}};
    for (double v : e.values) put_f32(pl.bytes, static_cast<float>(v));
    out.push_back(std::move(pl));
  }
  return out;
}

void write_file_atomic(const fs::path& path, const std::uint8_t* data,
                       std::size_t size) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + tmp.string() + " for writing");
    f.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(size));
    if (!f) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

Bytes read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(f),
               std::istreambuf_iterator<char>());
}

constexpr std::array<std::string_view, 6> kRoles = {
    "semantic_probs", "semantic_labels", "instance_set",
    "panoptic",       "image",           "entropy"};

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "f32") return 4;
  if (dtype == "u16") return 2;
  if (dtype == "u8") return 1;
  throw ValidationError("manifest: unknown dtype '" + dtype + "'");
}

void expect_layout(const std::string& role, const std::string& dtype,
                   const std::vector<std::size_t>& shape,
                   const std::string& want_dtype,
                   const std::vector<std::size_t>& want_shape) {
  if (dtype != want_dtype) {
    throw ValidationError(role + ": dtype " + dtype + ", expected " +
                          want_dtype);
  }
  if (shape != want_shape) {
    throw ValidationError(role + ": shape does not match the container");
  }
}

}  // namespace

std::uint16_t encode_panoptic(PanopticLabel label) {
  if (label.instance > kMaxInstanceId) {
    throw ValidationError("panoptic: instance id " +
                          std::to_string(label.instance) + " exceeds " +
                          std::to_string(kMaxInstanceId));
  }
  const std::uint32_t v =
      static_cast<std::uint32_t>(label.category) * kPanopticLabelDivisor +
      label.instance;
  if (v > 0xFFFF) {
    throw ValidationError("panoptic: category " +
                          std::to_string(label.category) +
                          " does not fit the u16 encoding");
  }
  return static_cast<std::uint16_t>(v);
}

PanopticLabel decode_panoptic(std::uint16_t value) {
  return {static_cast<CategoryId>(value / kPanopticLabelDivisor),
          static_cast<std::uint16_t>(value % kPanopticLabelDivisor)};
}

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest.data(), &len,
                 EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("sha256: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

void write_container(const PredictionContainer& c, const fs::path& dir) {
  if (c.height < 1 || c.width < 1) {
    throw ValidationError("container: dimensions must be positive");
  }
  const std::vector<Payload> payloads = encode_payloads(c);
  if (payloads.empty()) throw ValidationError("container: no payloads");

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  Json entries = Json::array();
  for (const auto& p : payloads) {
    write_file_atomic(dir / p.file, p.bytes.data(), p.bytes.size());
    entries.push_back({{"role", p.role},
                       {"dtype", p.dtype},
                       {"shape", p.shape},
                       {"file", p.file},
                       {"sha256", sha256_hex(p.bytes)}});
  }
  Json manifest = {{"format_version", kContainerFormatVersion},
                   {"byte_order", "little"},
                   {"catalog", to_json(c.catalog)},
                   {"height", c.height},
                   {"width", c.width},
                   {"entries", std::move(entries)}};
  if (c.weights) manifest["weights"] = to_json(*c.weights);
  if (!c.config.is_null()) manifest["config"] = c.config;
  const std::string text = manifest.dump(2) + "\n";
  write_file_atomic(dir / kManifestName,
                    reinterpret_cast<const std::uint8_t*>(text.data()),
                    text.size());
}

PredictionContainer read_container(const fs::path& dir) {
  const fs::path manifest_path = dir / kManifestName;
  if (!fs::exists(manifest_path)) {
    throw IoError("missing " + manifest_path.string());
  }
  const Bytes manifest_bytes = read_file(manifest_path);
  Json m;
  try {
    m = Json::parse(manifest_bytes.begin(), manifest_bytes.end());
  } catch (const Json::exception& e) {
    throw ValidationError("manifest: " + std::string(e.what()));
  }

  int version = 0;
  std::string byte_order;
  int height = 0;
  int width = 0;
  try {
    version = m.at("format_version").get<int>();
    if (version != kContainerFormatVersion) {
      throw ValidationError("manifest: unsupported format_version " +
                            std::to_string(version));
    }
    byte_order = m.at("byte_order").get<std::string>();
    height = m.at("height").get<int>();
    width = m.at("width").get<int>();
  } catch (const Json::exception& e) {
    throw ValidationError("manifest: " + std::string(e.what()));
  }
  if (byte_order != "little") {
    throw ValidationError("manifest: unsupported byte_order '" + byte_order +
                          "'");
  }
  if (height < 1 || width < 1) {
    throw ValidationError("manifest: dimensions must be positive");
  }

  if (!m.contains("catalog")) throw ValidationError("manifest: missing catalog");
  PredictionContainer c(catalog_from_json(m["catalog"]));
  c.height = height;
  c.width = width;
  const auto h = static_cast<std::size_t>(height);
  const auto w = static_cast<std::size_t>(width);
  const std::size_t n = h * w;

  if (!m.contains("entries") || !m["entries"].is_array()) {
    throw ValidationError("manifest: missing entries");
  }
  std::vector<std::string> seen;
  for (const auto& e : m["entries"]) {
    std::string role, dtype, file, hash;
    std::vector<std::size_t> shape;
    try {
      role = e.at("role").get<std::string>();
      dtype = e.at("dtype").get<std::string>();
      shape = e.at("shape").get<std::vector<std::size_t>>();
      file = e.at("file").get<std::string>();
      hash = e.at("sha256").get<std::string>();
    } catch (const Json::exception& ex) {
      throw ValidationError("manifest entry: " + std::string(ex.what()));
    }
    if (std::find(kRoles.begin(), kRoles.end(), role) == kRoles.end()) {
      throw ValidationError("manifest: unknown role '" + role + "'");
    }
    if (std::find(seen.begin(), seen.end(), role) != seen.end()) {
      throw ValidationError("manifest: duplicate role '" + role + "'");
    }
    seen.push_back(role);
    const fs::path rel(file);
    if (rel.is_absolute() || rel.parent_path() != fs::path()) {
      throw ValidationError(role + ": payload file must be a plain name");
    }
    const fs::path path = dir / rel;
    if (!fs::exists(path)) {
      throw IoError(role + ": missing payload file " + path.string());
    }
    const Bytes bytes = read_file(path);
    if (sha256_hex(bytes) != hash) {
      throw ValidationError("hash mismatch in entry '" + role + "' (" + file +
                            ")");
    }
    std::size_t expected = dtype_size(dtype);
    for (std::size_t d : shape) expected *= d;
    if (bytes.size() != expected) {
      throw ValidationError(role + ": payload has " +
                            std::to_string(bytes.size()) + " bytes, shape needs " +
                            std::to_string(expected));
    }

    if (role == "semantic_probs") {
      const std::size_t cats = c.catalog.size();
      expect_layout(role, dtype, shape, "f32", {cats, h, w});
      std::vector<float> probs(cats * n);
      for (std::size_t i = 0; i < probs.size(); ++i) {
        probs[i] = get_f32(bytes.data() + 4 * i);
      }
      c.semantic_probs.emplace(height, width, static_cast<int>(cats),
                               std::move(probs));
      validate(*c.semantic_probs, c.catalog);
    } else if (role == "semantic_labels") {
      expect_layout(role, dtype, shape, "u16", {h, w});
      SemanticLabelMap l{height, width, std::vector<CategoryId>(n)};
      for (std::size_t i = 0; i < n; ++i) {
        l.labels[i] = get_le<std::uint16_t>(bytes.data() + 2 * i);
      }
      validate(l, c.catalog);
      c.semantic_labels = std::move(l);
    } else if (role == "instance_set") {
      if (dtype != "u8" || shape.size() != 1) {
        throw ValidationError(role + ": expected a u8 byte string");
      }
      c.instance_set = decode_instances(bytes, height, width);
      validate(*c.instance_set, c.catalog);
    } else if (role == "panoptic") {
      expect_layout(role, dtype, shape, "u16", {h, w});
      PanopticMap p{height, width, std::vector<PanopticLabel>(n)};
      for (std::size_t i = 0; i < n; ++i) {
        p.segments[i] =
            decode_panoptic(get_le<std::uint16_t>(bytes.data() + 2 * i));
      }
      validate(p, c.catalog);
      c.panoptic = std::move(p);
    } else if (role == "image") {
      expect_layout(role, dtype, shape, "u8", {h, w, 3});
      c.image = RgbImage{height, width, bytes};
    } else {
      expect_layout(role, dtype, shape, "f32", {h, w});
      EntropyMap em{height, width, std::vector<double>(n)};
      for (std::size_t i = 0; i < n; ++i) {
        const double v = get_f32(bytes.data() + 4 * i);
        if (!(v >= 0.0 && v <= 1.0)) {
          throw ValidationError("entropy: value out of [0,1]");
        }
        em.values[i] = v;
      }
      c.entropy = std::move(em);
    }
  }
  if (m.contains("weights")) c.weights = weights_from_json(m["weights"], c.catalog);
  if (m.contains("config")) c.config = m["config"];
  return c;
}

}  // namespace cvreg
