// Copyright 2026 The Malpipe Authors. All Rights Reserved.
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "malpipe/bundle.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <unistd.h>

#include <fstream>
#include <sstream>

#include "malpipe/errors.hpp"

namespace malpipe {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ModelError("cannot open " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ModelError("cannot write " + path.string());
}

json parse_json_file(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ModelError("corrupt bundle file " + path.string() + ": " + e.what());
  }
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Exclusive-create lock file released (and removed) on scope exit.
class BundleLock {
public:
  explicit BundleLock(const fs::path& dir) : path_(dir / ".lock") {
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0)
      throw ModelError("bundle directory " + dir.string() +
                       " is locked by another writer");
  }
  ~BundleLock() {
    ::close(fd_);
    ::unlink(path_.c_str());
  }
  BundleLock(const BundleLock&) = delete;
  BundleLock& operator=(const BundleLock&) = delete;

private:
  fs::path path_;
  int fd_;
};

json node_to_json(const TreeNode& node) {
  if (node.is_leaf()) return json{{"v", node.value}};
  return json{{"f", node.feature},
              {"t", static_cast<double>(node.threshold)},
              {"l", node.left},
              {"r", node.right}};
}

TreeNode node_from_json(const json& j) {
  TreeNode node;
  if (j.contains("v")) {
    node.value = j.at("v").get<double>();
    return node;
  }
  node.feature = j.at("f").get<int32_t>();
  node.threshold = static_cast<float>(j.at("t").get<double>());
  node.left = j.at("l").get<int32_t>();
  node.right = j.at("r").get<int32_t>();
  return node;
}

json hyperparams_to_json(const HyperParams& hp) {
  return json{{"n_trees", hp.n_trees},
              {"max_depth", hp.max_depth},
              {"max_leaves", hp.max_leaves},
              {"min_samples_leaf", hp.min_samples_leaf},
              {"learning_rate", hp.learning_rate},
              {"n_bins", hp.n_bins},
              {"feature_subsample_fraction", hp.feature_subsample_fraction},
              {"row_subsample_fraction", hp.row_subsample_fraction},
              {"min_split_gain", hp.min_split_gain},
              {"bootstrap", hp.bootstrap}};
}

HyperParams hyperparams_from_json(const json& j) {
  HyperParams hp;
  hp.n_trees = j.at("n_trees").get<int>();
  hp.max_depth = j.at("max_depth").get<int>();
  hp.max_leaves = j.at("max_leaves").get<int>();
  hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.n_bins = j.at("n_bins").get<int>();
  hp.feature_subsample_fraction = j.at("feature_subsample_fraction").get<double>();
  hp.row_subsample_fraction = j.at("row_subsample_fraction").get<double>();
  hp.min_split_gain = j.at("min_split_gain").get<double>();
  hp.bootstrap = j.at("bootstrap").get<bool>();
  return hp;
}

std::vector<float> floats_from_json(const json& j) {
  std::vector<float> out;
  out.reserve(j.size());
  for (const json& v : j) out.push_back(static_cast<float>(v.get<double>()));
  return out;
}

json floats_to_json(const std::vector<float>& values) {
  json out = json::array();
  for (float v : values) out.push_back(static_cast<double>(v));
  return out;
}

}  // namespace

json scalers_to_json(const ScalerChain& chain) {
  return json{{"feature_count", chain.feature_count},
              {"medians", floats_to_json(chain.robust.medians)},
              {"iqrs", floats_to_json(chain.robust.iqrs)},
              {"mins", floats_to_json(chain.minmax.mins)},
              {"maxes", floats_to_json(chain.minmax.maxes)}};
}

ScalerChain scalers_from_json(const json& j) {
  ScalerChain chain;
  chain.feature_count = j.at("feature_count").get<size_t>();
  chain.robust.medians = floats_from_json(j.at("medians"));
  chain.robust.iqrs = floats_from_json(j.at("iqrs"));
  chain.minmax.mins = floats_from_json(j.at("mins"));
  chain.minmax.maxes = floats_from_json(j.at("maxes"));
  if (chain.robust.medians.size() != chain.feature_count ||
      chain.robust.iqrs.size() != chain.feature_count ||
      chain.minmax.mins.size() != chain.feature_count ||
      chain.minmax.maxes.size() != chain.feature_count)
    throw ModelError("scaler parameter lengths disagree with feature_count");
  return chain;
}

json reducer_to_json(const Reducer& reducer) {
  if (const auto* sel = std::get_if<SelectionReducer>(&reducer)) {
    json indices = json::array();
    for (uint32_t idx : sel->selected_indices) indices.push_back(idx);
    return json{{"type", "selection"}, {"k", sel->k}, {"indices", indices}};
  }
  const PcaReducer& pca = std::get<PcaReducer>(reducer);
  json components = json::array();
  const size_t d = pca.input_dim();
  for (size_t i = 0; i < pca.k; ++i) {
    json row = json::array();
    for (size_t j = 0; j < d; ++j) row.push_back(pca.components[i * d + j]);
    components.push_back(std::move(row));
  }
  return json{{"type", "pca"}, {"k", pca.k}, {"mean", pca.mean},
              {"components", components}};
}

Reducer reducer_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "selection") {
    SelectionReducer sel;
    sel.k = j.at("k").get<size_t>();
    for (const json& v : j.at("indices")) sel.selected_indices.push_back(v.get<uint32_t>());
    if (sel.selected_indices.size() != sel.k)
      throw ModelError("selection reducer index count disagrees with k");
    return sel;
  }
  if (type == "pca") {
    PcaReducer pca;
    pca.k = j.at("k").get<size_t>();
    pca.mean = j.at("mean").get<std::vector<double>>();
    for (const json& row : j.at("components"))
      for (const json& v : row) pca.components.push_back(v.get<double>());
    if (pca.components.size() != pca.k * pca.mean.size())
      throw ModelError("pca reducer component shape disagrees with k and mean");
    return pca;
  }
  throw ModelError("unknown reducer type \"" + type + "\"");
}

json model_to_json(const ForestModel& model) {
  json trees = json::array();
  for (const Tree& tree : model.trees) {
    json nodes = json::array();
    for (const TreeNode& node : tree) nodes.push_back(node_to_json(node));
    trees.push_back(std::move(nodes));
  }
  return json{{"kind", to_string(model.kind)},
              {"base_score", model.base_score},
              {"learning_rate", model.learning_rate},
              {"seed", model.seed},
              {"n_features", model.n_features},
              {"hyperparams", hyperparams_to_json(model.hp)},
              {"trees", trees}};
}

ForestModel model_from_json(const json& j) {
  ForestModel model;
  model.kind = forest_kind_from_string(j.at("kind").get<std::string>());
  model.base_score = j.at("base_score").get<double>();
  model.learning_rate = j.at("learning_rate").get<double>();
  model.seed = j.at("seed").get<uint64_t>();
  model.n_features = j.at("n_features").get<size_t>();
  model.hp = hyperparams_from_json(j.at("hyperparams"));
  for (const json& nodes : j.at("trees")) {
    Tree tree;
    tree.reserve(nodes.size());
    for (const json& node : nodes) tree.push_back(node_from_json(node));
    model.trees.push_back(std::move(tree));
  }
  return model;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int digest_len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1)
    throw ModelError("sha256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(digest_len * 2);
  for (unsigned int i = 0; i < digest_len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path)); }

void save_bundle(const fs::path& dir, const ModelBundle& bundle, const json& manifest) {
  if (!bundle.ensemble.weights_set)
    throw ModelError("refusing to persist an ensemble without frozen weights");
  fs::create_directories(dir);
  BundleLock lock(dir);

  write_file(dir / "scalers.json", dump(scalers_to_json(bundle.scalers)));
  write_file(dir / "reducer.json", dump(reducer_to_json(bundle.reducer)));
  write_file(dir / "model_1.json", dump(model_to_json(bundle.ensemble.model_1)));
  write_file(dir / "model_2.json", dump(model_to_json(bundle.ensemble.model_2)));

  json grid = json::array();
  for (const GridEntry& entry : bundle.ensemble.grid_report)
    grid.push_back(json{{"w1", entry.w1}, {"accuracy", entry.accuracy}});
  write_file(dir / "vote.json", dump(json{{"w1", bundle.ensemble.w1},
                                          {"w2", bundle.ensemble.w2},
                                          {"grid_report", grid},
                                          {"tuner_trace", bundle.tuner_trace}}));

  json full_manifest = manifest;
  full_manifest["format_version"] = ModelBundle::kFormatVersion;
  write_file(dir / "manifest.json", dump(full_manifest));

  std::string checksums;
  for (const char* name : kBundlePayloadFiles)
    checksums += sha256_file(dir / name) + "  " + name + "\n";
  write_file(dir / "checksums.sha256", checksums);
}

json load_bundle_manifest(const fs::path& dir) {
  const json manifest = parse_json_file(dir / "manifest.json");
  if (!manifest.contains("format_version") ||
      manifest.at("format_version").get<int>() != ModelBundle::kFormatVersion)
    throw ModelError("unsupported bundle format_version in " + dir.string());
  return manifest;
}

ModelBundle load_bundle(const fs::path& dir) {
  load_bundle_manifest(dir);

  // Verify payload digests before trusting any content.
  const std::string checksum_text = read_file(dir / "checksums.sha256");
  std::istringstream lines(checksum_text);
  std::string expected, name;
  size_t verified = 0;
  while (lines >> expected >> name) {
    const std::string actual = sha256_file(dir / name);
    if (actual != expected) throw ModelError("checksum mismatch for " + name);
    ++verified;
  }
  if (verified < std::size(kBundlePayloadFiles))
    throw ModelError("bundle checksum file is incomplete");

  try {
    ModelBundle bundle;
    bundle.scalers = scalers_from_json(parse_json_file(dir / "scalers.json"));
    bundle.reducer = reducer_from_json(parse_json_file(dir / "reducer.json"));
    bundle.ensemble.model_1 = model_from_json(parse_json_file(dir / "model_1.json"));
    bundle.ensemble.model_2 = model_from_json(parse_json_file(dir / "model_2.json"));

    const json vote = parse_json_file(dir / "vote.json");
    bundle.ensemble.w1 = vote.at("w1").get<double>();
    bundle.ensemble.w2 = vote.at("w2").get<double>();
    for (const json& entry : vote.at("grid_report"))
      bundle.ensemble.grid_report.push_back(
          {entry.at("w1").get<double>(), entry.at("accuracy").get<double>()});
    bundle.tuner_trace = vote.at("tuner_trace");
    bundle.ensemble.weights_set = true;
    return bundle;
  } catch (const json::exception& e) {
    throw ModelError(std::string("corrupt bundle: ") + e.what());
  }
}

}  // namespace malpipe
