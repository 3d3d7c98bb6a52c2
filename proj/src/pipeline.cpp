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

#include "malpipe/pipeline.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include "malpipe/errors.hpp"
#include "malpipe/reducer.hpp"
#include "malpipe/runtime.hpp"
#include "malpipe/synth.hpp"

namespace malpipe {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Seed streams, one per randomized stage.
constexpr uint64_t kSelectionStream = 101;
constexpr uint64_t kTunerStream1 = 201;
constexpr uint64_t kTunerStream2 = 202;
constexpr uint64_t kModelStream1 = 301;
constexpr uint64_t kModelStream2 = 302;

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* name : allowed) known = known || key == name;
    if (!known) throw ConfigError("unknown key \"" + key + "\" in " + where);
  }
}

HyperParams hyperparams_overrides(HyperParams hp, const json& j) {
  require_keys(j,
               {"n_trees", "max_depth", "max_leaves", "min_samples_leaf", "learning_rate",
                "n_bins", "feature_subsample_fraction", "row_subsample_fraction",
                "min_split_gain", "bootstrap"},
               "hyperparams");
  if (j.contains("n_trees")) hp.n_trees = j.at("n_trees").get<int>();
  if (j.contains("max_depth")) hp.max_depth = j.at("max_depth").get<int>();
  if (j.contains("max_leaves")) hp.max_leaves = j.at("max_leaves").get<int>();
  if (j.contains("min_samples_leaf")) hp.min_samples_leaf = j.at("min_samples_leaf").get<int>();
  if (j.contains("learning_rate")) hp.learning_rate = j.at("learning_rate").get<double>();
  if (j.contains("n_bins")) hp.n_bins = j.at("n_bins").get<int>();
  if (j.contains("feature_subsample_fraction"))
    hp.feature_subsample_fraction = j.at("feature_subsample_fraction").get<double>();
  if (j.contains("row_subsample_fraction"))
    hp.row_subsample_fraction = j.at("row_subsample_fraction").get<double>();
  if (j.contains("min_split_gain")) hp.min_split_gain = j.at("min_split_gain").get<double>();
  if (j.contains("bootstrap")) hp.bootstrap = j.at("bootstrap").get<bool>();
  return hp;
}

std::string iso8601_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class StageLog {
public:
  explicit StageLog(std::vector<StageRecord>& records) : records_(records) {}

  template <typename F>
  auto run(const std::string& name, size_t rows, size_t cols, F&& body) {
    current_ = name;
    peak_cells_ = std::max(peak_cells_, rows * cols);
    const auto start = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(body())>) {
      body();
      finish(name, rows, cols, start);
    } else {
      auto result = body();
      finish(name, rows, cols, start);
      return result;
    }
  }

  const std::string& current() const { return current_; }
  size_t peak_cells() const { return peak_cells_; }

private:
  void finish(const std::string& name, size_t rows, size_t cols,
              std::chrono::steady_clock::time_point start) {
    const std::chrono::duration<double, std::milli> elapsed =
        std::chrono::steady_clock::now() - start;
    records_.push_back({name, elapsed.count(), rows, cols});
  }

  std::vector<StageRecord>& records_;
  std::string current_;
  size_t peak_cells_ = 0;
};

void remove_partial_bundle(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) return;
  for (const char* name : kBundlePayloadFiles) fs::remove(dir / name, ec);
  fs::remove(dir / "manifest.json", ec);
  fs::remove(dir / "checksums.sha256", ec);
  fs::remove(dir / ".lock", ec);
  fs::remove(dir, ec);  // only succeeds when nothing else lives there
}

json tuner_trace_json(int instance, const TunerResult& result) {
  json trials = json::array();
  for (const TunerTrial& trial : result.trace) {
    json params{{"n_trees", trial.hp.n_trees},
                {"max_depth", trial.hp.max_depth},
                {"max_leaves", trial.hp.max_leaves},
                {"min_samples_leaf", trial.hp.min_samples_leaf},
                {"learning_rate", trial.hp.learning_rate}};
    trials.push_back(json{{"params", std::move(params)},
                          {"score", trial.failed ? json() : json(trial.score)},
                          {"failed", trial.failed}});
  }
  return json{{"instance", instance}, {"best_trial", result.best_trial},
              {"trials", std::move(trials)}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& j) {
  require_keys(j,
               {"schema_version", "input", "seed", "split", "reduction", "learner",
                "hyperparams", "tuner", "output_dir"},
               "config");
  if (!j.contains("schema_version") || j.at("schema_version").get<int>() != 1)
    throw ConfigError("config schema_version must be 1");
  if (!j.contains("seed")) throw ConfigError("config requires an explicit seed");

  PipelineConfig cfg;
  try {
    const json& input = j.at("input");
    require_keys(input, {"path", "format"}, "input");
    cfg.input_path = input.at("path").get<std::string>();
    if (input.contains("format")) {
      const std::string format = input.at("format").get<std::string>();
      if (format == "csv")
        cfg.input_format = io::Format::csv;
      else if (format == "mfbin")
        cfg.input_format = io::Format::mfbin;
      else
        throw ConfigError("input format must be \"csv\" or \"mfbin\"");
    } else {
      cfg.input_format = io::format_for_path(cfg.input_path);
    }

    cfg.seed = j.at("seed").get<uint64_t>();

    if (j.contains("split")) {
      const json& split = j.at("split");
      require_keys(split, {"train", "validation", "test"}, "split");
      cfg.train_fraction = split.at("train").get<double>();
      cfg.validation_fraction = split.at("validation").get<double>();
      cfg.test_fraction = split.at("test").get<double>();
    }

    const json& reduction = j.at("reduction");
    require_keys(reduction, {"method", "k"}, "reduction");
    const std::string method = reduction.at("method").get<std::string>();
    if (method == "selection")
      cfg.reduction.method = ReductionConfig::Method::selection;
    else if (method == "pca")
      cfg.reduction.method = ReductionConfig::Method::pca;
    else
      throw ConfigError("reduction method must be \"selection\" or \"pca\"");
    cfg.reduction.k = reduction.at("k").get<size_t>();
    if (cfg.reduction.k < 1) throw ConfigError("reduction k must be >= 1");

    cfg.learner = forest_kind_from_string(j.at("learner").get<std::string>());
    if (j.contains("hyperparams"))
      cfg.hp = hyperparams_overrides(cfg.hp, j.at("hyperparams"));

    if (j.contains("tuner")) {
      const json& tuner = j.at("tuner");
      require_keys(tuner, {"n_trials"}, "tuner");
      cfg.tuner_enabled = true;
      if (tuner.contains("n_trials")) cfg.tuner_trials = tuner.at("n_trials").get<int>();
      if (cfg.tuner_trials < 1) throw ConfigError("tuner n_trials must be >= 1");
    }

    cfg.output_dir = j.at("output_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }

  SplitSpec spec{cfg.train_fraction, cfg.validation_fraction, cfg.test_fraction, cfg.seed};
  spec.validate();
  cfg.hp.validate();
  return cfg;
}

PipelineConfig PipelineConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    json j;
    in >> j;
    return from_json(j);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

json PipelineConfig::to_json() const {
  json j{{"schema_version", 1},
         {"input", {{"path", input_path},
                    {"format", input_format == io::Format::csv ? "csv" : "mfbin"}}},
         {"seed", seed},
         {"split", {{"train", train_fraction},
                    {"validation", validation_fraction},
                    {"test", test_fraction}}},
         {"reduction",
          {{"method", reduction.method == ReductionConfig::Method::selection ? "selection"
                                                                             : "pca"},
           {"k", reduction.k}}},
         {"learner", to_string(learner)},
         {"hyperparams", {{"n_trees", hp.n_trees},
                          {"max_depth", hp.max_depth},
                          {"max_leaves", hp.max_leaves},
                          {"min_samples_leaf", hp.min_samples_leaf},
                          {"learning_rate", hp.learning_rate},
                          {"n_bins", hp.n_bins},
                          {"feature_subsample_fraction", hp.feature_subsample_fraction},
                          {"row_subsample_fraction", hp.row_subsample_fraction},
                          {"min_split_gain", hp.min_split_gain},
                          {"bootstrap", hp.bootstrap}}},
         {"output_dir", output_dir}};
  if (tuner_enabled) j["tuner"] = json{{"n_trials", tuner_trials}};
  return j;
}

json metrics_to_json(const MetricsReport& report) {
  return json{{"accuracy", report.accuracy}, {"precision", report.precision},
              {"recall", report.recall},     {"f1", report.f1},
              {"auc", report.auc},           {"tp", report.tp},
              {"fp", report.fp},             {"tn", report.tn},
              {"fn", report.fn},             {"degenerate", report.degenerate}};
}

TrainResult run_train(const PipelineConfig& cfg) {
  TrainResult result;
  StageLog log(result.stages);
  const fs::path bundle_dir(cfg.output_dir);
  const bool bundle_dir_existed = fs::exists(bundle_dir);
  bool persist_started = false;

  try {
    Dataset raw = log.run("load", 0, 0, [&] {
      return io::load_dataset(cfg.input_path, cfg.input_format);
    });
    result.stages.back().rows = raw.rows();
    result.stages.back().cols = raw.cols();
    if (cfg.reduction.k > raw.cols())
      throw ConfigError("reduction k " + std::to_string(cfg.reduction.k) +
                        " exceeds the feature count " + std::to_string(raw.cols()));

    Dataset data;
    log.run("clean", raw.rows(), raw.cols(), [&] {
      auto [cleaned, report] = clean(raw);
      data = std::move(cleaned);
      result.clean_report = report;
    });
    raw = Dataset{};

    SplitResult split = log.run("split", data.rows(), data.cols(), [&] {
      const SplitSpec spec{cfg.train_fraction, cfg.validation_fraction,
                           cfg.test_fraction, cfg.seed};
      return stratified_split(data, spec);
    });
    data = Dataset{};
    // The raw-dimension halves are recomputed after reduction; the row
    // assignment depends only on (row_ids, labels, seed) so it matches.
    split.partition_a = Dataset{};
    split.partition_b = Dataset{};

    const ScalerChain scalers = log.run("fit_scalers", split.train.rows(),
                                        split.train.cols(),
                                        [&] { return fit_scaler_chain(split.train); });
    log.run("transform", split.train.rows() + split.validation.rows() + split.test.rows(),
            split.train.cols(), [&] {
              split.train = transform(scalers, split.train);
              split.validation = transform(scalers, split.validation);
              split.test = transform(scalers, split.test);
            });

    const Reducer reducer = log.run("fit_reducer", split.train.rows(), split.train.cols(), [&] {
      if (cfg.reduction.method == ReductionConfig::Method::selection)
        return Reducer(fit_selection(split.train, cfg.reduction.k,
                                     mix_seed(cfg.seed, kSelectionStream)));
      return Reducer(fit_pca(split.train, cfg.reduction.k));
    });
    log.run("reduce", split.train.rows() + split.validation.rows() + split.test.rows(),
            split.train.cols(), [&] {
              split.train = apply_reducer(reducer, split.train);
              split.validation = apply_reducer(reducer, split.validation);
              split.test = apply_reducer(reducer, split.test);
            });

    std::vector<Dataset> partitions = log.run("partition", split.train.rows(),
                                              split.train.cols(), [&] {
      return stratified_allocate(split.train, {0.5, 0.5}, cfg.seed + 1);
    });
    Dataset& partition_a = partitions[0];
    Dataset& partition_b = partitions[1];

    HyperParams hp_1 = cfg.hp;
    HyperParams hp_2 = cfg.hp;
    json tuner_trace = json::array();
    json tuned_hyperparams;
    if (cfg.tuner_enabled) {
      log.run("tune", partition_a.rows() + partition_b.rows(), partition_a.cols(), [&] {
        TunerConfig tuner;
        tuner.n_trials = cfg.tuner_trials;
        tuner.base = cfg.hp;
        tuner.seed = mix_seed(cfg.seed, kTunerStream1);
        const TunerResult res_1 = tune(cfg.learner, partition_a, split.validation, tuner);
        tuner.seed = mix_seed(cfg.seed, kTunerStream2);
        const TunerResult res_2 = tune(cfg.learner, partition_b, split.validation, tuner);
        hp_1 = res_1.best;
        hp_2 = res_2.best;
        tuner_trace.push_back(tuner_trace_json(1, res_1));
        tuner_trace.push_back(tuner_trace_json(2, res_2));
      });
    }

    ModelBundle bundle;
    bundle.scalers = scalers;
    bundle.reducer = reducer;
    bundle.tuner_trace = std::move(tuner_trace);
    log.run("train_models", partition_a.rows() + partition_b.rows(), partition_a.cols(), [&] {
      bundle.ensemble = train_ensemble(
          partition_a, partition_b, cfg.learner, hp_1, hp_2,
          {mix_seed(cfg.seed, kModelStream1), mix_seed(cfg.seed, kModelStream2)});
    });

    log.run("weight_search", split.validation.rows(), split.validation.cols(),
            [&] { search_weights(bundle.ensemble, split.validation); });
    result.w1 = bundle.ensemble.w1;
    result.w2 = bundle.ensemble.w2;

    log.run("evaluate", split.validation.rows() + split.test.rows(),
            split.validation.cols(), [&] {
              auto [val_proba, val_labels] = predict(bundle.ensemble, split.validation);
              result.validation =
                  evaluate_metrics(split.validation.labels, val_proba, val_labels);
              auto [test_proba, test_labels] = predict(bundle.ensemble, split.test);
              result.test = evaluate_metrics(split.test.labels, test_proba, test_labels);
            });

    log.run("persist", 0, 0, [&] {
      persist_started = true;
      const json config_echo = cfg.to_json();
      json stages = json::array();
      for (const StageRecord& record : result.stages)
        stages.push_back(json{{"name", record.name},
                              {"wall_ms", record.wall_ms},
                              {"rows", record.rows},
                              {"cols", record.cols}});
      const json manifest{
          {"config", config_echo},
          {"config_sha256", sha256_hex(config_echo.dump())},
          {"seed", cfg.seed},
          {"clean_report", {{"missing_removed", result.clean_report.missing_removed},
                            {"duplicates_removed", result.clean_report.duplicates_removed},
                            {"conflicts_removed", result.clean_report.conflicts_removed}}},
          {"n_features_raw", scalers.feature_count},
          {"split_rows", {{"train", partition_a.rows() + partition_b.rows()},
                          {"validation", split.validation.rows()},
                          {"test", split.test.rows()},
                          {"partition_a", partition_a.rows()},
                          {"partition_b", partition_b.rows()}}},
          {"tuned", cfg.tuner_enabled},
          {"weights", {{"w1", bundle.ensemble.w1}, {"w2", bundle.ensemble.w2}}},
          {"metrics", {{"validation", metrics_to_json(result.validation)},
                       {"test", metrics_to_json(result.test)}}},
          {"telemetry", {{"created_at", iso8601_now()},
                         {"stages", stages},
                         {"peak_bytes_estimate", log.peak_cells() * 16},
                         {"threads", runtime::thread_count()}}}};
      save_bundle(bundle_dir, bundle, manifest);
    });

    result.bundle_dir = bundle_dir;
    return result;
  } catch (const std::exception&) {
    if (persist_started || !bundle_dir_existed) remove_partial_bundle(bundle_dir);
    const std::string prefix = "stage " + log.current() + ": ";
    try {
      throw;
    } catch (const ConfigError& e) {
      throw ConfigError(prefix + e.what());
    } catch (const DataError& e) {
      throw DataError(prefix + e.what());
    } catch (const ModelError& e) {
      throw ModelError(prefix + e.what());
    }
  }
}

MetricsReport evaluate_bundle(const ModelBundle& bundle, const Dataset& raw) {
  auto [proba, labels] = predict_with_bundle(bundle, raw);
  return evaluate_metrics(raw.labels, proba, labels);
}

std::pair<std::vector<double>, std::vector<uint8_t>> predict_with_bundle(
    const ModelBundle& bundle, const Dataset& raw) {
  if (raw.cols() != bundle.scalers.feature_count)
    throw DataError("bundle expects " + std::to_string(bundle.scalers.feature_count) +
                    " features, data has " + std::to_string(raw.cols()));
  const Dataset scaled = transform(bundle.scalers, raw);
  const Dataset reduced = apply_reducer(bundle.reducer, scaled);
  return predict(bundle.ensemble, reduced);
}

}  // namespace malpipe
