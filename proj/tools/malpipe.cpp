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

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "malpipe/errors.hpp"
#include "malpipe/pipeline.hpp"
#include "malpipe/synth.hpp"

namespace {

using malpipe::MetricsReport;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitUnexpected = 1;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitModel = 4;

void print_metrics_table(const char* title, const MetricsReport& report) {
  std::printf("%s\n", title);
  std::printf("  accuracy   %.6f\n", report.accuracy);
  std::printf("  precision  %.6f\n", report.precision);
  std::printf("  recall     %.6f\n", report.recall);
  std::printf("  f1         %.6f\n", report.f1);
  std::printf("  roc_auc    %.6f\n", report.auc);
  std::printf("  confusion  tp=%zu fp=%zu tn=%zu fn=%zu\n", report.tp, report.fp,
              report.tn, report.fn);
  if (report.degenerate)
    std::printf("  note       a zero-denominator metric was reported as 0\n");
}

int cmd_train(const std::string& config_path) {
  const malpipe::PipelineConfig cfg = malpipe::PipelineConfig::from_file(config_path);
  const malpipe::TrainResult result = malpipe::run_train(cfg);
  for (const malpipe::StageRecord& stage : result.stages)
    std::printf("stage %-14s %10.1f ms  (%zu rows x %zu cols)\n", stage.name.c_str(),
                stage.wall_ms, stage.rows, stage.cols);
  std::printf("vote weights: w1=%.1f w2=%.1f\n", result.w1, result.w2);
  print_metrics_table("validation metrics:", result.validation);
  std::printf("bundle: %s\n", result.bundle_dir.c_str());
  return kExitOk;
}

int cmd_evaluate(const std::string& bundle_dir, const std::string& data_path,
                 const std::string& roc_csv) {
  const malpipe::ModelBundle bundle = malpipe::load_bundle(bundle_dir);
  const malpipe::Dataset data =
      malpipe::io::load_dataset(data_path, malpipe::io::format_for_path(data_path));
  const MetricsReport report = malpipe::evaluate_bundle(bundle, data);

  if (!roc_csv.empty()) {
    std::ofstream out(roc_csv);
    if (!out) throw malpipe::DataError("cannot write " + roc_csv);
    out << "fpr,tpr\n";
    for (const auto& [fpr, tpr] : report.roc_points) out << fpr << "," << tpr << "\n";
  }

  json j = malpipe::metrics_to_json(report);
  std::printf("%s\n", j.dump(2).c_str());
  return kExitOk;
}

int cmd_predict(const std::string& bundle_dir, const std::string& data_path,
                const std::string& out_path) {
  const malpipe::ModelBundle bundle = malpipe::load_bundle(bundle_dir);
  const malpipe::Dataset data = malpipe::io::load_dataset(
      data_path, malpipe::io::format_for_path(data_path), /*require_labels=*/false);

  std::ofstream out(out_path);
  if (!out) throw malpipe::DataError("cannot write " + out_path);
  out << "row_id,probability,label\n";
  if (data.rows() == 0) {
    std::fprintf(stderr, "warning: %s has no rows; wrote a header-only file\n",
                 data_path.c_str());
    return kExitOk;
  }

  const auto [proba, labels] = malpipe::predict_with_bundle(bundle, data);
  char line[64];
  for (size_t r = 0; r < data.rows(); ++r) {
    std::snprintf(line, sizeof line, "%" PRIu64 ",%.17g,%d\n", data.row_ids[r], proba[r],
                  static_cast<int>(labels[r]));
    out << line;
  }
  if (!out) throw malpipe::DataError("cannot write " + out_path);
  return kExitOk;
}

int cmd_synth(const malpipe::SynthSpec& spec, const std::string& out_path) {
  const malpipe::Dataset data = malpipe::make_synthetic(spec);
  malpipe::io::save_dataset(data, out_path, malpipe::io::format_for_path(out_path));
  std::printf("wrote %zu rows x %zu cols to %s\n", data.rows(), data.cols(),
              out_path.c_str());
  return kExitOk;
}

int cmd_report(const std::string& bundle_dir) {
  const json manifest = malpipe::load_bundle_manifest(bundle_dir);
  std::printf("%s\n", manifest.dump(2).c_str());
  if (manifest.contains("metrics")) {
    for (const char* phase : {"validation", "test"}) {
      if (!manifest.at("metrics").contains(phase)) continue;
      const json& m = manifest.at("metrics").at(phase);
      std::printf("%-10s accuracy=%.6f precision=%.6f recall=%.6f f1=%.6f auc=%.6f\n",
                  phase, m.at("accuracy").get<double>(), m.at("precision").get<double>(),
                  m.at("recall").get<double>(), m.at("f1").get<double>(),
                  m.at("auc").get<double>());
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"malpipe: train and run weighted-vote tree ensembles on static "
               "malware feature vectors"};
  app.require_subcommand(1);

  std::string config_path;
  CLI::App* train = app.add_subcommand("train", "run the full training pipeline");
  train->add_option("--config", config_path, "pipeline config JSON")->required();

  std::string bundle_dir, data_path, roc_csv;
  CLI::App* evaluate = app.add_subcommand("evaluate", "score a labeled dataset");
  evaluate->add_option("--bundle", bundle_dir, "model bundle directory")->required();
  evaluate->add_option("--data", data_path, "dataset path (csv or mfbin)")->required();
  evaluate->add_option("--roc-csv", roc_csv, "write ROC curve points here");

  std::string predict_bundle, predict_data, predict_out;
  CLI::App* predict = app.add_subcommand("predict", "write per-row probabilities");
  predict->add_option("--bundle", predict_bundle, "model bundle directory")->required();
  predict->add_option("--data", predict_data, "dataset path; labels optional")->required();
  predict->add_option("--out", predict_out, "output CSV path")->required();

  malpipe::SynthSpec spec;
  std::string synth_out;
  CLI::App* synth = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  synth->add_option("--rows", spec.rows, "row count")->required();
  synth->add_option("--dims", spec.dims, "feature count")->required();
  synth->add_option("--informative", spec.informative, "features the label depends on")
      ->required();
  synth->add_option("--noise", spec.noise, "label flip probability")->required();
  synth->add_option("--seed", spec.seed, "generator seed")->required();
  synth->add_option("--out", synth_out, "output path (csv or mfbin)")->required();

  std::string report_bundle;
  CLI::App* report = app.add_subcommand("report", "print a bundle's manifest and metrics");
  report->add_option("--bundle", report_bundle, "model bundle directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) return cmd_train(config_path);
    if (*evaluate) return cmd_evaluate(bundle_dir, data_path, roc_csv);
    if (*predict) return cmd_predict(predict_bundle, predict_data, predict_out);
    if (*synth) return cmd_synth(spec, synth_out);
    if (*report) return cmd_report(report_bundle);
  } catch (const malpipe::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const malpipe::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const malpipe::ModelError& e) {
    std::fprintf(stderr, "model error: %s\n", e.what());
    return kExitModel;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUnexpected;
  }
  return kExitUnexpected;
}
