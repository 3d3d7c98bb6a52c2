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

#include <doctest.h>

#include <json.hpp>
#include <sstream>
#include <string>

#include "subprocess.hpp"

using nlohmann::json;
using testutil::CommandResult;
using testutil::run_command;

namespace {

const std::string kCli = MALPIPE_CLI_PATH;

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

size_t count_lines(const std::string& text) {
  size_t lines = 0;
  for (char c : text) lines += c == '\n';
  return lines;
}

std::string write_config(const testutil::TempDir& dir, const std::string& name,
                         const std::string& input, const std::string& output,
                         size_t k, const std::string& method = "selection") {
  json cfg{{"schema_version", 1},
           {"input", {{"path", input}}},
           {"seed", 9},
           {"reduction", {{"method", method}, {"k", k}}},
           {"learner", "gbdt_b"},
           {"hyperparams",
            {{"n_trees", 30}, {"max_leaves", 15}, {"min_samples_leaf", 5}}},
           {"output_dir", output}};
  const std::string path = dir.str(name);
  testutil::write_text_file(path, cfg.dump(2));
  return path;
}

}  // namespace

TEST_CASE("the cli carries a dataset from synth to report") {
  testutil::TempDir dir("cli");
  const std::string corpus = dir.str("corpus.csv");
  const std::string bundle = dir.str("bundle");

  CommandResult synth = run_command(kCli + " synth --rows 900 --dims 10 --informative 3" +
                                    " --noise 0.02 --seed 11 --out " + corpus);
  CHECK(synth.exit_code == 0);
  CHECK(contains(synth.output, "wrote 900 rows x 10 cols"));

  const std::string config = write_config(dir, "train.json", corpus, bundle, 4);
  CommandResult train = run_command(kCli + " train --config " + config);
  CHECK(train.exit_code == 0);
  CHECK(contains(train.output, "stage load"));
  CHECK(contains(train.output, "stage persist"));
  CHECK(contains(train.output, "vote weights: w1="));
  CHECK(contains(train.output, "validation metrics:"));
  CHECK(contains(train.output, "bundle: " + bundle));

  const std::string roc = dir.str("roc.csv");
  CommandResult evaluate = run_command(kCli + " evaluate --bundle " + bundle +
                                       " --data " + corpus + " --roc-csv " + roc);
  CHECK(evaluate.exit_code == 0);
  const json metrics = json::parse(evaluate.output);
  CHECK(metrics.at("accuracy").get<double>() >= 0.8);
  CHECK(metrics.at("auc").get<double>() >= 0.8);
  CHECK(metrics.at("tp").get<size_t>() + metrics.at("fp").get<size_t>() +
            metrics.at("tn").get<size_t>() + metrics.at("fn").get<size_t>() ==
        900);

  const std::string roc_text = testutil::read_text_file(roc);
  CHECK(roc_text.rfind("fpr,tpr\n", 0) == 0);
  CHECK(count_lines(roc_text) >= 3);

  const std::string pred = dir.str("pred.csv");
  CommandResult predict = run_command(kCli + " predict --bundle " + bundle +
                                      " --data " + corpus + " --out " + pred);
  CHECK(predict.exit_code == 0);
  const std::string pred_text = testutil::read_text_file(pred);
  CHECK(pred_text.rfind("row_id,probability,label\n", 0) == 0);
  CHECK(count_lines(pred_text) == 901);

  std::istringstream lines(pred_text);
  std::string line;
  std::getline(lines, line);  // header
  size_t row = 0;
  while (std::getline(lines, line)) {
    const size_t c1 = line.find(',');
    const size_t c2 = line.find(',', c1 + 1);
    REQUIRE(c2 != std::string::npos);
    CHECK(std::stoull(line.substr(0, c1)) == row);
    const double p = std::stod(line.substr(c1 + 1, c2 - c1 - 1));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    const std::string label = line.substr(c2 + 1);
    CHECK((label == "0" || label == "1"));
    CHECK((p >= 0.5) == (label == "1"));
    ++row;
  }
  CHECK(row == 900);

  CommandResult report = run_command(kCli + " report --bundle " + bundle);
  CHECK(report.exit_code == 0);
  CHECK(contains(report.output, "\"format_version\": 1"));
  CHECK(contains(report.output, "validation accuracy="));
  CHECK(contains(report.output, "test       accuracy="));
}

TEST_CASE("predicting an empty dataset writes only the header and warns") {
  testutil::TempDir dir("cliempty");
  const std::string corpus = dir.str("corpus.csv");
  const std::string bundle = dir.str("bundle");

  REQUIRE(run_command(kCli + " synth --rows 300 --dims 5 --informative 2" +
                      " --noise 0.05 --seed 4 --out " + corpus)
              .exit_code == 0);
  const std::string config = write_config(dir, "train.json", corpus, bundle, 3);
  REQUIRE(run_command(kCli + " train --config " + config).exit_code == 0);

  testutil::write_text_file(dir.str("empty.csv"), "f0,f1,f2,f3,f4\n");
  const std::string out = dir.str("empty_pred.csv");
  CommandResult predict = run_command(kCli + " predict --bundle " + bundle +
                                      " --data " + dir.str("empty.csv") + " --out " + out);
  CHECK(predict.exit_code == 0);
  CHECK(contains(predict.output, "has no rows"));
  CHECK(testutil::read_text_file(out) == "row_id,probability,label\n");
}

TEST_CASE("usage problems exit with the config code") {
  CHECK(run_command(kCli).exit_code == 2);
  CHECK(run_command(kCli + " train").exit_code == 2);  // missing --config
  CHECK(run_command(kCli + " train --config x.json --frobnicate").exit_code == 2);
  CHECK(run_command(kCli + " no_such_command").exit_code == 2);
  CHECK(run_command(kCli + " --help").exit_code == 0);
  CHECK(run_command(kCli + " synth --help").exit_code == 0);
}

TEST_CASE("failures map onto the documented exit codes") {
  testutil::TempDir dir("clifail");

  CommandResult missing_config =
      run_command(kCli + " train --config " + dir.str("absent.json"));
  CHECK(missing_config.exit_code == 2);
  CHECK(contains(missing_config.output, "config error:"));

  // reduction k wider than the corpus: a config-class failure at runtime
  const std::string corpus = dir.str("tiny.csv");
  REQUIRE(run_command(kCli + " synth --rows 120 --dims 4 --informative 2" +
                      " --noise 0.0 --seed 8 --out " + corpus)
              .exit_code == 0);
  const std::string wide = write_config(dir, "wide.json", corpus, dir.str("b1"), 40);
  CommandResult too_wide = run_command(kCli + " train --config " + wide);
  CHECK(too_wide.exit_code == 2);
  CHECK(contains(too_wide.output, "exceeds the feature count"));

  // single-class data: a data-class failure in the split stage
  testutil::write_text_file(dir.str("flat.csv"),
                            "f0,f1,label\n1,2,0\n3,4,0\n5,6,0\n7,8,0\n9,1,0\n2,7,0\n");
  const std::string flat = write_config(dir, "flat.json", dir.str("flat.csv"),
                                        dir.str("b2"), 2);
  CommandResult single = run_command(kCli + " train --config " + flat);
  CHECK(single.exit_code == 3);
  CHECK(contains(single.output, "data error: stage split"));

  CommandResult no_bundle =
      run_command(kCli + " report --bundle " + dir.str("nowhere"));
  CHECK(no_bundle.exit_code == 4);
  CHECK(contains(no_bundle.output, "model error:"));

  CommandResult no_data = run_command(kCli + " evaluate --bundle " + dir.str("nowhere") +
                                      " --data " + corpus);
  CHECK(no_data.exit_code == 4);  // bundle is opened before the data

  CommandResult bad_synth = run_command(kCli + " synth --rows 0 --dims 4 --informative 2" +
                                        " --noise 0.0 --seed 8 --out " + dir.str("x.csv"));
  CHECK(bad_synth.exit_code == 2);
  CHECK(contains(bad_synth.output, "config error:"));
}

TEST_CASE("a tampered bundle is rejected with the model code") {
  testutil::TempDir dir("clitamper");
  const std::string corpus = dir.str("c.csv");
  const std::string bundle = dir.str("bundle");
  REQUIRE(run_command(kCli + " synth --rows 200 --dims 5 --informative 2" +
                      " --noise 0.05 --seed 3 --out " + corpus)
              .exit_code == 0);
  const std::string config = write_config(dir, "cfg.json", corpus, bundle, 3);
  REQUIRE(run_command(kCli + " train --config " + config).exit_code == 0);

  std::string text = testutil::read_text_file(bundle + "/model_2.json");
  text += " ";
  testutil::write_text_file(bundle + "/model_2.json", text);

  CommandResult evaluate =
      run_command(kCli + " evaluate --bundle " + bundle + " --data " + corpus);
  CHECK(evaluate.exit_code == 4);
  CHECK(contains(evaluate.output, "checksum mismatch"));
}
