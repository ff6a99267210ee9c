/*
 * Copyright 2026 The driftbench authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <cstdlib>
#include <filesystem>

#include "drift/blobs.hpp"
#include "drift/config.hpp"
#include "drift/dataset.hpp"

#include "doctest.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace drift;
namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(DRIFTBENCH_CLI_PATH) + " " + args +
                          " >" + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

Json minimal_config(const fs::path& csv, const fs::path& out_dir) {
  Json columns;
  for (int i = 0; i < 6; ++i) columns["x" + std::to_string(i)] = "numeric";
  columns["c0"] = "categorical";
  columns["segment"] = "categorical";
  columns["label"] = "categorical";
  Json j;
  j["dataset"] = {{"path", csv.string()},
                  {"label", "label"},
                  {"columns", columns},
                  {"split", {{"variable", "segment"}, {"source", "a"}}}};
  j["protocol"] = {{"n_samples", 120},
                   {"runs", 1},
                   {"scenarios_per_kind", 2},
                   {"primary_forest", {{"n_trees", 30}}},
                   {"domain_forest", {{"n_trees", 15}, {"min_leaf", 10}}},
                   {"expert_regressor", {{"n_trees", 25}}}};
  j["predictors"] = Json::array(
      {{{"kind", "ATC"}},
       {{"kind", "ErrorPredictorRF"},
        {"forest", {{"n_trees", 20}, {"max_depth", 10}, {"min_leaf", 4}}},
        {"max_rows", 2000}}});
  j["output"] = {{"dir", out_dir.string()}, {"save_models", true}};
  j["seed"] = 5;
  return j;
}

}  // namespace

TEST_CASE("shift subcommand negates a numeric CSV with FlipSign") {
  const auto dir = test::temp_dir("cli_shift");
  const auto input = dir / "in.csv";
  test::write_file(input, "a,b,label\n1,2,x\n-3,4,y\n5,-6,x\n");
  const auto output = dir / "out.csv";
  const int code = run_cli("shift --input " + input.string() + " --out " +
                               output.string() +
                               " --kind FlipSign --samples 1.0 --features 1.0",
                           dir / "log.txt");
  REQUIRE(code == 0);
  Schema schema{{"a", ColumnKind::kNumeric},
                {"b", ColumnKind::kNumeric},
                {"label", ColumnKind::kCategorical}};
  const Dataset shifted = load_csv(output.string(), schema, "label");
  CHECK(shifted.at(0, 0) == -1.0);
  CHECK(shifted.at(1, 1) == -4.0);
  CHECK(fs::exists(output.string() + ".shift.json"));
}

TEST_CASE("shift subcommand halves the majority class with KnockOut") {
  const auto dir = test::temp_dir("cli_knockout");
  const auto input = dir / "in.csv";
  std::string csv = "a,label\n";
  for (int i = 0; i < 100; ++i) {
    csv += std::to_string(i) + "," + (i < 80 ? "maj" : "min") + "\n";
  }
  test::write_file(input, csv);
  const auto output = dir / "out.csv";
  const int code = run_cli("shift --input " + input.string() + " --out " +
                               output.string() + " --kind KnockOut --samples 0.5",
                           dir / "log.txt");
  REQUIRE(code == 0);
  Schema schema{{"a", ColumnKind::kNumeric}, {"label", ColumnKind::kCategorical}};
  const Dataset shifted = load_csv(output.string(), schema, "label");
  CHECK(shifted.n_rows() == 60);
}

TEST_CASE("unknown shift kind exits with usage code 2") {
  const auto dir = test::temp_dir("cli_badkind");
  const auto input = dir / "in.csv";
  test::write_file(input, "a,label\n1,x\n2,y\n");
  const int code = run_cli("shift --input " + input.string() + " --out " +
                               (dir / "out.csv").string() + " --kind Nope",
                           dir / "log.txt");
  CHECK(code == 2);
}

TEST_CASE("bench dry run prints the planned scenario counts") {
  const auto dir = test::temp_dir("cli_dry");
  const auto csv = dir / "blobs.csv";
  write_csv(make_synthetic_blobs(900, 3), csv.string(), "label");
  const auto config = dir / "config.json";
  test::write_file(config, minimal_config(csv, dir / "out").dump(2));
  const auto log = dir / "log.txt";
  const int code =
      run_cli("bench --config " + config.string() + " --dry-run", log);
  REQUIRE(code == 0);
  const std::string text = test::read_file(log);
  CHECK(text.find("train scenarios: 5 x 2 = 10") != std::string::npos);
  CHECK(text.find("ErrorPredictorRF") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out" / "aggregate.json"));
}

TEST_CASE("invalid alpha fails config validation with exit 2") {
  const auto dir = test::temp_dir("cli_badalpha");
  const auto csv = dir / "blobs.csv";
  write_csv(make_synthetic_blobs(900, 3), csv.string(), "label");
  Json config = minimal_config(csv, dir / "out");
  config["protocol"]["alpha"] = 1.5;
  const auto path = dir / "config.json";
  test::write_file(path, config.dump(2));
  const auto log = dir / "log.txt";
  const int code = run_cli("bench --config " + path.string() + " --dry-run",
                           log);
  CHECK(code == 2);
  CHECK(test::read_file(log).find("alpha") != std::string::npos);
}

TEST_CASE("unknown config keys are rejected") {
  const auto dir = test::temp_dir("cli_unknownkey");
  const auto csv = dir / "blobs.csv";
  write_csv(make_synthetic_blobs(900, 3), csv.string(), "label");
  Json config = minimal_config(csv, dir / "out");
  config["protocol"]["sceanrios_per_kind"] = 7;  // typo
  const auto path = dir / "config.json";
  test::write_file(path, config.dump(2));
  const int code = run_cli("bench --config " + path.string() + " --dry-run",
                           dir / "log.txt");
  CHECK(code == 2);
  CHECK(test::read_file(dir / "log.txt").find("sceanrios_per_kind") !=
        std::string::npos);
}

TEST_CASE("bench writes reports, tables and a replayable manifest") {
  const auto dir = test::temp_dir("cli_bench");
  const auto csv = dir / "blobs.csv";
  write_csv(make_synthetic_blobs(900, 3), csv.string(), "label");
  const auto config = dir / "config.json";
  const auto out1 = dir / "out1";
  test::write_file(config, minimal_config(csv, out1).dump(2));

  REQUIRE(run_cli("bench --config " + config.string(), dir / "log1.txt") == 0);
  for (const char* name :
       {"manifest.json", "report_run0.json", "aggregate.json",
        "aggregate_mae_ci.csv", "per_dataset.csv", "abs_error.csv"}) {
    CHECK(fs::exists(out1 / name));
  }
  CHECK(fs::exists(out1 / "models" / "primary.json"));
  CHECK(fs::exists(out1 / "models" / "ErrorPredictorRF.json"));
  CHECK(fs::exists(out1 / "models" / "ATC.json"));

  const Json report = Json::parse(test::read_file(out1 / "report_run0.json"));
  CHECK(report.at("schema") == "report_v1");
  CHECK(report.at("blocks").at("ATC").size() == 6);

  SUBCASE("replay from the manifest reproduces reports byte-identically") {
    const auto out2 = dir / "out2";
    REQUIRE(run_cli("bench --config " + (out1 / "manifest.json").string() +
                        " --out " + out2.string(),
                    dir / "log2.txt") == 0);
    for (const char* name :
         {"report_run0.json", "aggregate.json", "aggregate_mae_ci.csv",
          "per_dataset.csv", "abs_error.csv", "manifest.json"}) {
      CHECK(test::read_file(out1 / name) == test::read_file(out2 / name));
    }
  }

  SUBCASE("predict scores a batch with the saved models") {
    const auto target = dir / "target.csv";
    write_csv(make_synthetic_blobs(300, 77), target.string(), "label");
    const auto log = dir / "predict_log.txt";
    REQUIRE(run_cli("predict --models " + (out1 / "models").string() +
                        " --target " + target.string() +
                        " --predictor ErrorPredictorRF",
                    log) == 0);
    const Json out = Json::parse(test::read_file(log));
    CHECK(out.at("a_hat").get<double>() >= 0.0);
    CHECK(out.at("a_hat").get<double>() <= 1.0);
    const double lo = out.at("interval").at(0).get<double>();
    const double hi = out.at("interval").at(1).get<double>();
    CHECK(lo >= 0.0);
    CHECK(hi <= 1.0);
    CHECK(lo <= hi);

    // source-test replay: close to the recorded source accuracy
    const double src = out.at("source_accuracy").get<double>();
    REQUIRE(run_cli("predict --models " + (out1 / "models").string() +
                        " --target " + csv.string() +
                        " --predictor ErrorPredictorRF",
                    log) == 0);
    const Json replay = Json::parse(test::read_file(log));
    CHECK(std::abs(replay.at("a_hat").get<double>() - src) <= 0.08);
  }

  SUBCASE("predict on an empty CSV is a size error") {
    const auto target = dir / "empty.csv";
    test::write_file(target, "x0,x1,x2,x3,x4,x5,c0,segment,label\n");
    const int code = run_cli("predict --models " + (out1 / "models").string() +
                                 " --target " + target.string(),
                             dir / "empty_log.txt");
    CHECK(code == 1);
  }

  SUBCASE("predict with a mismatched schema exits 2") {
    const auto target = dir / "bad.csv";
    test::write_file(target, "w1,w2\n1,2\n");
    const int code = run_cli("predict --models " + (out1 / "models").string() +
                                 " --target " + target.string(),
                             dir / "bad_log.txt");
    CHECK(code == 2);
  }
}

TEST_CASE("gen-blobs writes a loadable dataset") {
  const auto dir = test::temp_dir("cli_gen");
  const auto out = dir / "blobs.csv";
  REQUIRE(run_cli("gen-blobs --out " + out.string() + " --rows 500 --seed 9",
                  dir / "log.txt") == 0);
  const Schema schema = infer_schema(out.string());
  const Dataset ds = load_csv(out.string(), schema, "label");
  CHECK(ds.n_rows() == 500);
  CHECK(ds.n_cols() == 8);
}
