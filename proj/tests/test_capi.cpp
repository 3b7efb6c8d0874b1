// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exercises the shared library through barycoal.h only.

#include "barycoal.h"

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

std::string scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("barycoal_capi_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kTiny = R"({"schema_version": 1, "seed": 2,
  "dataset": {"samples_per_node": 80, "target_samples": 10, "reference_samples": 80},
  "architecture": {"hidden_width": 4, "noise_dim": 2},
  "pretrain": {"generator_iters": 3, "batch_size": 8}, "coalesce": {"generator_iters": 3, "batch_size": 8},
  "adapt": {"generator_iters": 3, "batch_size": 8}, "eval": {"samples": 40}})";

}  // namespace

TEST_CASE("measures and W1 through the C API") {
  const double a_pts[] = {0.0, 0.0, 1.0, 0.0};
  const double b_pts[] = {0.0, 1.0};
  barycoal_measure* a = nullptr;
  barycoal_measure* b = nullptr;
  REQUIRE(barycoal_measure_create(a_pts, 2, 2, nullptr, &a) == BARYCOAL_OK);
  REQUIRE(barycoal_measure_create(b_pts, 1, 2, nullptr, &b) == BARYCOAL_OK);
  CHECK(barycoal_measure_size(a) == 2);
  CHECK(barycoal_measure_dim(a) == 2);
  double d = 0.0;
  REQUIRE(barycoal_w1_distance(a, b, BARYCOAL_METRIC_L1, &d) == BARYCOAL_OK);
  CHECK(d == doctest::Approx(1.5));
  REQUIRE(barycoal_w1_distance(a, b, BARYCOAL_METRIC_L2, &d) == BARYCOAL_OK);
  CHECK(d == doctest::Approx(0.5 + 0.5 * std::sqrt(2.0)));

  const std::string dir = scratch("measure");
  REQUIRE(barycoal_measure_write(a, (dir + "/a.json").c_str()) == BARYCOAL_OK);
  barycoal_measure* back = nullptr;
  REQUIRE(barycoal_measure_read((dir + "/a.json").c_str(), &back) == BARYCOAL_OK);
  double pts[4];
  double w[2];
  REQUIRE(barycoal_measure_copy(back, pts, w) == BARYCOAL_OK);
  CHECK(pts[2] == 1.0);
  CHECK(w[0] == 0.5);
  barycoal_measure_free(back);
  barycoal_measure_free(a);
  barycoal_measure_free(b);
  barycoal_measure_free(nullptr);
  fs::remove_all(dir);
}

TEST_CASE("error codes and messages") {
  barycoal_measure* m = nullptr;
  const double bad_w[] = {0.7, 0.7};
  const double pts[] = {0.0, 1.0};
  CHECK(barycoal_measure_create(pts, 2, 1, bad_w, &m) == BARYCOAL_ERR_INVALID_ARGUMENT);
  CHECK(std::string(barycoal_last_error()).size() > 0);
  CHECK(m == nullptr);
  CHECK(barycoal_measure_create(nullptr, 2, 1, nullptr, &m) == BARYCOAL_ERR_INVALID_ARGUMENT);
  CHECK(barycoal_measure_read("/nonexistent/m.json", &m) == BARYCOAL_ERR_PARSE);
  CHECK(barycoal_w1_distance(nullptr, nullptr, BARYCOAL_METRIC_L1, nullptr) == BARYCOAL_ERR_INVALID_ARGUMENT);

  barycoal_experiment* e = nullptr;
  CHECK(barycoal_experiment_parse(R"({"schema_version": 1, "typo": 0})", &e) == BARYCOAL_ERR_CONFIG);
  CHECK(std::string(barycoal_last_error()).find("typo") != std::string::npos);
  CHECK(barycoal_experiment_load("/nonexistent/c.json", &e) == BARYCOAL_ERR_CONFIG);
  CHECK(e == nullptr);
  CHECK(std::string(barycoal_status_name(BARYCOAL_ERR_STAGE)) == "stage failure");

  const std::string dir = scratch("oracle");
  write(dir + "/bad.json", "{\"schema_version\": 1,\n \"dim\": }");
  CHECK(barycoal_oracle_run((dir + "/bad.json").c_str(), nullptr, nullptr) == BARYCOAL_ERR_PARSE);
  CHECK(std::string(barycoal_last_error()).find("line 2") != std::string::npos);
  write(dir + "/ok.json", R"({"schema_version": 1, "dim": 1, "metric": "l1",
      "inputs": [{"weight": 1, "points": [[0]]}, {"weight": 1, "points": [[2]]}], "support": [[0], [1], [2]]})");
  double objective = -1.0;
  CHECK(barycoal_oracle_run((dir + "/ok.json").c_str(), (dir + "/r.json").c_str(), &objective) == BARYCOAL_OK);
  CHECK(objective == doctest::Approx(2.0));
  CHECK(fs::exists(dir + "/r.json"));
  CHECK(std::string(barycoal_last_error()).empty());
  fs::remove_all(dir);
}

TEST_CASE("stages through the C API") {
  const std::string dir = scratch("stages");
  barycoal_experiment* e = nullptr;
  REQUIRE(barycoal_experiment_parse(kTiny, &e) == BARYCOAL_OK);
  CHECK(barycoal_experiment_nodes(e) == 2);
  REQUIRE(barycoal_experiment_set_output_dir(e, dir.c_str()) == BARYCOAL_OK);
  REQUIRE(barycoal_experiment_set_seed(e, 77) == BARYCOAL_OK);
  CHECK(barycoal_experiment_seed(e) == 77);
  char* json = nullptr;
  REQUIRE(barycoal_experiment_config_json(e, &json) == BARYCOAL_OK);
  CHECK(std::string(json).find("\"seed\": 77") != std::string::npos);
  barycoal_string_free(json);

  CHECK(barycoal_run_synth(e) == BARYCOAL_OK);
  CHECK(barycoal_run_pretrain(e, 0) == BARYCOAL_OK);
  CHECK(barycoal_run_coalesce(e) == BARYCOAL_ERR_STAGE);
  CHECK(std::string(barycoal_last_error_stage()) == "coalesce");
  CHECK(barycoal_run_pretrain(e, 1) == BARYCOAL_OK);
  CHECK(fs::exists(dir + "/metrics_pretrain_1.csv"));
  CHECK(barycoal_run_coalesce(e) == BARYCOAL_OK);
  CHECK(barycoal_run_adapt(e, 1) == BARYCOAL_OK);
  CHECK(barycoal_run_baseline(e, "transfer") == BARYCOAL_OK);
  CHECK(barycoal_run_baseline(e, "bogus") == BARYCOAL_ERR_CONFIG);

  barycoal_evaluation ev{};
  CHECK(barycoal_evaluate_checkpoint(e, (dir + "/stage2_ternary.ckpt").c_str(), nullptr, &ev) == BARYCOAL_OK);
  CHECK(ev.w1_to_target > 0.0);
  CHECK(barycoal_evaluate_checkpoint(e, (dir + "/stage1.ckpt").c_str(), "psi", &ev) == BARYCOAL_ERR_PARSE);

  char* manifest = nullptr;
  CHECK(barycoal_run_pipeline(e, &manifest) == BARYCOAL_OK);
  REQUIRE(manifest != nullptr);
  CHECK(fs::exists(manifest));
  barycoal_string_free(manifest);
  barycoal_experiment_free(e);
  fs::remove_all(dir);
}
