// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// barycoal: command-line driver for the coalescence pipeline.
//
// Exit codes: 0 success, 2 configuration or input error, 3 stage failure,
// 4 infeasible oracle problem.

#include "barycoal.h"

#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

namespace {

int exit_code(barycoal_status s) {
  switch (s) {
    case BARYCOAL_OK: return 0;
    case BARYCOAL_ERR_CONFIG:
    case BARYCOAL_ERR_PARSE:
    case BARYCOAL_ERR_INVALID_ARGUMENT: return 2;
    case BARYCOAL_ERR_INFEASIBLE: return 4;
    default: return 3;
  }
}

int report(barycoal_status s) {
  if (s != BARYCOAL_OK) {
    std::fprintf(stderr, "barycoal: %s: %s\n", barycoal_status_name(s), barycoal_last_error());
  }
  return exit_code(s);
}

struct Globals {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

class Experiment {
 public:
  ~Experiment() { barycoal_experiment_free(e_); }

  barycoal_status open(const Globals& g) {
    barycoal_status s = g.config.empty() ? barycoal_experiment_parse("{\"schema_version\": 1}", &e_)
                                         : barycoal_experiment_load(g.config.c_str(), &e_);
    if (s == BARYCOAL_OK && g.seed) s = barycoal_experiment_set_seed(e_, *g.seed);
    if (s == BARYCOAL_OK && !g.out.empty()) s = barycoal_experiment_set_output_dir(e_, g.out.c_str());
    return s;
  }
  const barycoal_experiment* get() const { return e_; }

 private:
  barycoal_experiment* e_ = nullptr;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recursive Wasserstein-barycenter coalescence of pretrained generative models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", barycoal_version());
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--config", g.config, "experiment config (JSON)");
  app.add_option("--out", g.out, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "run seed (overrides the config and BARYCOAL_SEED)");

  auto* synth = app.add_subcommand("synth", "write the toy datasets");
  synth->fallthrough();

  int node = -1;
  auto* pretrain = app.add_subcommand("pretrain", "train one generator per node");
  pretrain->add_option("--node", node, "node index (default: all)");
  pretrain->fallthrough();

  auto* coalesce = app.add_subcommand("coalesce", "Stage I: coalesce the pretrained models");
  coalesce->fallthrough();

  bool ternary = false;
  auto* adapt = app.add_subcommand("adapt", "Stage II: adapt the coalesced model to the local data");
  adapt->add_flag("--ternary", ternary, "ternarize generator and critics");
  adapt->fallthrough();

  std::string baseline_name;
  auto* baseline = app.add_subcommand("baseline", "train a comparison baseline");
  baseline->add_option("name", baseline_name, "edge-only | transfer | ensemble")
      ->required()
      ->check(CLI::IsMember({"edge-only", "transfer", "ensemble"}));
  baseline->fallthrough();

  std::string ckpt;
  std::string network = "generator";
  auto* eval = app.add_subcommand("eval", "score a checkpointed generator");
  eval->add_option("--checkpoint", ckpt, "checkpoint file")->required();
  eval->add_option("--network", network, "network name inside the checkpoint");
  eval->fallthrough();

  std::string problem;
  std::string result;
  auto* oracle = app.add_subcommand("oracle", "solve a fixed-support barycenter problem exactly");
  oracle->add_option("problem", problem, "problem file (JSON)")->required();
  oracle->add_option("--result", result, "write the result JSON here");
  oracle->fallthrough();

  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write the manifest");
  pipeline->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (*seed_opt) g.seed = seed;

  if (*oracle) {
    double objective = 0.0;
    const barycoal_status s =
        barycoal_oracle_run(problem.c_str(), result.empty() ? nullptr : result.c_str(), &objective);
    if (s == BARYCOAL_OK) std::printf("objective %.12g\n", objective);
    return report(s);
  }

  Experiment e;
  if (const barycoal_status s = e.open(g); s != BARYCOAL_OK) return report(s);

  barycoal_status s = BARYCOAL_OK;
  if (*synth) {
    s = barycoal_run_synth(e.get());
  } else if (*pretrain) {
    s = barycoal_run_pretrain(e.get(), node);
  } else if (*coalesce) {
    s = barycoal_run_coalesce(e.get());
  } else if (*adapt) {
    s = barycoal_run_adapt(e.get(), ternary ? 1 : 0);
  } else if (*baseline) {
    s = barycoal_run_baseline(e.get(), baseline_name.c_str());
  } else if (*eval) {
    barycoal_evaluation ev{};
    s = barycoal_evaluate_checkpoint(e.get(), ckpt.c_str(), network.c_str(), &ev);
    if (s == BARYCOAL_OK) {
      std::printf("{\"w1_to_target\": %.10g, \"w1_to_old\": %.10g, \"frechet_score\": %.10g}\n", ev.w1_to_target,
                  ev.w1_to_old, ev.frechet_score);
    }
  } else if (*pipeline) {
    char* manifest = nullptr;
    s = barycoal_run_pipeline(e.get(), &manifest);
    if (s == BARYCOAL_OK) std::printf("manifest %s\n", manifest);
    barycoal_string_free(manifest);
  }
  if (s == BARYCOAL_ERR_STAGE) std::fprintf(stderr, "barycoal: failed stage: %s\n", barycoal_last_error_stage());
  return report(s);
}
