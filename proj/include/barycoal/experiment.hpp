// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// Experiment harness: toy dataset synthesis, JSON configuration, the
// pretrain -> coalesce -> adapt pipeline with baselines, metrics CSV and run
// manifest. Stages exchange data only through files in the output directory:
//
//   data/node_<k>.json  data/local.json  data/target.json  data/old.json
//   pretrain_<k>.ckpt   stage1.ckpt      stage2.ckpt       stage2_ternary.ckpt
//   baseline_<name>.ckpt  metrics.csv  manifest.json
//
// Node datasets are read only by pretraining.

#pragma once

#include "barycoal/adversarial.hpp"
#include "barycoal/checkpoint.hpp"
#include "barycoal/frechet.hpp"
#include "barycoal/measure_io.hpp"
#include "barycoal/ternary.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace barycoal {

enum class Overlap { Overlapping, NonOverlapping };

// Gaussian modes in the unit box; the mode index is the class label.
// Non-overlapping: node 0 (the target node) holds `local_modes` and every
// pretrained node holds the remaining modes. Overlapping: everyone holds all
// modes. Pretrained node k additionally shifts its data along the last axis
// by an offset spread evenly over [-node_shift, +node_shift].
struct DatasetSpec {
  std::size_t dim = 2;
  std::vector<std::vector<double>> modes{{-0.4, 0.0}, {0.4, 0.0}};
  double sigma = 0.05;
  int nodes = 2;
  Overlap overlap = Overlap::NonOverlapping;
  std::vector<int> local_modes{1};
  double node_shift = 0.2;
  int samples_per_node = 1000;
  int target_samples = 50;
  int reference_samples = 1000;

  void validate() const;  // throws ConfigError
  std::vector<int> node_mode_indices() const;
  std::vector<int> local_mode_indices() const;
  double node_offset(int k) const;
};

using LabeledData = LabeledMeasure;

struct SynthDataset {
  std::vector<LabeledData> nodes;  // pretrained nodes 1..K
  LabeledData local;               // node 0's limited samples
  LabeledData target;              // reference for the combined target (all modes, unshifted)
  LabeledData old;                 // reference for the pretrained nodes' knowledge (union of node data)
};

SynthDataset synth_dataset(const DatasetSpec& spec, std::uint64_t seed);

struct EvalSpec {
  int every = 100;                // metrics cadence in generator iterations
  int samples = 500;              // generator samples per W1 / score evaluation
  bool wallclock = false;         // wallclock_ms stays empty unless enabled
  bool classifier_features = false;
  MetricKind metric = MetricKind::L2;
};

struct AdaptSpec {
  bool full_precision = true;
  bool ternary = false;
  TernaryConfig ternary_config;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::string output_dir = "barycoal_out";
  DatasetSpec dataset;
  std::vector<double> radii;  // eta_k per pretrained node; empty = all 1
  Architecture architecture;
  TrainConfig pretrain;
  TrainConfig coalesce;       // stage1_weights empty = derived from radii
  TrainConfig adapt;
  TrainConfig baseline;
  bool adapt_enabled = true;
  AdaptSpec adapt_spec;
  std::vector<std::string> baselines{"edge-only", "transfer", "ensemble"};
  EvalSpec eval;

  void validate() const;  // throws ConfigError
  // Per-recursion (lambda_psi, lambda_psi~) = (1/eta_k, sum_{j<k} 1/eta_j)
  // unless coalesce.stage1_weights is set.
  std::vector<std::pair<double, double>> stage1_weights() const;
};

// Parses a config (schema_version 1, unknown keys rejected). The
// BARYCOAL_SEED environment variable, when set, overrides "seed".
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);
std::string experiment_config_to_json(const ExperimentConfig& c);
// FNV-1a of the canonical config JSON, 16 hex digits.
std::string config_hash(const ExperimentConfig& c);

struct MetricRow {
  std::string run_id;
  std::string stage;
  int iteration = 0;
  std::optional<double> wallclock_ms;
  double w1_to_target = 0.0;
  double w1_to_old = 0.0;
  double frechet_score = 0.0;
  std::optional<double> objective;
};

std::string metrics_csv_header();
std::string metrics_csv_row(const MetricRow& r);

struct Evaluation {
  double w1_to_target;
  double w1_to_old;
  double frechet_score;
};

// Scores a generator against the run's target and old references.
Evaluation evaluate_generator(const ExperimentConfig& c, const GeneratorModel& g);

struct Artifact {
  std::string path;  // relative to the output directory
  std::string kind;  // dataset | checkpoint | metrics
  std::string stage;
  std::string hash;  // FNV-1a of the file bytes, 16 hex digits
};

struct RunManifest {
  std::string config_hash;
  std::string run_id;
  std::vector<std::string> stages;
  std::vector<Artifact> artifacts;
  std::string metrics_path;

  std::size_t count(const std::string& kind) const;
};

std::string file_hash(const std::string& path);
std::string manifest_to_json(const RunManifest& m);
RunManifest read_manifest(const std::string& path);

// Individual stages. Each reads its inputs from the output directory, writes
// its outputs there, and returns the metric rows it produced. Failures raise
// StageError naming the stage.
std::vector<MetricRow> run_synth(const ExperimentConfig& c);
std::vector<MetricRow> run_pretrain(const ExperimentConfig& c, int node);  // node in [0, K)
std::vector<MetricRow> run_coalesce(const ExperimentConfig& c);
std::vector<MetricRow> run_adapt(const ExperimentConfig& c, bool ternary);
std::vector<MetricRow> run_baseline(const ExperimentConfig& c, const std::string& name);

// Everything the config asks for, then metrics.csv and manifest.json.
RunManifest run_pipeline(const ExperimentConfig& c);

// Reads a problem file, solves it and writes the result file.
OracleResult run_oracle(const std::string& problem_path, const std::string& result_path);

std::string run_id(const ExperimentConfig& c);
std::string checkpoint_path(const ExperimentConfig& c, const std::string& file);

}  // namespace barycoal
