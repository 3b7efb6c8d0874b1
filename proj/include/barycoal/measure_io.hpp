// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON files for measures, barycenter problems and oracle results.
//
// Measure:  {"points": [[x, y], ...], "weights": [w, ...], "labels": [k, ...]}
//           ("weights" defaults to uniform, "labels" is optional)
// Problem:  {"schema_version": 1, "dim": 2, "metric": "l1" | "l2",
//            "inputs": [{"weight": 1.0, "points": ..., "weights": ...}, ...],
//            "support": [[x, y], ...] | {"grid_per_axis": 11}}
//           An input may give "radius" instead of "weight" (weight = 1 / radius).
// Result:   {"schema_version": 1, "objective": ..., "nu": <measure>,
//            "w1_to_inputs": [...]}
//
// Parse failures throw ParseError naming the offending field, or the
// line and column for malformed JSON.

#pragma once

#include "barycoal/barycenter.hpp"

#include <optional>
#include <string>
#include <vector>

namespace barycoal {

inline constexpr int kSchemaVersion = 1;

struct LabeledMeasure {
  DiscreteMeasure measure;
  std::vector<int> labels;  // empty, or one per support point
};

std::string measure_to_json(const DiscreteMeasure& m, const std::vector<int>& labels = {});
LabeledMeasure measure_from_json(const std::string& text);
void write_measure(const DiscreteMeasure& m, const std::string& path, const std::vector<int>& labels = {});
LabeledMeasure read_measure(const std::string& path);

BarycenterProblem problem_from_json(const std::string& text);
BarycenterProblem read_problem(const std::string& path);

struct OracleResult {
  BarycenterResult barycenter;
  std::vector<double> w1_to_inputs;
};

// Solves the fixed-support LP and evaluates W1 from nu to each input.
OracleResult solve_oracle(const BarycenterProblem& problem);
std::string oracle_result_to_json(const OracleResult& r);

// Whole-file helpers shared by the readers.
std::string read_text_file(const std::string& path);  // ParseError if unreadable
void write_text_file(const std::string& path, const std::string& text);

}  // namespace barycoal
