// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/measure_io.hpp"

#include "barycoal/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace barycoal {

namespace {

using json = nlohmann::json;

[[noreturn]] void field_error(const std::string& field, const std::string& msg) {
  throw ParseError("field '" + field + "': " + msg);
}

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
}

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) field_error(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) field_error(path.empty() ? key : path + "." + key, "missing");
  return *it;
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) field_error(field, "expected a number");
  return v.get<double>();
}

std::vector<double> number_array(const json& v, const std::string& field) {
  if (!v.is_array()) field_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

// Flattens [[...], ...] and checks every row has `dim` entries (dim 0 = infer).
std::vector<double> point_rows(const json& v, const std::string& field, std::size_t& dim) {
  if (!v.is_array() || v.empty()) field_error(field, "expected a non-empty array of points");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string f = field + "[" + std::to_string(i) + "]";
    const std::vector<double> row = number_array(v[i], f);
    if (dim == 0) dim = row.size();
    if (row.empty() || row.size() != dim) field_error(f, "expected " + std::to_string(dim) + " coordinates");
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

LabeledMeasure measure_from(const json& obj, const std::string& path, std::size_t dim) {
  const std::string prefix = path.empty() ? "" : path + ".";
  std::vector<double> pts = point_rows(require(obj, "points", path), prefix + "points", dim);
  const std::size_t n = pts.size() / dim;
  std::vector<double> weights;
  if (obj.contains("weights")) {
    weights = number_array(obj["weights"], prefix + "weights");
    if (weights.size() != n) field_error(prefix + "weights", "expected " + std::to_string(n) + " entries");
  } else {
    weights.assign(n, 1.0 / static_cast<double>(n));
  }
  std::vector<int> labels;
  if (obj.contains("labels")) {
    const json& l = obj["labels"];
    if (!l.is_array() || l.size() != n) field_error(prefix + "labels", "expected " + std::to_string(n) + " integers");
    for (std::size_t i = 0; i < n; ++i) {
      if (!l[i].is_number_integer()) field_error(prefix + "labels[" + std::to_string(i) + "]", "expected an integer");
      labels.push_back(l[i].get<int>());
    }
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (key != "points" && key != "weights" && key != "labels" && key != "weight" && key != "radius") {
      field_error(prefix + key, "unknown key");
    }
  }
  try {
    // Pruning would desynchronize labels from points.
    for (double w : weights) {
      if (!labels.empty() && w < DiscreteMeasure::kPruneThreshold) {
        field_error(prefix + "weights", "labeled measures need positive weights");
      }
    }
    return {DiscreteMeasure(std::move(pts), dim, std::move(weights)), std::move(labels)};
  } catch (const std::invalid_argument& e) {
    field_error(prefix + "weights", e.what());
  }
}

json measure_json(const DiscreteMeasure& m, const std::vector<int>& labels) {
  json pts = json::array();
  for (std::size_t i = 0; i < m.size(); ++i) pts.push_back(std::vector<double>(m.point(i).begin(), m.point(i).end()));
  json out = {{"points", pts}, {"weights", m.weights()}};
  if (!labels.empty()) out["labels"] = labels;
  return out;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

std::string measure_to_json(const DiscreteMeasure& m, const std::vector<int>& labels) {
  if (!labels.empty() && labels.size() != m.size()) {
    throw std::invalid_argument("measure_to_json: one label per support point");
  }
  return measure_json(m, labels).dump() + "\n";
}

LabeledMeasure measure_from_json(const std::string& text) { return measure_from(parse_json(text), "", 0); }

void write_measure(const DiscreteMeasure& m, const std::string& path, const std::vector<int>& labels) {
  write_text_file(path, measure_to_json(m, labels));
}

LabeledMeasure read_measure(const std::string& path) { return measure_from_json(read_text_file(path)); }

BarycenterProblem problem_from_json(const std::string& text) {
  const json doc = parse_json(text);
  const json& version = require(doc, "schema_version", "");
  if (!version.is_number_integer() || version.get<int>() != kSchemaVersion) {
    field_error("schema_version", "expected " + std::to_string(kSchemaVersion));
  }
  for (const auto& [key, value] : doc.items()) {
    (void)value;
    if (key != "schema_version" && key != "dim" && key != "metric" && key != "inputs" && key != "support") {
      field_error(key, "unknown key");
    }
  }
  const json& dim_j = require(doc, "dim", "");
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1) field_error("dim", "expected a positive integer");
  const auto dim = static_cast<std::size_t>(dim_j.get<long long>());

  const json& metric_j = require(doc, "metric", "");
  if (!metric_j.is_string()) field_error("metric", "expected \"l1\" or \"l2\"");
  const std::string metric_name = metric_j.get<std::string>();
  if (metric_name != "l1" && metric_name != "l2") field_error("metric", "expected \"l1\" or \"l2\"");
  const GroundMetric metric = metric_name == "l1" ? GroundMetric::l1() : GroundMetric::l2();

  const json& inputs_j = require(doc, "inputs", "");
  if (!inputs_j.is_array() || inputs_j.empty()) field_error("inputs", "expected a non-empty array");
  std::vector<WeightedMeasure> inputs;
  for (std::size_t k = 0; k < inputs_j.size(); ++k) {
    const std::string path = "inputs[" + std::to_string(k) + "]";
    const json& in = inputs_j[k];
    if (!in.is_object()) field_error(path, "expected an object");
    double weight = 0.0;
    if (in.contains("weight") == in.contains("radius")) field_error(path, "give exactly one of 'weight' or 'radius'");
    if (in.contains("weight")) {
      weight = number(in["weight"], path + ".weight");
      if (!(weight > 0.0)) field_error(path + ".weight", "must be positive");
    } else {
      const double r = number(in["radius"], path + ".radius");
      if (!(r > 0.0)) field_error(path + ".radius", "must be positive");
      weight = 1.0 / r;
    }
    inputs.push_back({measure_from(in, path, dim).measure, weight});
  }

  std::vector<double> support;
  if (!doc.contains("support")) {
    std::vector<DiscreteMeasure> ms;
    for (const auto& in : inputs) ms.push_back(in.measure);
    support = default_grid_support(ms);
  } else if (doc["support"].is_object()) {
    const json& s = doc["support"];
    const json& per = require(s, "grid_per_axis", "support");
    if (!per.is_number_integer() || per.get<long long>() < 1) {
      field_error("support.grid_per_axis", "expected a positive integer");
    }
    std::vector<DiscreteMeasure> ms;
    for (const auto& in : inputs) ms.push_back(in.measure);
    support = default_grid_support(ms, static_cast<std::size_t>(per.get<long long>()));
  } else {
    std::size_t d = dim;
    support = point_rows(doc["support"], "support", d);
  }
  try {
    return BarycenterProblem(std::move(inputs), std::move(support), dim, metric);
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid problem: ") + e.what());
  }
}

BarycenterProblem read_problem(const std::string& path) { return problem_from_json(read_text_file(path)); }

OracleResult solve_oracle(const BarycenterProblem& problem) {
  OracleResult r{fixed_support_barycenter(problem), {}};
  for (const auto& in : problem.inputs) {
    r.w1_to_inputs.push_back(w1_distance(r.barycenter.nu, in.measure, problem.metric).cost);
  }
  return r;
}

std::string oracle_result_to_json(const OracleResult& r) {
  const json out = {{"schema_version", kSchemaVersion},
                    {"objective", r.barycenter.objective},
                    {"nu", measure_json(r.barycenter.nu, {})},
                    {"w1_to_inputs", r.w1_to_inputs}};
  return out.dump(2) + "\n";
}

}  // namespace barycoal
