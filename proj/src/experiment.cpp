// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal/experiment.hpp"

#include "barycoal/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>

namespace barycoal {

namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void config_error(const std::string& field, const std::string& msg) {
  throw ConfigError("config field '" + field + "': " + msg);
}

// Typed access to one JSON object; every key must be consumed or declared.
class Fields {
 public:
  Fields(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) config_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string name(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }
  const json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  void integer(const std::string& key, int& out, int min) {
    if (!has(key)) return;
    const json& v = obj_[key];
    if (!v.is_number_integer() || v.get<long long>() < min || v.get<long long>() > 1'000'000'000) {
      config_error(name(key), "expected an integer >= " + std::to_string(min));
    }
    out = v.get<int>();
  }
  void real(const std::string& key, double& out, bool positive) {
    if (!has(key)) return;
    const json& v = obj_[key];
    if (!v.is_number() || !std::isfinite(v.get<double>())) config_error(name(key), "expected a number");
    const double x = v.get<double>();
    if (positive ? !(x > 0.0) : x < 0.0) config_error(name(key), positive ? "must be positive" : "must be >= 0");
    out = x;
  }
  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!obj_[key].is_boolean()) config_error(name(key), "expected true or false");
    out = obj_[key].get<bool>();
  }
  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!obj_[key].is_string()) config_error(name(key), "expected a string");
    out = obj_[key].get<std::string>();
  }
  template <class E>
  void choice(const std::string& key, E& out, const std::vector<std::pair<std::string, E>>& options) {
    std::string s;
    string(key, s);
    if (!obj_.contains(key)) return;
    std::string listed;
    for (const auto& [label, value] : options) {
      if (label == s) {
        out = value;
        return;
      }
      listed += (listed.empty() ? "\"" : ", \"") + label + "\"";
    }
    config_error(name(key), "expected one of " + listed);
  }

  // Rejects keys nobody asked about.
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      (void)value;
      if (!seen_.count(key)) config_error(name(key), "unknown key");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<double> real_array(const json& v, const std::string& field) {
  if (!v.is_array()) config_error(field, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_error(field + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

const std::vector<std::pair<std::string, NoiseKind>> kNoiseNames{{"gaussian", NoiseKind::Gaussian},
                                                                   {"uniform", NoiseKind::Uniform}};
const std::vector<std::pair<std::string, Overlap>> kOverlapNames{{"overlapping", Overlap::Overlapping},
                                                                  {"non-overlapping", Overlap::NonOverlapping}};
const std::vector<std::pair<std::string, MetricKind>> kMetricNames{{"l1", MetricKind::L1}, {"l2", MetricKind::L2}};
const std::vector<std::pair<std::string, CriticInheritance>> kInheritanceNames{
    {"previous_psi", CriticInheritance::PreviousPsi}, {"previous_psi_tilde", CriticInheritance::PreviousPsiTilde}};
const std::vector<std::string> kBaselineNames{"edge-only", "transfer", "ensemble"};

template <class E>
std::string label_of(E value, const std::vector<std::pair<std::string, E>>& options) {
  for (const auto& [label, v] : options) {
    if (v == value) return label;
  }
  return "?";
}

void read_train(Fields& f, TrainConfig& t) {
  f.integer("generator_iters", t.generator_iters, 0);
  f.integer("critic_iters", t.critic_iters, 1);
  f.integer("batch_size", t.batch_size, 1);
  f.real("learning_rate", t.adam.learning_rate, true);
  f.real("beta1", t.adam.beta1, false);
  f.real("beta2", t.adam.beta2, false);
  f.real("gp_coefficient", t.gp_coefficient, false);
  if (t.adam.beta1 >= 1.0) config_error(f.name("beta1"), "must be < 1");
  if (t.adam.beta2 >= 1.0) config_error(f.name("beta2"), "must be < 1");
}

json train_json(const TrainConfig& t) {
  return {{"generator_iters", t.generator_iters}, {"critic_iters", t.critic_iters},
          {"batch_size", t.batch_size},           {"learning_rate", t.adam.learning_rate},
          {"beta1", t.adam.beta1},                {"beta2", t.adam.beta2},
          {"gp_coefficient", t.gp_coefficient}};
}

TrainConfig default_train(int iters, double lr) {
  TrainConfig t;
  t.generator_iters = iters;
  t.adam.learning_rate = lr;
  return t;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

LabeledData sample_from_modes(const DatasetSpec& s, const std::vector<int>& mode_ids, int n, double offset,
                              Rng& rng) {
  std::vector<int> labels;
  std::normal_distribution<double> noise(0.0, s.sigma);
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n) * s.dim);
  for (int i = 0; i < n; ++i) {
    const int mode = mode_ids[static_cast<std::size_t>(i) % mode_ids.size()];
    for (std::size_t d = 0; d < s.dim; ++d) {
      const double shift = d + 1 == s.dim ? offset : 0.0;
      pts.push_back(s.modes[static_cast<std::size_t>(mode)][d] + shift + noise(rng));
    }
    labels.push_back(mode);
  }
  return {DiscreteMeasure::uniform(std::move(pts), s.dim), std::move(labels)};
}

// ---- stage plumbing ----

std::string data_path(const ExperimentConfig& c, const std::string& name) {
  return (fs::path(c.output_dir) / "data" / name).string();
}

LabeledData load_data(const ExperimentConfig& c, const std::string& name) {
  return read_measure(data_path(c, name));
}

TrainedPair load_pair(const ExperimentConfig& c, int k) {
  const Checkpoint ck = read_checkpoint(checkpoint_path(c, "pretrain_" + std::to_string(k) + ".ckpt"));
  return {ck.get("generator").generator(), ck.get("critic").critic()};
}

// Scores generators against the run's references while a stage trains.
class Recorder {
 public:
  Recorder(const ExperimentConfig& c, std::string stage)
      : c_(c),
        stage_(std::move(stage)),
        run_id_(run_id(c)),
        target_(load_data(c, "target.json")),
        old_(load_data(c, "old.json")),
        start_(std::chrono::steady_clock::now()) {
    if (c.eval.classifier_features) {
      ClassifierConfig cc;
      cc.seed = derive_seed(c.seed, "eval/classifier");
      extractor_ = train_feature_extractor(target_.measure, target_.labels, cc);
    }
  }

  Evaluation evaluate(const GeneratorModel& g) const {
    const GroundMetric metric(c_.eval.metric);
    const DiscreteMeasure s = sample_generator(g, static_cast<std::size_t>(c_.eval.samples),
                                               derive_seed(c_.seed, "eval/samples"));
    return {w1_distance(s, target_.measure, metric).cost, w1_distance(s, old_.measure, metric).cost,
            score_samples(s, target_.measure, extractor_)};
  }

  void record(int iteration, const GeneratorModel& g, const std::optional<double>& objective) {
    const Evaluation e = evaluate(g);
    MetricRow r{run_id_, stage_, iteration, std::nullopt, e.w1_to_target, e.w1_to_old, e.frechet_score, objective};
    if (c_.eval.wallclock) {
      r.wallclock_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
    }
    rows_.push_back(std::move(r));
  }

  // Generator samples at the evaluation seed, for objective terms.
  DiscreteMeasure samples(const GeneratorModel& g) const {
    return sample_generator(g, static_cast<std::size_t>(c_.eval.samples), derive_seed(c_.seed, "eval/samples"));
  }

  std::vector<MetricRow> take() { return std::move(rows_); }

 private:
  const ExperimentConfig& c_;
  std::string stage_;
  std::string run_id_;
  LabeledData target_;
  LabeledData old_;
  FeatureExtractor extractor_;
  std::chrono::steady_clock::time_point start_;
  std::vector<MetricRow> rows_;
};

template <class F>
auto as_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const ConfigError&) {
    throw;
  } catch (const StageError& e) {
    if (e.stage() == stage) throw;
    throw StageError(stage, e.what());
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

// Sum of weight * W1(samples, reference) over the given terms.
double objective_terms(const DiscreteMeasure& s, const std::vector<std::pair<double, const DiscreteMeasure*>>& terms,
                       const GroundMetric& metric) {
  double total = 0.0;
  for (const auto& [w, m] : terms) {
    if (w > 0.0) total += w * w1_distance(s, *m, metric).cost;
  }
  return total;
}

void ensure_dirs(const ExperimentConfig& c) {
  std::error_code ec;
  fs::create_directories(fs::path(c.output_dir) / "data", ec);
  if (ec) throw std::runtime_error("cannot create '" + c.output_dir + "': " + ec.message());
}

std::string dataset_file(int k) { return "node_" + std::to_string(k) + ".json"; }

}  // namespace

// ---- dataset ----

void DatasetSpec::validate() const {
  if (dim < 1) config_error("dataset.dim", "must be >= 1");
  if (modes.empty()) config_error("dataset.modes", "need at least one mode");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i].size() != dim) {
      config_error("dataset.modes[" + std::to_string(i) + "]", "expected " + std::to_string(dim) + " coordinates");
    }
  }
  if (!(sigma > 0.0)) config_error("dataset.sigma", "must be positive");
  if (nodes < 1) config_error("dataset.nodes", "must be >= 1");
  if (local_modes.empty()) config_error("dataset.local_modes", "need at least one mode");
  for (int m : local_modes) {
    if (m < 0 || static_cast<std::size_t>(m) >= modes.size()) config_error("dataset.local_modes", "mode out of range");
  }
  if (overlap == Overlap::NonOverlapping && node_mode_indices().empty()) {
    config_error("dataset.local_modes", "non-overlapping data leaves no modes for the pretrained nodes");
  }
  if (node_shift < 0.0) config_error("dataset.node_shift", "must be >= 0");
  if (samples_per_node < 1) config_error("dataset.samples_per_node", "must be >= 1");
  if (target_samples < 1) config_error("dataset.target_samples", "must be >= 1");
  if (reference_samples < 1) config_error("dataset.reference_samples", "must be >= 1");
}

std::vector<int> DatasetSpec::node_mode_indices() const {
  std::vector<int> out;
  for (int m = 0; m < static_cast<int>(modes.size()); ++m) {
    const bool local = std::find(local_modes.begin(), local_modes.end(), m) != local_modes.end();
    if (overlap == Overlap::Overlapping || !local) out.push_back(m);
  }
  return out;
}

std::vector<int> DatasetSpec::local_mode_indices() const {
  if (overlap == Overlap::Overlapping) {
    std::vector<int> all(modes.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    return all;
  }
  std::vector<int> out = local_modes;
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double DatasetSpec::node_offset(int k) const {
  if (nodes < 2) return 0.0;
  return node_shift * (1.0 - 2.0 * static_cast<double>(k) / static_cast<double>(nodes - 1));
}

SynthDataset synth_dataset(const DatasetSpec& spec, std::uint64_t seed) {
  spec.validate();
  Rng rng(derive_seed(seed, "synth"));
  const std::vector<int> node_modes = spec.node_mode_indices();
  std::vector<LabeledData> nodes;
  std::vector<double> old_pts;
  std::vector<int> old_labels;
  for (int k = 0; k < spec.nodes; ++k) {
    LabeledData d = sample_from_modes(spec, node_modes, spec.samples_per_node, spec.node_offset(k), rng);
    old_pts.insert(old_pts.end(), d.measure.points().begin(), d.measure.points().end());
    old_labels.insert(old_labels.end(), d.labels.begin(), d.labels.end());
    nodes.push_back(std::move(d));
  }
  LabeledData local = sample_from_modes(spec, spec.local_mode_indices(), spec.target_samples, 0.0, rng);
  std::vector<int> all(spec.modes.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  LabeledData target = sample_from_modes(spec, all, spec.reference_samples, 0.0, rng);
  return {std::move(nodes), std::move(local), std::move(target),
          {DiscreteMeasure::uniform(std::move(old_pts), spec.dim), std::move(old_labels)}};
}

// ---- config ----

void ExperimentConfig::validate() const {
  dataset.validate();
  if (!radii.empty() && radii.size() != static_cast<std::size_t>(dataset.nodes)) {
    config_error("radii", "expected one radius per pretrained node (" + std::to_string(dataset.nodes) + ")");
  }
  for (double r : radii) {
    if (!(r > 0.0)) config_error("radii", "radii must be positive");
  }
  if (architecture.noise_dim < 1) config_error("architecture.noise_dim", "must be >= 1");
  if (architecture.hidden_width < 1) config_error("architecture.hidden_width", "must be >= 1");
  if (architecture.hidden_layers < 1) config_error("architecture.hidden_layers", "must be >= 1");
  const std::vector<std::pair<std::string, const TrainConfig*>> blocks{
      {"pretrain", &pretrain}, {"coalesce", &coalesce}, {"adapt", &adapt}, {"baseline", &baseline}};
  for (const auto& [name, t] : blocks) {
    try {
      t->validate();
    } catch (const std::invalid_argument& e) {
      config_error(name, e.what());
    }
  }
  if (!coalesce.stage1_weights.empty() && coalesce.stage1_weights.size() + 1 != static_cast<std::size_t>(dataset.nodes)) {
    config_error("coalesce.stage1_weights", "expected one pair per recursion (nodes - 1)");
  }
  if (adapt_spec.ternary_config.delta_init_fraction < 0.0) {
    config_error("adapt.delta_init_fraction", "must be >= 0");
  }
  if (!(adapt_spec.ternary_config.width_fraction > 0.0)) config_error("adapt.width_fraction", "must be positive");
  for (const auto& b : baselines) {
    if (std::find(kBaselineNames.begin(), kBaselineNames.end(), b) == kBaselineNames.end()) {
      config_error("baselines", "unknown baseline '" + b + "'");
    }
  }
  if (eval.every < 1) config_error("eval.every", "must be >= 1");
  if (eval.samples < 2) config_error("eval.samples", "must be >= 2");
  if (eval.metric == MetricKind::L2Squared) config_error("eval.metric", "expected \"l1\" or \"l2\"");
}

std::vector<std::pair<double, double>> ExperimentConfig::stage1_weights() const {
  if (!coalesce.stage1_weights.empty()) return coalesce.stage1_weights;
  std::vector<std::pair<double, double>> out;
  const auto lambda = [&](int k) { return radii.empty() ? 1.0 : 1.0 / radii[static_cast<std::size_t>(k)]; };
  double prev = lambda(0);
  for (int k = 1; k < dataset.nodes; ++k) {
    out.emplace_back(lambda(k), prev);
    prev += lambda(k);
  }
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  c.architecture.hidden_width = 32;
  c.pretrain = default_train(1500, 1e-3);
  c.coalesce = default_train(1000, 1e-3);
  c.adapt = default_train(1500, 5e-4);

  Fields root(doc, "");
  int version = 0;
  root.integer("schema_version", version, 0);
  if (!root.has("schema_version") || version != kSchemaVersion) {
    config_error("schema_version", "expected " + std::to_string(kSchemaVersion));
  }
  if (root.has("seed")) {
    const json& s = root.raw("seed");
    if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
      config_error("seed", "expected a non-negative integer");
    }
    c.seed = s.get<std::uint64_t>();
  }
  root.string("output_dir", c.output_dir);
  if (c.output_dir.empty()) config_error("output_dir", "must not be empty");

  if (root.has("dataset")) {
    Fields f(root.raw("dataset"), "dataset");
    int dim = static_cast<int>(c.dataset.dim);
    f.integer("dim", dim, 1);
    c.dataset.dim = static_cast<std::size_t>(dim);
    if (f.has("modes")) {
      const json& m = f.raw("modes");
      if (!m.is_array()) config_error("dataset.modes", "expected an array of points");
      c.dataset.modes.clear();
      for (std::size_t i = 0; i < m.size(); ++i) {
        c.dataset.modes.push_back(real_array(m[i], "dataset.modes[" + std::to_string(i) + "]"));
      }
    }
    f.real("sigma", c.dataset.sigma, true);
    f.integer("nodes", c.dataset.nodes, 1);
    f.choice("overlap", c.dataset.overlap, kOverlapNames);
    if (f.has("local_modes")) {
      const json& l = f.raw("local_modes");
      if (!l.is_array()) config_error("dataset.local_modes", "expected an array of mode indices");
      c.dataset.local_modes.clear();
      for (const auto& v : l) {
        if (!v.is_number_integer()) config_error("dataset.local_modes", "expected integers");
        c.dataset.local_modes.push_back(v.get<int>());
      }
    }
    f.real("node_shift", c.dataset.node_shift, false);
    f.integer("samples_per_node", c.dataset.samples_per_node, 1);
    f.integer("target_samples", c.dataset.target_samples, 1);
    f.integer("reference_samples", c.dataset.reference_samples, 1);
    f.finish();
  }
  if (root.has("radii")) c.radii = real_array(root.raw("radii"), "radii");

  if (root.has("architecture")) {
    Fields f(root.raw("architecture"), "architecture");
    f.integer("noise_dim", c.architecture.noise_dim, 1);
    f.integer("hidden_width", c.architecture.hidden_width, 1);
    f.integer("hidden_layers", c.architecture.hidden_layers, 1);
    f.choice("noise", c.architecture.noise, kNoiseNames);
    f.finish();
  }
  if (root.has("pretrain")) {
    Fields f(root.raw("pretrain"), "pretrain");
    read_train(f, c.pretrain);
    f.finish();
  }
  if (root.has("coalesce")) {
    Fields f(root.raw("coalesce"), "coalesce");
    read_train(f, c.coalesce);
    f.choice("inheritance", c.coalesce.inheritance, kInheritanceNames);
    if (f.has("stage1_weights")) {
      const json& w = f.raw("stage1_weights");
      if (!w.is_array()) config_error("coalesce.stage1_weights", "expected an array of [a, b] pairs");
      for (std::size_t i = 0; i < w.size(); ++i) {
        const auto p = real_array(w[i], "coalesce.stage1_weights[" + std::to_string(i) + "]");
        if (p.size() != 2) config_error("coalesce.stage1_weights[" + std::to_string(i) + "]", "expected [a, b]");
        c.coalesce.stage1_weights.emplace_back(p[0], p[1]);
      }
    }
    f.finish();
  }
  if (root.has("adapt")) {
    Fields f(root.raw("adapt"), "adapt");
    read_train(f, c.adapt);
    f.boolean("enabled", c.adapt_enabled);
    f.boolean("full_precision", c.adapt_spec.full_precision);
    f.boolean("ternary", c.adapt_spec.ternary);
    if (f.has("stage2_weights")) {
      const auto p = real_array(f.raw("stage2_weights"), "adapt.stage2_weights");
      if (p.size() != 2) config_error("adapt.stage2_weights", "expected [local, replay]");
      c.adapt.stage2_weights = {p[0], p[1]};
    }
    if (f.has("threshold_learning_rate")) {
      f.real("threshold_learning_rate", c.adapt_spec.ternary_config.threshold_learning_rate, true);
    }
    f.real("delta_init_fraction", c.adapt_spec.ternary_config.delta_init_fraction, false);
    f.real("width_fraction", c.adapt_spec.ternary_config.width_fraction, true);
    f.finish();
  }
  c.baseline = c.adapt;
  c.baseline.stage2_weights = {1.0, 1.0};
  if (root.has("baseline")) {
    Fields f(root.raw("baseline"), "baseline");
    read_train(f, c.baseline);
    f.finish();
  }
  if (root.has("baselines")) {
    const json& b = root.raw("baselines");
    if (!b.is_array()) config_error("baselines", "expected an array of names");
    c.baselines.clear();
    for (const auto& v : b) {
      if (!v.is_string()) config_error("baselines", "expected strings");
      c.baselines.push_back(v.get<std::string>());
    }
  }
  if (root.has("eval")) {
    Fields f(root.raw("eval"), "eval");
    f.integer("every", c.eval.every, 1);
    f.integer("samples", c.eval.samples, 2);
    f.boolean("wallclock", c.eval.wallclock);
    std::string features = "identity";
    f.string("features", features);
    if (features != "identity" && features != "classifier") {
      config_error("eval.features", "expected \"identity\" or \"classifier\"");
    }
    c.eval.classifier_features = features == "classifier";
    f.choice("metric", c.eval.metric, kMetricNames);
    f.finish();
  }
  root.finish();

  if (const char* env = std::getenv("BARYCOAL_SEED"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (errno != 0 || *end != '\0' || *env == '-') throw ConfigError("BARYCOAL_SEED: expected an unsigned integer");
    c.seed = v;
  }
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const ParseError& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment_config(text);
}

namespace {

json config_json(const ExperimentConfig& c, bool with_output_dir) {
  const DatasetSpec& d = c.dataset;
  json coalesce = train_json(c.coalesce);
  coalesce["inheritance"] = label_of(c.coalesce.inheritance, kInheritanceNames);
  json s1 = json::array();
  for (const auto& [a, b] : c.coalesce.stage1_weights) s1.push_back({a, b});
  coalesce["stage1_weights"] = s1;
  json adapt = train_json(c.adapt);
  adapt["enabled"] = c.adapt_enabled;
  adapt["full_precision"] = c.adapt_spec.full_precision;
  adapt["ternary"] = c.adapt_spec.ternary;
  adapt["stage2_weights"] = {c.adapt.stage2_weights.first, c.adapt.stage2_weights.second};
  if (c.adapt_spec.ternary_config.threshold_learning_rate > 0.0) {
    adapt["threshold_learning_rate"] = c.adapt_spec.ternary_config.threshold_learning_rate;
  }
  adapt["delta_init_fraction"] = c.adapt_spec.ternary_config.delta_init_fraction;
  adapt["width_fraction"] = c.adapt_spec.ternary_config.width_fraction;
  json out = {
      {"schema_version", kSchemaVersion},
      {"seed", c.seed},
      {"dataset",
       {{"dim", d.dim},
        {"modes", d.modes},
        {"sigma", d.sigma},
        {"nodes", d.nodes},
        {"overlap", label_of(d.overlap, kOverlapNames)},
        {"local_modes", d.local_modes},
        {"node_shift", d.node_shift},
        {"samples_per_node", d.samples_per_node},
        {"target_samples", d.target_samples},
        {"reference_samples", d.reference_samples}}},
      {"radii", c.radii},
      {"architecture",
       {{"noise_dim", c.architecture.noise_dim},
        {"hidden_width", c.architecture.hidden_width},
        {"hidden_layers", c.architecture.hidden_layers},
        {"noise", label_of(c.architecture.noise, kNoiseNames)}}},
      {"pretrain", train_json(c.pretrain)},
      {"coalesce", coalesce},
      {"adapt", adapt},
      {"baseline", train_json(c.baseline)},
      {"baselines", c.baselines},
      {"eval",
       {{"every", c.eval.every},
        {"samples", c.eval.samples},
        {"wallclock", c.eval.wallclock},
        {"features", c.eval.classifier_features ? "classifier" : "identity"},
        {"metric", label_of(c.eval.metric, kMetricNames)}}},
  };
  if (with_output_dir) out["output_dir"] = c.output_dir;
  return out;
}

}  // namespace

std::string experiment_config_to_json(const ExperimentConfig& c) { return config_json(c, true).dump(2) + "\n"; }

std::string config_hash(const ExperimentConfig& c) { return hex16(fnv1a(config_json(c, false).dump())); }

std::string run_id(const ExperimentConfig& c) { return config_hash(c).substr(0, 8) + "-s" + std::to_string(c.seed); }

std::string checkpoint_path(const ExperimentConfig& c, const std::string& file) {
  return (fs::path(c.output_dir) / file).string();
}

// ---- metrics ----

std::string metrics_csv_header() {
  return "run_id,stage,iteration,wallclock_ms,w1_to_target,w1_to_old,frechet_score,objective\n";
}

std::string metrics_csv_row(const MetricRow& r) {
  const auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::string(buf);
  };
  std::string line = r.run_id + "," + r.stage + "," + std::to_string(r.iteration) + ",";
  if (r.wallclock_ms) line += num(*r.wallclock_ms);
  line += "," + num(r.w1_to_target) + "," + num(r.w1_to_old) + "," + num(r.frechet_score) + ",";
  if (r.objective) line += num(*r.objective);
  return line + "\n";
}

Evaluation evaluate_generator(const ExperimentConfig& c, const GeneratorModel& g) {
  return Recorder(c, "eval").evaluate(g);
}

// ---- manifest ----

std::size_t RunManifest::count(const std::string& kind) const {
  return static_cast<std::size_t>(
      std::count_if(artifacts.begin(), artifacts.end(), [&](const Artifact& a) { return a.kind == kind; }));
}

std::string file_hash(const std::string& path) { return hex16(fnv1a(read_text_file(path))); }

std::string manifest_to_json(const RunManifest& m) {
  json arts = json::array();
  for (const auto& a : m.artifacts) {
    arts.push_back({{"path", a.path}, {"kind", a.kind}, {"stage", a.stage}, {"hash", a.hash}});
  }
  const json out = {{"schema_version", kSchemaVersion}, {"config_hash", m.config_hash}, {"run_id", m.run_id},
                    {"stages", m.stages},               {"artifacts", arts},          {"metrics", m.metrics_path}};
  return out.dump(2) + "\n";
}

RunManifest read_manifest(const std::string& path) {
  try {
    const json doc = json::parse(read_text_file(path));
    RunManifest m;
    m.config_hash = doc.at("config_hash").get<std::string>();
    m.run_id = doc.at("run_id").get<std::string>();
    m.stages = doc.at("stages").get<std::vector<std::string>>();
    m.metrics_path = doc.at("metrics").get<std::string>();
    for (const auto& a : doc.at("artifacts")) {
      m.artifacts.push_back({a.at("path").get<std::string>(), a.at("kind").get<std::string>(),
                             a.at("stage").get<std::string>(), a.at("hash").get<std::string>()});
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError("manifest '" + path + "': " + e.what());
  }
}

// ---- stages ----

std::vector<MetricRow> run_synth(const ExperimentConfig& c) {
  return as_stage("synth", [&] {
    ensure_dirs(c);
    const SynthDataset d = synth_dataset(c.dataset, c.seed);
    for (std::size_t k = 0; k < d.nodes.size(); ++k) {
      write_measure(d.nodes[k].measure, data_path(c, dataset_file(static_cast<int>(k))), d.nodes[k].labels);
    }
    write_measure(d.local.measure, data_path(c, "local.json"), d.local.labels);
    write_measure(d.target.measure, data_path(c, "target.json"), d.target.labels);
    write_measure(d.old.measure, data_path(c, "old.json"), d.old.labels);
    return std::vector<MetricRow>{};
  });
}

std::vector<MetricRow> run_pretrain(const ExperimentConfig& c, int node) {
  const std::string stage = "pretrain/" + std::to_string(node);
  return as_stage(stage, [&] {
    if (node < 0 || node >= c.dataset.nodes) throw std::invalid_argument("node index out of range");
    const LabeledData data = load_data(c, dataset_file(node));
    Recorder rec(c, stage);
    const GroundMetric metric(c.eval.metric);
    TrainConfig t = c.pretrain;
    t.seed = derive_seed(c.seed, stage);
    TrainingMonitor mon;
    mon.every = c.eval.every;
    mon.callback = [&](int it, const GeneratorModel& g) {
      rec.record(it, g, objective_terms(rec.samples(g), {{1.0, &data.measure}}, metric));
    };
    const TrainedPair p = train_pretrained(data.measure, t, c.architecture, &mon);
    Checkpoint ck;
    ck.stage = stage;
    ck.seed = t.seed;
    ck.add_generator("generator", p.generator);
    ck.add_critic("critic", p.critic);
    write_checkpoint(ck, checkpoint_path(c, "pretrain_" + std::to_string(node) + ".ckpt"));
    return rec.take();
  });
}

std::vector<MetricRow> run_coalesce(const ExperimentConfig& c) {
  return as_stage("coalesce", [&] {
    if (c.dataset.nodes < 2) throw std::invalid_argument("coalescence needs at least two pretrained nodes");
    std::vector<TrainedPair> pairs;
    for (int k = 0; k < c.dataset.nodes; ++k) pairs.push_back(load_pair(c, k));
    Recorder rec(c, "coalesce");
    const GroundMetric metric(c.eval.metric);

    // Objective: radius-weighted W1 to every pretrained model's samples.
    std::vector<DiscreteMeasure> node_samples;
    double total = 0.0;
    for (int k = 0; k < c.dataset.nodes; ++k) {
      node_samples.push_back(sample_generator(pairs[static_cast<std::size_t>(k)].generator,
                                              static_cast<std::size_t>(c.eval.samples),
                                              derive_seed(c.seed, "eval/node/" + std::to_string(k))));
      total += c.radii.empty() ? 1.0 : 1.0 / c.radii[static_cast<std::size_t>(k)];
    }
    std::vector<std::pair<double, const DiscreteMeasure*>> terms;
    for (int k = 0; k < c.dataset.nodes; ++k) {
      const double lambda = c.radii.empty() ? 1.0 : 1.0 / c.radii[static_cast<std::size_t>(k)];
      terms.emplace_back(lambda / total, &node_samples[static_cast<std::size_t>(k)]);
    }

    TrainConfig t = c.coalesce;
    t.stage1_weights = c.stage1_weights();
    t.seed = derive_seed(c.seed, "coalesce");
    int recursion = 0;
    TrainingMonitor mon;
    mon.every = c.eval.every;
    mon.callback = [&](int it, const GeneratorModel& g) {
      if (it == 0) ++recursion;
      // Only the first recursion reports its starting point.
      if (it == 0 && recursion > 1) return;
      rec.record((recursion - 1) * t.generator_iters + it, g, objective_terms(rec.samples(g), terms, metric));
    };
    const Stage1Result s = train_stage1(pairs, t, &mon);
    Checkpoint ck;
    ck.stage = "coalesce";
    ck.seed = t.seed;
    ck.add_generator("generator", s.generator);
    ck.add_critic("psi", s.psi);
    ck.add_critic("psi_tilde", s.psi_tilde);
    write_checkpoint(ck, checkpoint_path(c, "stage1.ckpt"));
    return rec.take();
  });
}

namespace {

struct MetaModel {
  GeneratorModel generator;
  CriticModel psi;
  CriticModel psi_tilde;
};

// The coalesced model, or the single pretrained model when K = 1.
MetaModel load_meta(const ExperimentConfig& c) {
  if (c.dataset.nodes == 1) {
    const TrainedPair p = load_pair(c, 0);
    return {p.generator, p.critic, p.critic};
  }
  const Checkpoint ck = read_checkpoint(checkpoint_path(c, "stage1.ckpt"));
  return {ck.get("generator").generator(), ck.get("psi").critic(), ck.get("psi_tilde").critic()};
}

}  // namespace

std::vector<MetricRow> run_adapt(const ExperimentConfig& c, bool ternary) {
  const std::string stage = ternary ? "adapt-ternary" : "adapt";
  return as_stage(stage, [&] {
    const MetaModel meta = load_meta(c);
    const LabeledData local = load_data(c, "local.json");
    Recorder rec(c, stage);
    const GroundMetric metric(c.eval.metric);
    const DiscreteMeasure meta_samples = sample_generator(meta.generator, static_cast<std::size_t>(c.eval.samples),
                                                          derive_seed(c.seed, "eval/meta"));
    const std::vector<std::pair<double, const DiscreteMeasure*>> terms{
        {c.adapt.stage2_weights.first, &local.measure}, {c.adapt.stage2_weights.second, &meta_samples}};
    TrainConfig t = c.adapt;
    t.seed = derive_seed(c.seed, stage);
    const auto record = [&](int it, const GeneratorModel& g) {
      rec.record(it, g, objective_terms(rec.samples(g), terms, metric));
    };

    Checkpoint ck;
    ck.stage = stage;
    ck.seed = t.seed;
    if (ternary) {
      record(0, meta.generator);
      TernaryMonitor mon;
      mon.callback = [&](int it, const TernaryGenerator& g) {
        if (it % c.eval.every == 0 || it == t.generator_iters) record(it, g.quantized_model());
      };
      const TernaryGenerator g = train_stage2_ternary(meta.generator, {meta.psi_tilde, meta.psi}, local.measure, t,
                                                      c.adapt_spec.ternary_config, &mon);
      ck.add_ternary_generator("generator", g);
      write_checkpoint(ck, checkpoint_path(c, "stage2_ternary.ckpt"));
    } else {
      TrainingMonitor mon;
      mon.every = c.eval.every;
      mon.callback = record;
      const GeneratorModel g = train_stage2(meta.generator, {meta.psi_tilde, meta.psi}, local.measure, t, &mon);
      ck.add_generator("generator", g);
      write_checkpoint(ck, checkpoint_path(c, "stage2.ckpt"));
    }
    return rec.take();
  });
}

std::vector<MetricRow> run_baseline(const ExperimentConfig& c, const std::string& name) {
  if (std::find(kBaselineNames.begin(), kBaselineNames.end(), name) == kBaselineNames.end()) {
    throw ConfigError("unknown baseline '" + name + "' (expected edge-only, transfer or ensemble)");
  }
  const std::string stage = "baseline/" + name;
  return as_stage(stage, [&] {
    const LabeledData local = load_data(c, "local.json");
    Recorder rec(c, stage);
    TrainConfig t = c.baseline;
    t.seed = derive_seed(c.seed, stage);
    TrainingMonitor mon;
    mon.every = c.eval.every;
    mon.callback = [&](int it, const GeneratorModel& g) { rec.record(it, g, std::nullopt); };
    GeneratorModel g;
    if (name == "edge-only") {
      g = baseline_edge_only(local.measure, t, c.architecture, &mon);
    } else if (name == "transfer") {
      g = baseline_transfer(load_pair(c, 0), local.measure, t, &mon);
    } else {
      std::vector<TrainedPair> pairs;
      for (int k = 0; k < c.dataset.nodes; ++k) pairs.push_back(load_pair(c, k));
      g = baseline_ensemble(pairs, &local.measure, t, &mon);
    }
    Checkpoint ck;
    ck.stage = stage;
    ck.seed = t.seed;
    ck.add_generator("generator", g);
    write_checkpoint(ck, checkpoint_path(c, "baseline_" + name + ".ckpt"));
    return rec.take();
  });
}

RunManifest run_pipeline(const ExperimentConfig& c) {
  c.validate();
  RunManifest m;
  m.config_hash = config_hash(c);
  m.run_id = run_id(c);
  m.metrics_path = "metrics.csv";
  std::vector<MetricRow> rows;

  const auto add = [&](const std::string& rel, const std::string& kind, const std::string& stage) {
    m.artifacts.push_back({rel, kind, stage, file_hash(checkpoint_path(c, rel))});
  };
  const auto write_metrics = [&] {
    std::string csv = metrics_csv_header();
    for (const auto& r : rows) csv += metrics_csv_row(r);
    write_text_file(checkpoint_path(c, m.metrics_path), csv);
  };
  const auto step = [&](const std::string& stage, const std::function<std::vector<MetricRow>()>& body) {
    try {
      auto r = body();
      rows.insert(rows.end(), r.begin(), r.end());
    } catch (...) {
      // Keep what earlier stages measured next to their checkpoints.
      write_metrics();
      throw;
    }
    m.stages.push_back(stage);
  };

  step("synth", [&] { return run_synth(c); });
  for (int k = 0; k < c.dataset.nodes; ++k) add("data/" + dataset_file(k), "dataset", "synth");
  add("data/local.json", "dataset", "synth");
  add("data/target.json", "dataset", "synth");
  add("data/old.json", "dataset", "synth");

  for (int k = 0; k < c.dataset.nodes; ++k) {
    const std::string stage = "pretrain/" + std::to_string(k);
    step(stage, [&] { return run_pretrain(c, k); });
    add("pretrain_" + std::to_string(k) + ".ckpt", "checkpoint", stage);
  }
  if (c.dataset.nodes >= 2) {
    step("coalesce", [&] { return run_coalesce(c); });
    add("stage1.ckpt", "checkpoint", "coalesce");
  }
  if (c.adapt_enabled) {
    if (c.adapt_spec.full_precision) {
      step("adapt", [&] { return run_adapt(c, false); });
      add("stage2.ckpt", "checkpoint", "adapt");
    }
    if (c.adapt_spec.ternary) {
      step("adapt-ternary", [&] { return run_adapt(c, true); });
      add("stage2_ternary.ckpt", "checkpoint", "adapt-ternary");
    }
    for (const auto& b : c.baselines) {
      step("baseline/" + b, [&] { return run_baseline(c, b); });
      add("baseline_" + b + ".ckpt", "checkpoint", "baseline/" + b);
    }
  }
  write_metrics();
  add(m.metrics_path, "metrics", "pipeline");
  write_text_file(checkpoint_path(c, "manifest.json"), manifest_to_json(m));
  return m;
}

OracleResult run_oracle(const std::string& problem_path, const std::string& result_path) {
  const OracleResult r = solve_oracle(read_problem(problem_path));
  if (!result_path.empty()) write_text_file(result_path, oracle_result_to_json(r));
  return r;
}

}  // namespace barycoal
