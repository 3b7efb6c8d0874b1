// Copyright 2026 The barycoal Authors
// SPDX-License-Identifier: Apache-2.0

#include "barycoal.h"

#include "barycoal/error.hpp"
#include "barycoal/experiment.hpp"

#include <cstring>
#include <filesystem>
#include <new>
#include <string>

struct barycoal_measure {
  barycoal::DiscreteMeasure m;
};

struct barycoal_experiment {
  barycoal::ExperimentConfig config;
};

namespace {

thread_local std::string g_error;
thread_local std::string g_stage;

barycoal_status fail(barycoal_status s, const std::string& msg) {
  g_error = msg;
  return s;
}

// Runs body and maps exceptions onto status codes.
template <class F>
barycoal_status guarded(F&& body) {
  g_error.clear();
  g_stage.clear();
  try {
    body();
    return BARYCOAL_OK;
  } catch (const barycoal::StageError& e) {
    g_stage = e.stage();
    return fail(BARYCOAL_ERR_STAGE, e.what());
  } catch (const barycoal::ConfigError& e) {
    return fail(BARYCOAL_ERR_CONFIG, e.what());
  } catch (const barycoal::InfeasibleError& e) {
    return fail(BARYCOAL_ERR_INFEASIBLE, e.what());
  } catch (const barycoal::ParseError& e) {
    return fail(BARYCOAL_ERR_PARSE, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(BARYCOAL_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(BARYCOAL_ERR_INTERNAL, "out of memory");
  } catch (const std::ios_base::failure& e) {
    return fail(BARYCOAL_ERR_IO, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(BARYCOAL_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(BARYCOAL_ERR_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

void write_stage_metrics(const barycoal::ExperimentConfig& c, const std::string& stage,
                         const std::vector<barycoal::MetricRow>& rows) {
  std::string name = stage;
  for (char& ch : name) {
    if (ch == '/') ch = '_';
  }
  std::string csv = barycoal::metrics_csv_header();
  for (const auto& r : rows) csv += barycoal::metrics_csv_row(r);
  barycoal::write_text_file(barycoal::checkpoint_path(c, "metrics_" + name + ".csv"), csv);
}

}  // namespace

extern "C" {

const char* barycoal_version(void) { return "0.1.0"; }

const char* barycoal_status_name(barycoal_status status) {
  switch (status) {
    case BARYCOAL_OK: return "ok";
    case BARYCOAL_ERR_INVALID_ARGUMENT: return "invalid argument";
    case BARYCOAL_ERR_CONFIG: return "config error";
    case BARYCOAL_ERR_STAGE: return "stage failure";
    case BARYCOAL_ERR_INFEASIBLE: return "infeasible";
    case BARYCOAL_ERR_PARSE: return "parse error";
    case BARYCOAL_ERR_IO: return "i/o error";
    case BARYCOAL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* barycoal_last_error(void) { return g_error.c_str(); }
const char* barycoal_last_error_stage(void) { return g_stage.c_str(); }
void barycoal_string_free(char* s) { std::free(s); }

barycoal_status barycoal_measure_create(const double* points, size_t n, size_t dim, const double* weights,
                                        barycoal_measure** out) {
  return guarded([&] {
    require(out != nullptr && points != nullptr, "measure_create: null argument");
    require(n > 0 && dim > 0, "measure_create: need n > 0 and dim > 0");
    std::vector<double> pts(points, points + n * dim);
    barycoal::DiscreteMeasure m = weights == nullptr
                                      ? barycoal::DiscreteMeasure::uniform(std::move(pts), dim)
                                      : barycoal::DiscreteMeasure(std::move(pts), dim, {weights, weights + n});
    *out = new barycoal_measure{std::move(m)};
  });
}

barycoal_status barycoal_measure_read(const char* path, barycoal_measure** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "measure_read: null argument");
    *out = new barycoal_measure{barycoal::read_measure(path).measure};
  });
}

barycoal_status barycoal_measure_write(const barycoal_measure* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "measure_write: null argument");
    barycoal::write_measure(m->m, path);
  });
}

size_t barycoal_measure_size(const barycoal_measure* m) { return m == nullptr ? 0 : m->m.size(); }
size_t barycoal_measure_dim(const barycoal_measure* m) { return m == nullptr ? 0 : m->m.dim(); }

barycoal_status barycoal_measure_copy(const barycoal_measure* m, double* points, double* weights) {
  return guarded([&] {
    require(m != nullptr, "measure_copy: null measure");
    if (points != nullptr) std::copy(m->m.points().begin(), m->m.points().end(), points);
    if (weights != nullptr) std::copy(m->m.weights().begin(), m->m.weights().end(), weights);
  });
}

void barycoal_measure_free(barycoal_measure* m) { delete m; }

barycoal_status barycoal_w1_distance(const barycoal_measure* a, const barycoal_measure* b, barycoal_metric metric,
                                     double* out) {
  return guarded([&] {
    require(a != nullptr && b != nullptr && out != nullptr, "w1_distance: null argument");
    require(metric == BARYCOAL_METRIC_L1 || metric == BARYCOAL_METRIC_L2, "w1_distance: unknown metric");
    const barycoal::GroundMetric g = metric == BARYCOAL_METRIC_L1 ? barycoal::GroundMetric::l1()
                                                                   : barycoal::GroundMetric::l2();
    *out = barycoal::w1_distance(a->m, b->m, g).cost;
  });
}

barycoal_status barycoal_oracle_run(const char* problem_path, const char* result_path, double* objective) {
  return guarded([&] {
    require(problem_path != nullptr, "oracle_run: null problem path");
    const barycoal::OracleResult r = barycoal::run_oracle(problem_path, result_path == nullptr ? "" : result_path);
    if (objective != nullptr) *objective = r.barycenter.objective;
  });
}

barycoal_status barycoal_experiment_load(const char* config_path, barycoal_experiment** out) {
  return guarded([&] {
    require(config_path != nullptr && out != nullptr, "experiment_load: null argument");
    *out = new barycoal_experiment{barycoal::load_experiment_config(config_path)};
  });
}

barycoal_status barycoal_experiment_parse(const char* json_text, barycoal_experiment** out) {
  return guarded([&] {
    require(json_text != nullptr && out != nullptr, "experiment_parse: null argument");
    *out = new barycoal_experiment{barycoal::parse_experiment_config(json_text)};
  });
}

barycoal_status barycoal_experiment_set_seed(barycoal_experiment* e, uint64_t seed) {
  return guarded([&] {
    require(e != nullptr, "experiment_set_seed: null experiment");
    e->config.seed = seed;
  });
}

barycoal_status barycoal_experiment_set_output_dir(barycoal_experiment* e, const char* dir) {
  return guarded([&] {
    require(e != nullptr && dir != nullptr && *dir != '\0', "experiment_set_output_dir: need a directory");
    e->config.output_dir = dir;
  });
}

uint64_t barycoal_experiment_seed(const barycoal_experiment* e) { return e == nullptr ? 0 : e->config.seed; }
int barycoal_experiment_nodes(const barycoal_experiment* e) { return e == nullptr ? 0 : e->config.dataset.nodes; }

barycoal_status barycoal_experiment_config_json(const barycoal_experiment* e, char** out) {
  return guarded([&] {
    require(e != nullptr && out != nullptr, "experiment_config_json: null argument");
    *out = dup_string(barycoal::experiment_config_to_json(e->config));
  });
}

void barycoal_experiment_free(barycoal_experiment* e) { delete e; }

barycoal_status barycoal_run_synth(const barycoal_experiment* e) {
  return guarded([&] {
    require(e != nullptr, "run_synth: null experiment");
    barycoal::run_synth(e->config);
  });
}

barycoal_status barycoal_run_pretrain(const barycoal_experiment* e, int node) {
  return guarded([&] {
    require(e != nullptr, "run_pretrain: null experiment");
    require(node < e->config.dataset.nodes, "run_pretrain: node index out of range");
    for (int k = node < 0 ? 0 : node; k < (node < 0 ? e->config.dataset.nodes : node + 1); ++k) {
      write_stage_metrics(e->config, "pretrain/" + std::to_string(k), barycoal::run_pretrain(e->config, k));
    }
  });
}

barycoal_status barycoal_run_coalesce(const barycoal_experiment* e) {
  return guarded([&] {
    require(e != nullptr, "run_coalesce: null experiment");
    write_stage_metrics(e->config, "coalesce", barycoal::run_coalesce(e->config));
  });
}

barycoal_status barycoal_run_adapt(const barycoal_experiment* e, int ternary) {
  return guarded([&] {
    require(e != nullptr, "run_adapt: null experiment");
    write_stage_metrics(e->config, ternary ? "adapt-ternary" : "adapt", barycoal::run_adapt(e->config, ternary != 0));
  });
}

barycoal_status barycoal_run_baseline(const barycoal_experiment* e, const char* name) {
  return guarded([&] {
    require(e != nullptr && name != nullptr, "run_baseline: null argument");
    write_stage_metrics(e->config, std::string("baseline/") + name, barycoal::run_baseline(e->config, name));
  });
}

barycoal_status barycoal_run_pipeline(const barycoal_experiment* e, char** manifest_path) {
  return guarded([&] {
    require(e != nullptr, "run_pipeline: null experiment");
    barycoal::run_pipeline(e->config);
    if (manifest_path != nullptr) *manifest_path = dup_string(barycoal::checkpoint_path(e->config, "manifest.json"));
  });
}

barycoal_status barycoal_evaluate_checkpoint(const barycoal_experiment* e, const char* checkpoint_path,
                                             const char* network, barycoal_evaluation* out) {
  return guarded([&] {
    require(e != nullptr && checkpoint_path != nullptr && out != nullptr, "evaluate_checkpoint: null argument");
    const barycoal::Checkpoint ck = barycoal::read_checkpoint(checkpoint_path);
    const barycoal::NamedNetwork& n = ck.get(network == nullptr ? "generator" : network);
    const barycoal::GeneratorModel g =
        n.ternary.empty() ? n.generator() : barycoal::ternary_generator(n).quantized_model();
    const barycoal::Evaluation ev = barycoal::evaluate_generator(e->config, g);
    *out = {ev.w1_to_target, ev.w1_to_old, ev.frechet_score};
  });
}

}  // extern "C"
