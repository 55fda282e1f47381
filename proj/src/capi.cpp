#include "ontoweak/ontoweak.h"

#include <cstring>
#include <exception>
#include <new>
#include <string>
#include <vector>

#include "ontoweak/config.hpp"
#include "ontoweak/errors.hpp"
#include "ontoweak/metrics.hpp"
#include "ontoweak/pipeline.hpp"
#include "ontoweak/toy.hpp"

struct ow_config {
  ontoweak::ConfigMap map;
};

struct ow_gradcheck_report {
  ontoweak::GradCheckReport report;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
ow_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return OW_OK;
  } catch (const ontoweak::Error& e) {
    g_last_error = e.what();
    return static_cast<ow_status>(e.kind());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = e.what();
  } catch (...) {
    g_last_error = "unknown error";
  }
  return OW_ERR_INTERNAL;
}

ontoweak::LogSink sink(ow_log_fn log, void* user) {
  if (!log) return {};
  return [log, user](std::string_view line) {
    const std::string copy(line);
    log(copy.c_str(), user);
  };
}

void require(const void* p, const char* what) {
  if (!p) throw ontoweak::ConfigError(std::string(what) + " is null");
}

}  // namespace

extern "C" {

const char* ow_last_error(void) { return g_last_error.c_str(); }

ow_status ow_config_create(ow_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ow_config;
  });
}

void ow_config_destroy(ow_config* cfg) { delete cfg; }

ow_status ow_config_set(ow_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "config");
    require(key, "key");
    require(value, "value");
    cfg->map.set(key, value);
  });
}

ow_status ow_config_load_file(ow_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "config");
    require(path, "path");
    cfg->map.load_file(path);
  });
}

ow_status ow_config_resolved(const ow_config* cfg, char* buf, size_t cap, size_t* needed) {
  return guarded([&] {
    require(cfg, "config");
    const std::string text = ontoweak::RunConfig::resolve(cfg->map).to_text();
    if (needed) *needed = text.size() + 1;
    if (buf && cap > 0) {
      const std::size_t n = std::min(cap - 1, text.size());
      std::memcpy(buf, text.data(), n);
      buf[n] = '\0';
    }
  });
}

ow_status ow_synth_data(const ow_config* cfg, ow_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config");
    ontoweak::run_synth_data(ontoweak::RunConfig::resolve(cfg->map), sink(log, user));
  });
}

ow_status ow_build_corr(const ow_config* cfg, const char* out_path, ow_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config");
    const auto config = ontoweak::RunConfig::resolve(cfg->map);
    const std::filesystem::path path =
        out_path ? std::filesystem::path(out_path) : config.out_dir / "correlation.txt";
    ontoweak::run_build_corr(config, path, sink(log, user));
  });
}

ow_status ow_train(const ow_config* cfg, ow_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config");
    ontoweak::run_train(ontoweak::RunConfig::resolve(cfg->map), sink(log, user));
  });
}

ow_status ow_eval(const ow_config* cfg, ow_log_fn log, void* user) {
  return guarded([&] {
    require(cfg, "config");
    ontoweak::run_eval(ontoweak::RunConfig::resolve(cfg->map), sink(log, user));
  });
}

ow_status ow_gradcheck(const char* kind, double tolerance, size_t entries_per_param,
                       ow_gradcheck_report** out) {
  return guarded([&] {
    require(kind, "kind");
    require(out, "out");
    if (!(tolerance > 0.0)) throw ontoweak::ParameterError("tolerance must be positive");
    ontoweak::GradCheckOptions options;
    options.tolerance = tolerance;
    options.max_entries_per_param = entries_per_param;
    auto report = ontoweak::gradcheck_kind(ontoweak::parse_model_kind(kind), options);
    *out = new ow_gradcheck_report{std::move(report)};
  });
}

void ow_gradcheck_destroy(ow_gradcheck_report* report) { delete report; }

int ow_gradcheck_passed(const ow_gradcheck_report* report) {
  return report && report->report.passed ? 1 : 0;
}

double ow_gradcheck_max_error(const ow_gradcheck_report* report) {
  return report ? report->report.max_rel_error : 0.0;
}

size_t ow_gradcheck_param_count(const ow_gradcheck_report* report) {
  return report ? report->report.params.size() : 0;
}

const char* ow_gradcheck_param_name(const ow_gradcheck_report* report, size_t i) {
  if (!report || i >= report->report.params.size()) return "";
  return report->report.params[i].name.c_str();
}

double ow_gradcheck_param_error(const ow_gradcheck_report* report, size_t i) {
  if (!report || i >= report->report.params.size()) return 0.0;
  return report->report.params[i].max_rel_error;
}

size_t ow_gradcheck_param_entries(const ow_gradcheck_report* report, size_t i) {
  if (!report || i >= report->report.params.size()) return 0;
  return report->report.params[i].entries_checked;
}

ow_status ow_average_precision(const double* scores, const int* labels, size_t n, double* out,
                               int* defined) {
  return guarded([&] {
    require(out, "out");
    require(defined, "defined");
    if (n > 0) {
      require(scores, "scores");
      require(labels, "labels");
    }
    const auto ap = ontoweak::average_precision({scores, n}, {labels, n});
    *defined = ap.has_value();
    *out = ap.value_or(0.0);
  });
}

ow_status ow_roc_auc(const double* scores, const int* labels, size_t n, double* out,
                     int* defined) {
  return guarded([&] {
    require(out, "out");
    require(defined, "defined");
    if (n > 0) {
      require(scores, "scores");
      require(labels, "labels");
    }
    const auto auc = ontoweak::roc_auc({scores, n}, {labels, n});
    *defined = auc.has_value();
    *out = auc.value_or(0.0);
  });
}

ow_status ow_ontology_counts(const char* path, size_t* num_sub, size_t* num_super) {
  return guarded([&] {
    require(path, "path");
    const auto ont = ontoweak::Ontology::load(path);
    if (num_sub) *num_sub = ont.num_sub();
    if (num_super) *num_super = ont.num_super();
  });
}

}  // extern "C"
