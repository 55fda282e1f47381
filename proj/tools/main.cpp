#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>
#include <vector>

#include "ontoweak/ontoweak.h"

namespace {

constexpr const char* kKinds[] = {"mlp", "siamese_onto", "siamese_gcn", "mlp_gcn"};

void print_line(const char* line, void*) {
  std::fputs(line, stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

int fail(ow_status status) {
  std::fprintf(stderr, "error: %s\n", ow_last_error());
  return static_cast<int>(status);
}

struct ConfigDeleter {
  void operator()(ow_config* c) const { ow_config_destroy(c); }
};
using ConfigPtr = std::unique_ptr<ow_config, ConfigDeleter>;

struct ReportDeleter {
  void operator()(ow_gradcheck_report* r) const { ow_gradcheck_destroy(r); }
};

// Turns "--key value" and "--key=value" pairs into config assignments.
ow_status apply_overrides(ow_config* cfg, const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0 || arg.size() == 2) {
      std::fprintf(stderr, "error: unexpected argument '%s'\n", arg.c_str());
      return OW_ERR_CONFIG;
    }
    std::string key = arg.substr(2);
    std::string value;
    if (const auto eq = key.find('='); eq != std::string::npos) {
      value = key.substr(eq + 1);
      key.resize(eq);
    } else if (i + 1 < args.size()) {
      value = args[++i];
    } else {
      std::fprintf(stderr, "error: option '--%s' needs a value\n", key.c_str());
      return OW_ERR_CONFIG;
    }
    for (char& c : key) {
      if (c == '-') c = '_';
    }
    if (ow_status s = ow_config_set(cfg, key.c_str(), value.c_str()); s != OW_OK) {
      fail(s);
      return s;
    }
  }
  return OW_OK;
}

struct CommonOptions {
  std::string config_file;
  bool deterministic = false;
};

CLI::App* add_run_command(CLI::App& app, const char* name, const char* help, CommonOptions& opts) {
  CLI::App* sub = app.add_subcommand(name, help);
  sub->add_option("--config", opts.config_file, "key=value configuration file");
  sub->add_flag("--deterministic", opts.deterministic, "suppress timing in logs");
  sub->allow_extras();
  sub->footer("Any configuration key can be overridden with --key value.");
  return sub;
}

int run_gradcheck(const std::string& kind, double tolerance, std::size_t entries) {
  std::vector<std::string> kinds;
  if (kind == "all") {
    kinds.assign(std::begin(kKinds), std::end(kKinds));
  } else {
    kinds.push_back(kind);
  }
  bool all_passed = true;
  for (const auto& k : kinds) {
    ow_gradcheck_report* raw = nullptr;
    if (ow_status s = ow_gradcheck(k.c_str(), tolerance, entries, &raw); s != OW_OK) {
      fail(s);
      return s;
    }
    std::unique_ptr<ow_gradcheck_report, ReportDeleter> report(raw);
    const bool passed = ow_gradcheck_passed(raw) != 0;
    std::printf("%s %s max_rel_error %.3e\n", k.c_str(), passed ? "PASS" : "FAIL",
                ow_gradcheck_max_error(raw));
    for (std::size_t i = 0; i < ow_gradcheck_param_count(raw); ++i) {
      std::printf("  %-32s entries %4zu max_rel_error %.3e\n", ow_gradcheck_param_name(raw, i),
                  ow_gradcheck_param_entries(raw, i), ow_gradcheck_param_error(raw, i));
    }
    all_passed = all_passed && passed;
  }
  return all_passed ? 0 : OW_ERR_NUMERIC;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ontology-aware weak-label audio tagging"};
  app.require_subcommand(1);

  CommonOptions opts;
  CLI::App* synth = add_run_command(app, "synth-data", "write a synthetic corpus", opts);
  CLI::App* corr = add_run_command(app, "build-corr", "build a label correlation matrix", opts);
  std::string corr_output;
  corr->add_option("--output", corr_output, "output file (default <out_dir>/correlation.txt)");
  CLI::App* train = add_run_command(app, "train", "train a model", opts);
  CLI::App* eval = add_run_command(app, "eval", "evaluate a checkpoint", opts);

  CLI::App* grad = app.add_subcommand("gradcheck", "check gradients on a toy ontology");
  std::string kind = "all";
  double tolerance = 1e-4;
  std::size_t entries = 24;
  grad->add_option("--model", kind, "model kind or 'all'")
      ->check(CLI::IsMember({"all", "mlp", "siamese_onto", "siamese_gcn", "mlp_gcn"}));
  grad->add_option("--tolerance", tolerance, "maximum relative error");
  grad->add_option("--entries", entries, "entries sampled per parameter (0 = all)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return OW_ERR_CONFIG;
  }

  if (grad->parsed()) return run_gradcheck(kind, tolerance, entries);

  ow_config* raw = nullptr;
  if (ow_status s = ow_config_create(&raw); s != OW_OK) {
      fail(s);
      return s;
    }
  ConfigPtr cfg(raw);
  if (!opts.config_file.empty()) {
    if (ow_status s = ow_config_load_file(raw, opts.config_file.c_str()); s != OW_OK) {
      fail(s);
      return s;
    }
  }
  CLI::App* chosen = app.get_subcommands().front();
  if (ow_status s = apply_overrides(raw, chosen->remaining()); s != OW_OK) return s;
  if (opts.deterministic) ow_config_set(raw, "deterministic", "true");

  ow_status status = OW_OK;
  if (chosen == synth) {
    status = ow_synth_data(raw, print_line, nullptr);
  } else if (chosen == corr) {
    status = ow_build_corr(raw, corr_output.empty() ? nullptr : corr_output.c_str(), print_line,
                           nullptr);
  } else if (chosen == train) {
    status = ow_train(raw, print_line, nullptr);
  } else if (chosen == eval) {
    status = ow_eval(raw, print_line, nullptr);
  }
  return status == OW_OK ? 0 : fail(status);
}
