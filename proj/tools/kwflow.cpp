// kwflow: run a verification suite or a flow pipeline from a JSON config.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "kwflow/cli_runner.hpp"

namespace {

constexpr int kUsageError = 2;
constexpr int kCheckFailure = 1;
constexpr int kPipelineError = 3;

void apply_threads(int from_config) {
#ifdef _OPENMP
  int n = from_config;
  if (const char* env = std::getenv("KWFLOW_THREADS")) {
    const int cap = std::atoi(env);
    if (cap > 0) n = n > 0 ? std::min(n, cap) : cap;
  }
  if (n > 0) omp_set_num_threads(n);
#else
  (void)from_config;
#endif
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kwflow: model solutions, seed data, and the deformation flow"};
  app.footer(kwflow::config_help());
  std::string config_path, mode, out_dir, seed_a;
  bool verbose = false;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--mode", mode, "override the config mode");
  app.add_option("--out", out_dir, "output directory (overrides output.dir)");
  app.add_option("--seed-a", seed_a, "seed coefficients \"re,im;re,im\" (overrides seed.a and seed.p)");
  app.add_flag("--verbose,-v", verbose, "progress on stderr");
  CLI11_PARSE(app, argc, argv);

  kwflow::RunConfig cfg;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      // parse the file for syntax first so that errors carry line context
      cfg = kwflow::load_config(config_path);
      j = kwflow::to_json(cfg);
    } else if (mode.empty()) {
      throw kwflow::ConfigError("need --config or --mode");
    }
    if (!mode.empty()) j["mode"] = mode;
    if (!out_dir.empty()) j["output"]["dir"] = out_dir;
    if (!seed_a.empty()) {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& c : kwflow::parse_coefficients(seed_a)) arr.push_back({c.real(), c.imag()});
      j["seed"]["a"] = arr;
      j["seed"]["p"] = arr.size();
    }
    if (j.contains("compare") && j["compare"]["a"].empty()) j.erase("compare");
    cfg = kwflow::config_from_json(j);
  } catch (const kwflow::ConfigError& e) {
    std::cerr << "kwflow: invalid configuration: " << e.what() << "\n";
    return kUsageError;
  }
  apply_threads(cfg.threads);

  try {
    kwflow::RunReport rep = kwflow::run(cfg, verbose);
    for (const auto& c : rep.checks)
      std::printf("%-28s %s\n", c.name.c_str(), c.pass ? "pass" : "FAIL");
    if (!rep.pass()) {
      std::cerr << "kwflow: failing checks:";
      for (const auto& n : rep.failed()) std::cerr << ' ' << n;
      std::cerr << "\n";
      return kCheckFailure;
    }
  } catch (const std::exception& e) {
    std::cerr << "kwflow: pipeline failure: " << e.what() << "\n";
    return kPipelineError;
  }
  return 0;
}
