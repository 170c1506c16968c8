#pragma once
// Run configuration, the named verification checks, and the mode pipelines
// behind the kwflow command line tool.

#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kwflow/elliptic_solver.hpp"
#include "kwflow/flow_engine.hpp"
#include "kwflow/grid.hpp"
#include "kwflow/seed_params.hpp"

namespace kwflow {

enum class RunMode { VerifyModel, VerifyAnalysis, BuildSeed, RunFlow, ModuliCompare };
RunMode parse_mode(const std::string& name);  // throws ConfigError
std::string to_string(RunMode m);

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  RunMode mode = RunMode::RunFlow;
  SeedParams seed;
  GridSpec grid;
  double s_max = 3.0;
  double ds = 0.05;
  SolverConfig solver;
  std::string out_dir = "kwflow_out";
  std::vector<double> snapshot_s;  // flow times at which to dump the field
  bool slices = false;             // t-slice CSV of residual magnitudes
  std::vector<cplx> compare_a;     // moduli-compare: second coefficient set (default 2 a)
  int threads = 0;                 // 0: leave the OpenMP default

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Strict parse: unknown keys, wrong types and missing "mode" are errors.
RunConfig config_from_json(const nlohmann::json& j);
// Reads and parses a file; syntax errors report line and column.
RunConfig load_config(const std::string& path);
nlohmann::json to_json(const RunConfig& c);
// Parses "re,im;re,im" (an entry may omit ",im").
std::vector<cplx> parse_coefficients(const std::string& text);
// Documented defaults, printed by --help.
std::string config_help();

// ---- named checks ----

struct Check {
  std::string name;
  std::string basis;  // what property is being checked
  bool pass = false;
  nlohmann::json values;
};
void to_json(nlohmann::json& j, const Check& c);

Check check_model_residual_order();
Check check_model_flux();
Check check_model_phi_bound(int samples = 1000, unsigned seed = 3);
Check check_model_scaling(int samples = 1000, unsigned seed = 5);
Check check_algebra_identities(int samples = 200, unsigned seed = 9);
std::vector<Check> green_hardy_checks();

// Residual order on a resolved small-t patch, zero regions, weighted X on
// `grid` and a 1.5x refinement, and the X tail on `grid`.
std::vector<Check> seed_checks(const SeedParams& p, const GridSpec& grid);
// (w, q) reconstruction against the assembled seed and the holomorphic-shift
// invariance, on a fixed patch at two resolutions.
std::vector<Check> reconstruction_checks(const SeedParams& p);

struct FlowChecks {
  FlowRun run;
  std::vector<Check> checks;
};
FlowChecks flow_checks(const GaugeField& seed, const FlowConfig& cfg);

std::vector<Check> moduli_checks(const SeedParams& a, const SeedParams& b, const GridSpec& grid);

// ---- pipelines ----

struct RunReport {
  RunMode mode = RunMode::RunFlow;
  nlohmann::json config;
  std::vector<Check> checks;
  nlohmann::json data;  // mode-specific numbers (flow report, signatures, ...)
  bool pass() const;
  std::vector<std::string> failed() const;
};
void to_json(nlohmann::json& j, const RunReport& r);

// Runs the mode pipeline and writes report.json (and trajectory.csv, snapshots,
// slices where they apply) into cfg.out_dir.
RunReport run(const RunConfig& cfg, bool verbose = false);

}  // namespace kwflow
