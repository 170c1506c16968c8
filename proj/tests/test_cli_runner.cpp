#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "kwflow/cli_runner.hpp"

using namespace kwflow;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string temp_dir(const std::string& name) {
  auto p = std::filesystem::path(::testing::TempDir()) / ("kwflow_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

std::string error_of(const json& j) {
  try {
    config_from_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalFlowConfigGetsDefaults) {
  RunConfig c = config_from_json(json{{"mode", "run-flow"}});
  EXPECT_EQ(c.mode, RunMode::RunFlow);
  EXPECT_EQ(c.seed.m, 0);
  EXPECT_EQ(c.seed.p, 1);
  ASSERT_EQ(c.seed.a.size(), 1u);
  EXPECT_EQ(c.seed.a[0], cplx(1.0));
  EXPECT_DOUBLE_EQ(c.seed.delta, 0.05);
  EXPECT_EQ(c.grid.n_t, 33);
  EXPECT_EQ(c.grid.n_z, 64);
  EXPECT_DOUBLE_EQ(c.s_max, 3.0);
  EXPECT_DOUBLE_EQ(c.ds, 0.05);
  EXPECT_DOUBLE_EQ(c.solver.tol, 1e-8);
}

TEST(Config, RoundTripThroughJson) {
  json j = {{"mode", "moduli-compare"},
            {"seed", {{"m", 1}, {"a", {{2, 1}}}, {"delta", 0.04}}},
            {"grid", {{"n_t", 16}, {"n_z", 20}}},
            {"compare", {{"a", {3}}}}};
  RunConfig c = config_from_json(j);
  EXPECT_EQ(c.seed.a[0], cplx(2, 1));
  EXPECT_EQ(c.compare_a[0], cplx(3, 0));
  RunConfig d = config_from_json(to_json(c));
  EXPECT_EQ(to_json(c), to_json(d));
}

TEST(Config, Rejections) {
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"grdi", json::object()}}).find("unknown key 'grdi'"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"grid", {{"nz", 8}}}}).find("grid.nz"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"seed", {{"a", {1, 0}}}}}).find("leading coefficient"),
            std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"seed", {{"delta", -0.1}}}}).find("delta"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"grid", {{"n_t", 7}}}}).find(">= 8"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "fly"}}).find("unknown mode"), std::string::npos);
  EXPECT_NE(error_of({{"seed", json::object()}}).find("mode"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"flow", {{"ds", "big"}}}}).find("flow.ds"), std::string::npos);
  EXPECT_NE(error_of({{"mode", "run-flow"}, {"seed", {{"p", 2}}}}).find("expected 2"), std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLineContext) {
  const std::string path = temp_dir("bad") + ".json";
  {
    std::ofstream out(path);
    out << "{\n  \"mode\": \"run-flow\",\n  \"grid\": {\"n_t\": 12,}\n}\n";
  }
  try {
    load_config(path);
    FAIL() << "expected a parse error";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
}

TEST(Config, CoefficientFlag) {
  auto a = parse_coefficients("1,0;2.5,-1");
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(a[1], cplx(2.5, -1));
  EXPECT_EQ(parse_coefficients("3")[0], cplx(3, 0));
  EXPECT_THROW(parse_coefficients("1,x"), ConfigError);
  EXPECT_THROW(parse_coefficients(""), ConfigError);
}

TEST(Run, VerifyModelReportIsDeterministicAndNamed) {
  RunConfig c = config_from_json(json{{"mode", "verify-model"}, {"seed", {{"m", 1}}}});
  c.out_dir = temp_dir("vm1");
  RunReport r = run(c);
  const std::string first = slurp(std::filesystem::path(c.out_dir) / "report.json");
  c.out_dir = temp_dir("vm2");
  run(c);
  // the config block records the output dir; compare the rest
  json a = json::parse(first), b = json::parse(slurp(std::filesystem::path(c.out_dir) / "report.json"));
  a.erase("config");
  b.erase("config");
  EXPECT_EQ(a.dump(), b.dump());
  for (const char* n : {"model_residual_order", "model_flux", "model_phi_bound", "model_scaling", "algebra_identities"}) {
    bool found = false;
    for (const auto& k : r.checks) found = found || k.name == n;
    EXPECT_TRUE(found) << n;
  }
  for (const auto& k : r.checks) EXPECT_FALSE(k.basis.empty()) << k.name;
  EXPECT_TRUE(a["checks"][0].contains("values"));
}

TEST(Run, FlowPipelineWritesTrajectoryAndSnapshots) {
  RunConfig c = config_from_json(json{{"mode", "run-flow"},
                                      {"grid", {{"n_t", 12}, {"n_z", 12}}},
                                      {"flow", {{"s_max", 0.3}, {"ds", 0.05}}},
                                      {"output", {{"snapshots", {0.0, 0.1}}, {"slices", true}}}});
  c.out_dir = temp_dir("flow");
  RunReport r = run(c);
  const std::filesystem::path d(c.out_dir);
  std::ifstream traj(d / "trajectory.csv");
  std::string header;
  std::getline(traj, header);
  EXPECT_EQ(header, "s,X_l2,R1,R2,R3,sup_u");
  EXPECT_TRUE(std::filesystem::exists(d / "snapshot_s0.000.csv"));
  EXPECT_TRUE(std::filesystem::exists(d / "snapshot_s0.100.csv"));
  EXPECT_TRUE(std::filesystem::exists(d / "slice_final.csv"));
  json rep = json::parse(slurp(d / "report.json"));
  EXPECT_EQ(rep["mode"], "run-flow");
  EXPECT_EQ(rep["data"]["flow"]["steps"], 6);
  EXPECT_EQ(rep["pass"].get<bool>(), r.pass());
}
