// Acceptance driver: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Tolerances live in the named checks (src/cli_runner.cpp); runtime limits here.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kwflow/cli_runner.hpp"
#include "kwflow/seed_builder.hpp"

using namespace kwflow;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::vector<Check> checks;
  double seconds = 0;
  double time_limit = 0;  // 0: none
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

const Check& find(const std::vector<Check>& cs, const std::string& name) {
  for (const auto& c : cs)
    if (c.name == name) return c;
  throw std::runtime_error("missing check " + name);
}

template <class F>
double timed(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void print(const Criterion& c) {
  bool pass = c.time_limit <= 0 || c.seconds <= c.time_limit;
  std::string failed;
  for (const auto& k : c.checks)
    if (!k.pass) {
      pass = false;
      failed += (failed.empty() ? "" : ",") + k.name;
    }
  if (c.time_limit > 0 && c.seconds > c.time_limit) failed += (failed.empty() ? "" : ",") + std::string("runtime");
  std::printf("criterion %2d %s  %s (%.1fs)%s%s%s\n", c.id, pass ? "PASS" : "FAIL", c.title.c_str(), c.seconds,
              c.detail.empty() ? "" : "  ", c.detail.c_str(), failed.empty() ? "" : ("  failed: " + failed).c_str());
  std::fflush(stdout);
}

}  // namespace

int main() {
  std::vector<Criterion> all;
  const GridSpec desk{0.02, 8.0, 32, 6.0, 32};
  const SeedParams s0{0, 1, {1.0}, 0.05};
  const SeedParams s1{1, 1, {cplx(2.0, 1.0)}, 0.05};

  auto emit = [&all](Criterion c) {
    print(c);
    all.push_back(std::move(c));
  };

  {
    Criterion c{1, "model residuals converge at order 2", {}, 0, 10};
    c.seconds = timed([&] { c.checks.push_back(check_model_residual_order()); });
    emit(c);
  }
  {
    Criterion c{2, "model flux equals 2 pi m", {}};
    c.seconds = timed([&] { c.checks.push_back(check_model_flux()); });
    const auto& v = c.checks[0].values;
    c.detail = "flux(m=1,t=1)=" + fmt(v[1]["flux"].get<double>()) + " target " + fmt(v[1]["target"].get<double>());
    emit(c);
  }
  {
    Criterion c{3, "|phi| <= 1/(sqrt2 t), equality iff m = 0", {}};
    c.seconds = timed([&] { c.checks.push_back(check_model_phi_bound()); });
    emit(c);
  }
  {
    Criterion c{4, "scaling invariance of model fields", {}};
    c.seconds = timed([&] { c.checks.push_back(check_model_scaling()); });
    c.detail = "max rel " + fmt(c.checks[0].values["max_relative_error"].get<double>());
    emit(c);
  }
  {
    Criterion c{5, "algebra identities", {}};
    c.seconds = timed([&] { c.checks.push_back(check_algebra_identities()); });
    emit(c);
  }
  {
    Criterion c{6, "Green's function and Hardy suites", {}, 0, 30};
    c.seconds = timed([&] { c.checks = green_hardy_checks(); });
    emit(c);
  }
  {
    Criterion c{7, "seed validity (m=0 a=1; m=1 a=2+i)", {}};
    c.seconds = timed([&] {
      for (const SeedParams& p : {s0, s1})
        for (auto& k : seed_checks(p, desk)) {
          k.name += p.m == 0 ? "[m=0]" : "[m=1]";
          c.checks.push_back(k);
        }
    });
    c.detail = "tail slopes " + fmt(find(c.checks, "seed_X_tail[m=0]").values["slope"].get<double>()) + ", " +
               fmt(find(c.checks, "seed_X_tail[m=1]").values["slope"].get<double>());
    emit(c);
  }
  {
    Criterion c{8, "(w, q) reconstruction and holomorphic shift", {}};
    c.seconds = timed([&] {
      for (const SeedParams& p : {s0, s1})
        for (auto& k : reconstruction_checks(p)) {
          k.name += p.m == 0 ? "[m=0]" : "[m=1]";
          c.checks.push_back(k);
        }
    });
    emit(c);
  }

  FlowChecks fc;
  double flow_seconds = timed([&] {
    FlowConfig cfg;
    cfg.s_max = 2.0;
    cfg.ds = 0.05;
    fc = flow_checks(assemble_seed(s0, HalfSpaceGrid(desk)), cfg);
  });
  {
    Criterion c{9, "flow contraction on 32^3", {}, flow_seconds, 15 * 60};
    for (const char* n : {"flow_decay_rate", "flow_residual_growth", "flow_sup_u_envelope"})
      c.checks.push_back(find(fc.checks, n));
    c.detail = "slope " + fmt(find(fc.checks, "flow_decay_rate").values["slope"].get<double>()) + ", growth " +
               fmt(find(fc.checks, "flow_residual_growth").values["max_growth"].get<double>()) + ", sup_u R2 " +
               fmt(find(fc.checks, "flow_sup_u_envelope").values["r2"].get<double>());
    emit(c);
  }
  {
    Criterion c{10, "curvature tails of seed and final field", {}};
    for (const char* n : {"curvature_tail_seed", "curvature_tail_final"}) c.checks.push_back(find(fc.checks, n));
    const auto& f = find(fc.checks, "curvature_tail_final").values;
    c.detail = "slopes " + fmt(find(fc.checks, "curvature_tail_seed").values["slope"].get<double>()) + ", " +
               fmt(f["slope"].get<double>()) + "; M'/M " + fmt(f["M_ratio"].get<double>());
    emit(c);
  }
  {
    Criterion c{11, "moduli separation a=1 vs a=2", {}};
    SeedParams s2 = s0;
    s2.a = {2.0};
    c.seconds = timed([&] { c.checks = moduli_checks(s0, s2, desk); });
    const auto& v = find(c.checks, "moduli_separation").values;
    c.detail = "distance " + fmt(v["distance"].get<double>()) + " vs fit error " + fmt(v["fit_error"].get<double>());
    emit(c);
  }
  {
    Criterion c{12, "Donaldson tau", {}};
    for (const char* n : {"tau_nonnegative", "tau_subharmonic"}) c.checks.push_back(find(fc.checks, n));
    const auto& v = find(fc.checks, "tau_subharmonic").values;
    c.detail = "min laplacian " + fmt(v["min_laplacian"].get<double>()) + " vs " + fmt(v["bound"].get<double>());
    emit(c);
  }

  int failed = 0;
  for (const auto& c : all) {
    bool pass = c.time_limit <= 0 || c.seconds <= c.time_limit;
    for (const auto& k : c.checks) pass = pass && k.pass;
    failed += pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria pass\n", static_cast<int>(all.size()) - failed, all.size());
  return failed == 0 ? 0 : 1;
}
