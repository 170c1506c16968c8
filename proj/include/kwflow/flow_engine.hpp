#pragma once
// The deformation flow: at each step solve Op u = X for the current field and
// move (A, phi, a3) along the infinitesimal complex gauge transformation
// generated by u. To first order X decreases as e^{-s}.

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kwflow/elliptic_solver.hpp"
#include "kwflow/field_state.hpp"

namespace kwflow {

struct HistoryEntry {
  double s = 0;
  double X_l2 = 0;
  double R1 = 0, R2 = 0, R3 = 0;  // interior L2 norms
  double sup_u = 0;               // of the u that moves the field away from this entry
  double kappa = 0;               // max over interior of t |D u|
  int iterations = 0;
  double tau_min = 0;
};

struct FlowState {
  double s = 0;
  GaugeField field;
  NodeGroup g;  // accumulated deformation, identity at s = 0
  double X0_norm = 0;
  std::vector<HistoryEntry> history;
  NodeAlg u_last;  // warm start for the next solve

  static FlowState start(const GaugeField& seed);
};

struct FlowConfig {
  double s_max = 3.0;
  double ds = 0.05;
  SolverConfig solver{1e-8, 0};
  bool verbose = false;
  std::function<void(const FlowState&)> on_step;  // called after every step
};

// One explicit Euler step. Throws std::runtime_error if the update is not finite.
FlowState flow_step(const FlowState& state, double ds, const SolverConfig& solver);
// The update of the fields by u (no solve); exposed for the linearization checks.
GaugeField flow_update(const GaugeField& f, const NodeAlg& u, double ds);

struct ExpFit {
  double amplitude = 0, rate = 0, r2 = 0;  // y ~ amplitude * exp(-rate s)
};
ExpFit fit_exponential(const std::vector<double>& s, const std::vector<double>& y);

struct DecayReport {
  ExpFit X_fit, sup_u_fit;
  bool sup_u_decreasing = true;
  double kappa_min = 0, kappa_max = 0;  // of kappa e^{s}
  double X_slope = 0;                   // d ln X / ds (target -1)
};
DecayReport decay_diagnostics(const std::vector<HistoryEntry>& history);

struct FlowReport {
  DecayReport decay;
  double decay_exponent = 0;  // -X_slope
  bool flow_failure = false;  // decay exponent < 0.5
  double residual_growth = 0; // max over R1..R3 of final / initial
  double face_deviation_tmin = 0, face_deviation_tmax = 0;  // max |g - 1| on the t faces' neighbours
  double det_error = 0;       // max |det g - 1|
  double tau_min = 0;         // over all states
  int steps = 0;
};
void to_json(nlohmann::json& j, const FlowReport& r);
void to_json(nlohmann::json& j, const HistoryEntry& h);

struct FlowRun {
  FlowState final;
  FlowReport report;
};
FlowRun run_flow(const GaugeField& seed, const FlowConfig& cfg);

// Trajectory CSV with the header s,X_l2,R1,R2,R3,sup_u
void write_trajectory(const std::string& path, const std::vector<HistoryEntry>& history);

// ---- curvature tail ----

struct TailReport {
  std::vector<std::pair<double, double>> rows;  // (R, integral of |B|^2+|E1|^2+|E2|^2 over |z| > R)
  double slope = 0;
  double M = 0;  // max over R of R * integral
};
TailReport curvature_tail(const GaugeField& f, const std::vector<double>& R_list = {1, 2, 4});

// ---- Donaldson's function ----

struct TauReport {
  NodeReal tau;
  double tau_min = 0;
  // min over interior nodes with tau > threshold of the discrete Laplacian of tau
  double min_laplacian = 0;
  int nodes_checked = 0;
};
TauReport donaldson_tau(const HalfSpaceGrid& grid, const NodeGroup& g, double threshold = 1e-6);

// ---- moduli signature ----

struct ModuliSignature {
  std::vector<cplx> coefficients;  // of z^-(m+p) .. z^-1
  std::vector<double> fit_error;   // standard error per coefficient
  double t_slice = 0;
  std::vector<double> radii;
  double condition = 0;
};
void to_json(nlohmann::json& j, const ModuliSignature& m);
// Needs the seed parameters on the state's field. The slice is the grid level
// closest to t_slice (default 2 delta). Fit circles have radii 2, 3, 4, 6 hz with
// 16 points each; the fit uses the pole powers plus z^0, z^1, z^2.
ModuliSignature moduli_signature(const FlowState& state, double t_slice = 0);

}  // namespace kwflow
