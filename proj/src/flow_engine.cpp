#include "kwflow/flow_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <stdexcept>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "kwflow/seed_builder.hpp"

namespace kwflow {

FlowState FlowState::start(const GaugeField& seed) {
  FlowState st;
  st.field = seed;
  st.g.assign(seed.grid.size(), GroupElement::identity());
  st.u_last.assign(seed.grid.size(), AlgElement());
  st.X0_norm = kw_residuals(seed).X.l2;
  return st;
}

namespace {

// D^0_d u on every node
NodeAlg dirichlet_cov(const GaugeField& f, const NodeAlg& u, Dir d) {
  NodeAlg out = partial_dirichlet(f.grid, u, d);
  const NodeAlg& A = f.A(d);
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += bracket(A[n], u[n]);
  return out;
}

bool finite_alg(const AlgElement& x) {
  for (int a = 0; a < 3; ++a)
    if (!std::isfinite(x[a].real()) || !std::isfinite(x[a].imag())) return false;
  return true;
}

double tau_of(const GroupElement& g) {
  const GroupElement gg = g * g.dagger();
  return gg.trace().real() - 2.0;
}

}  // namespace

GaugeField flow_update(const GaugeField& f, const NodeAlg& u, double ds) {
  const NodeAlg Gt = dirichlet_cov(f, u, Dir::T);
  const NodeAlg G1 = dirichlet_cov(f, u, Dir::Z1);
  const NodeAlg G2 = dirichlet_cov(f, u, Dir::Z2);
  GaugeField out = f;
  for (std::size_t n = 0; n < u.size(); ++n) {
    const AlgElement phi = f.phi(n);
    out.set_phi(n, phi + ds * (I_UNIT * bracket(u[n], phi)));
    out.a3[n] = f.a3[n] + ds * Gt[n];
    out.At[n] = f.At[n] - ds * bracket(f.a3[n], u[n]);
    out.A1[n] = f.A1[n] + ds * G2[n];
    out.A2[n] = f.A2[n] - ds * G1[n];
  }
  return out;
}

namespace {

// Fill the history entry of the current state and return the solved u.
NodeAlg diagnose(const FlowState& st, const SolverConfig& solver, HistoryEntry& h) {
  const GaugeField& f = st.field;
  const HalfSpaceGrid& g = f.grid;
  ResidualFields rf = kw_residual_fields(f);
  h.s = st.s;
  h.X_l2 = interior_norms(g, rf.X_abs).l2;
  h.R1 = interior_norms(g, rf.R1_abs).l2;
  h.R2 = interior_norms(g, rf.R2_abs).l2;
  h.R3 = interior_norms(g, rf.R3_abs).l2;
  EllipticOperator op(f);
  SolveResult res = solve_u(op, rf.X, solver, &st.u_last);
  h.iterations = res.stats.iterations;
  h.sup_u = 0;
  h.kappa = 0;
  const NodeAlg Gt = dirichlet_cov(f, res.u, Dir::T), G1 = dirichlet_cov(f, res.u, Dir::Z1),
                G2 = dirichlet_cov(f, res.u, Dir::Z2);
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.interior(n)) continue;
    h.sup_u = std::max(h.sup_u, norm(res.u[n]));
    const double du = std::sqrt(norm2(Gt[n]) + norm2(G1[n]) + norm2(G2[n]));
    h.kappa = std::max(h.kappa, g.t(g.coord(n, Dir::T)) * du);
  }
  h.tau_min = 0;
  bool first = true;
  for (const auto& x : st.g) {
    const double t = tau_of(x);
    h.tau_min = first ? t : std::min(h.tau_min, t);
    first = false;
  }
  return std::move(res.u);
}

FlowState advance(const FlowState& state, const NodeAlg& u, double ds, const HistoryEntry& h) {
  FlowState next;
  next.s = state.s + ds;
  next.X0_norm = state.X0_norm;
  next.history = state.history;
  next.history.push_back(h);
  next.field = flow_update(state.field, u, ds);
  next.g.resize(state.g.size());
  for (std::size_t n = 0; n < u.size(); ++n) {
    next.g[n] = exp_iu(u[n], ds) * state.g[n];
    if (!finite_alg(next.field.a3[n]) || !finite_alg(next.field.A1[n]) ||
        !finite_alg(next.field.A2[n]) || !finite_alg(next.field.At[n]) ||
        !finite_alg(next.field.a1[n]) || !finite_alg(next.field.a2[n])) {
      int i, j, k;
      state.field.grid.coords(n, i, j, k);
      throw std::runtime_error("flow_step: non-finite field after the update at node (" +
                               std::to_string(i) + "," + std::to_string(j) + "," +
                               std::to_string(k) + "), s = " + std::to_string(next.s) +
                               ", |u| = " + std::to_string(norm(u[n])));
    }
  }
  next.u_last = u;
  return next;
}

}  // namespace

FlowState flow_step(const FlowState& state, double ds, const SolverConfig& solver) {
  if (!(ds > 0)) throw std::invalid_argument("flow_step: ds must be positive");
  HistoryEntry h;
  NodeAlg u = diagnose(state, solver, h);
  return advance(state, u, ds, h);
}

ExpFit fit_exponential(const std::vector<double>& s, const std::vector<double>& y) {
  ExpFit fit;
  std::vector<double> xs, ls;
  for (std::size_t i = 0; i < s.size() && i < y.size(); ++i)
    if (y[i] > 0) {
      xs.push_back(s[i]);
      ls.push_back(std::log(y[i]));
    }
  const std::size_t n = xs.size();
  if (n < 2) return fit;
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ls[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ls[i] - my);
    syy += (ls[i] - my) * (ls[i] - my);
  }
  const double slope = sxx > 0 ? sxy / sxx : 0.0;
  fit.rate = -slope;
  fit.amplitude = std::exp(my - slope * mx);
  fit.r2 = syy > 0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

DecayReport decay_diagnostics(const std::vector<HistoryEntry>& history) {
  if (history.size() < 5) throw std::invalid_argument("decay_diagnostics: need at least 5 entries");
  DecayReport r;
  std::vector<double> s, X, U;
  for (const auto& h : history) {
    s.push_back(h.s);
    X.push_back(h.X_l2);
    U.push_back(h.sup_u);
  }
  r.X_fit = fit_exponential(s, X);
  r.sup_u_fit = fit_exponential(s, U);
  r.X_slope = -r.X_fit.rate;
  for (std::size_t i = 1; i < U.size(); ++i)
    if (U[i] > U[i - 1] * (1 + 1e-9)) r.sup_u_decreasing = false;
  r.kappa_min = r.kappa_max = history.front().kappa * std::exp(history.front().s);
  for (const auto& h : history) {
    const double k = h.kappa * std::exp(h.s);
    r.kappa_min = std::min(r.kappa_min, k);
    r.kappa_max = std::max(r.kappa_max, k);
  }
  return r;
}

void to_json(nlohmann::json& j, const HistoryEntry& h) {
  j = nlohmann::json{{"s", h.s},   {"X_l2", h.X_l2},         {"R1", h.R1},
                     {"R2", h.R2}, {"R3", h.R3},             {"sup_u", h.sup_u},
                     {"kappa", h.kappa}, {"iterations", h.iterations}, {"tau_min", h.tau_min}};
}

void to_json(nlohmann::json& j, const FlowReport& r) {
  j = nlohmann::json{
      {"decay_exponent", r.decay_exponent},
      {"X_fit", {{"amplitude", r.decay.X_fit.amplitude}, {"rate", r.decay.X_fit.rate}, {"r2", r.decay.X_fit.r2}}},
      {"sup_u_fit",
       {{"amplitude", r.decay.sup_u_fit.amplitude}, {"rate", r.decay.sup_u_fit.rate}, {"r2", r.decay.sup_u_fit.r2}}},
      {"sup_u_decreasing", r.decay.sup_u_decreasing},
      {"kappa_envelope", {r.decay.kappa_min, r.decay.kappa_max}},
      {"flow_failure", r.flow_failure},
      {"residual_growth", r.residual_growth},
      {"face_deviation", {{"t_min", r.face_deviation_tmin}, {"t_max", r.face_deviation_tmax}}},
      {"det_error", r.det_error},
      {"tau_min", r.tau_min},
      {"steps", r.steps}};
}

FlowRun run_flow(const GaugeField& seed, const FlowConfig& cfg) {
  if (!(cfg.ds > 0) || !(cfg.s_max > 0)) throw std::invalid_argument("run_flow: ds and s_max must be positive");
  FlowState st = FlowState::start(seed);
  const int steps = static_cast<int>(std::lround(cfg.s_max / cfg.ds));
  for (int k = 0; k < steps; ++k) {
    st = flow_step(st, cfg.ds, cfg.solver);
    if (cfg.on_step) cfg.on_step(st);
    if (cfg.verbose) {
      const auto& h = st.history.back();
      std::fprintf(stderr, "s=%.3f X=%.4e R=(%.3e %.3e %.3e) sup_u=%.3e it=%d\n", h.s, h.X_l2, h.R1,
                   h.R2, h.R3, h.sup_u, h.iterations);
    }
  }
  // diagnostics of the final state (its u is not applied)
  HistoryEntry last;
  st.u_last = diagnose(st, cfg.solver, last);
  st.history.push_back(last);

  FlowRun run;
  FlowReport& r = run.report;
  r.steps = steps;
  r.decay = decay_diagnostics(st.history);
  r.decay_exponent = -r.decay.X_slope;
  r.flow_failure = r.decay_exponent < 0.5;
  const auto& h0 = st.history.front();
  auto ratio = [](double a, double b) { return b > 0 ? a / b : (a > 0 ? INFINITY : 1.0); };
  r.residual_growth = std::max({ratio(last.R1, h0.R1), ratio(last.R2, h0.R2), ratio(last.R3, h0.R3)});
  const HalfSpaceGrid& g = st.field.grid;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const int i = g.coord(n, Dir::T);
    const double dev = frobenius_distance(st.g[n], GroupElement::identity());
    if (i == 1) r.face_deviation_tmin = std::max(r.face_deviation_tmin, dev);
    if (i == g.n_t() - 2) r.face_deviation_tmax = std::max(r.face_deviation_tmax, dev);
    r.det_error = std::max(r.det_error, std::abs(st.g[n].det() - 1.0));
  }
  r.tau_min = h0.tau_min;
  for (const auto& h : st.history) r.tau_min = std::min(r.tau_min, h.tau_min);
  run.final = std::move(st);
  return run;
}

void write_trajectory(const std::string& path, const std::vector<HistoryEntry>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_trajectory: cannot open " + path);
  out << "s,X_l2,R1,R2,R3,sup_u\n";
  out << std::setprecision(10);
  for (const auto& h : history)
    out << h.s << ',' << h.X_l2 << ',' << h.R1 << ',' << h.R2 << ',' << h.R3 << ',' << h.sup_u << '\n';
}

// ---------------------------------------------------------------- curvature tail

TailReport curvature_tail(const GaugeField& f, const std::vector<double>& R_list) {
  const HalfSpaceGrid& g = f.grid;
  for (double R : R_list)
    if (!(R > 0) || R >= g.spec().L)
      throw std::invalid_argument("curvature_tail: R must lie inside the z truncation");
  Curvature c = curvature(f);
  NodeReal dens(g.size());
  for (std::size_t n = 0; n < g.size(); ++n)
    dens[n] = norm2(c.BA3[n]) + norm2(c.EA1[n]) + norm2(c.EA2[n]);
  TailReport rep;
  for (double R : R_list) {
    const double I = weighted_integral(g, dens, {WeightKind::OutsideRadius, R}, true);
    rep.rows.emplace_back(R, I);
    rep.M = std::max(rep.M, R * I);
  }
  rep.slope = loglog_slope(rep.rows);
  return rep;
}

// ---------------------------------------------------------------- tau

TauReport donaldson_tau(const HalfSpaceGrid& grid, const NodeGroup& g, double threshold) {
  if (g.size() != grid.size()) throw std::invalid_argument("donaldson_tau: size mismatch");
  TauReport r;
  r.tau.resize(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (std::abs(g[n].det() - 1.0) > 1e-8)
      throw std::invalid_argument("donaldson_tau: det g != 1 at node " + std::to_string(n));
    r.tau[n] = tau_of(g[n]);
  }
  r.tau_min = *std::min_element(r.tau.begin(), r.tau.end());
  const double h = grid.hz();
  bool first = true;
  for (int i = 1; i < grid.n_t() - 1; ++i) {
    const double hp = grid.t(i + 1) - grid.t(i), hm = grid.t(i) - grid.t(i - 1);
    for (int j = 1; j < grid.n_z() - 1; ++j)
      for (int k = 1; k < grid.n_z() - 1; ++k) {
        const std::size_t n = grid.index(i, j, k);
        if (r.tau[n] <= threshold) continue;
        const double f0 = r.tau[n];
        const double dtt = 2.0 * ((r.tau[grid.index(i + 1, j, k)] - f0) / hp -
                                  (f0 - r.tau[grid.index(i - 1, j, k)]) / hm) /
                           (hp + hm);
        const double dzz = (r.tau[grid.index(i, j + 1, k)] + r.tau[grid.index(i, j - 1, k)] +
                            r.tau[grid.index(i, j, k + 1)] + r.tau[grid.index(i, j, k - 1)] - 4 * f0) /
                           (h * h);
        const double lap = dtt + dzz;
        r.min_laplacian = first ? lap : std::min(r.min_laplacian, lap);
        first = false;
        ++r.nodes_checked;
      }
  }
  return r;
}

// ---------------------------------------------------------------- moduli

void to_json(nlohmann::json& j, const ModuliSignature& m) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& c : m.coefficients) coeffs.push_back({c.real(), c.imag()});
  j = nlohmann::json{{"coefficients", coeffs},
                     {"fit_error", m.fit_error},
                     {"t_slice", m.t_slice},
                     {"radii", m.radii},
                     {"condition", m.condition}};
}

namespace {

GroupElement interpolate_g(const HalfSpaceGrid& grid, const NodeGroup& g, int i, cplx z) {
  const double h = grid.hz(), L = grid.spec().L;
  const double fx = (z.real() + L) / h, fy = (z.imag() + L) / h;
  const int j = std::clamp(static_cast<int>(std::floor(fx)), 0, grid.n_z() - 2);
  const int k = std::clamp(static_cast<int>(std::floor(fy)), 0, grid.n_z() - 2);
  const double ax = fx - j, ay = fy - k;
  GroupElement out = cplx((1 - ax) * (1 - ay)) * g[grid.index(i, j, k)] +
                     cplx(ax * (1 - ay)) * g[grid.index(i, j + 1, k)] +
                     cplx((1 - ax) * ay) * g[grid.index(i, j, k + 1)] +
                     cplx(ax * ay) * g[grid.index(i, j + 1, k + 1)];
  out.renormalize();
  return out;
}

}  // namespace

ModuliSignature moduli_signature(const FlowState& state, double t_slice) {
  const GaugeField& f = state.field;
  if (!f.seed) throw std::invalid_argument("moduli_signature: the field carries no seed parameters");
  const SeedParams& p = *f.seed;
  const HalfSpaceGrid& grid = f.grid;
  // at t = 2 delta the cut-off remainder is switched off on the fit circles and
  // lambda carries the pole part exactly
  if (t_slice <= 0) t_slice = 2.0 * p.delta;
  int best = 0;
  for (int i = 0; i < grid.n_t(); ++i)
    if (std::abs(std::log(grid.t(i) / t_slice)) < std::abs(std::log(grid.t(best) / t_slice))) best = i;
  SeedBuilder sb(p);
  ModuliSignature sig;
  sig.t_slice = grid.t(best);
  const double h = grid.hz();
  sig.radii = {2 * h, 3 * h, 4 * h, 6 * h};
  if (sig.radii.back() >= grid.spec().L - h)
    throw std::invalid_argument("moduli_signature: fit circles leave the grid");
  const int n_pole = p.m + p.p, n_reg = 3, K = n_pole + n_reg;
  const int n_ang = 16;
  const int N = static_cast<int>(sig.radii.size()) * n_ang;
  Eigen::MatrixXcd V(N, K);
  Eigen::VectorXcd y(N);
  const bool have_g = state.g.size() == grid.size();
  int row = 0;
  for (double r : sig.radii)
    for (int a = 0; a < n_ang; ++a) {
      const double th = 2 * std::numbers::pi * (a + 0.5) / n_ang;
      const cplx z = std::polar(r, th);
      const SeedFields sf = sb.point(sig.t_slice, z);
      AlgElement lam = sf.sigma - 4.0 * sf.q, phi = sf.phi;
      if (have_g) {
        const GroupElement gz = interpolate_g(grid, state.g, best, z);
        lam = adjoint(gz, lam);
        phi = adjoint(gz, phi);
      }
      cplx num = 0;
      for (int c = 0; c < 3; ++c) num += std::conj(phi[c]) * lam[c];
      y(row) = 0.25 * num / norm2(phi);
      for (int c = 0; c < n_pole; ++c) V(row, c) = std::pow(z, -(p.m + p.p) + c);
      for (int c = 0; c < n_reg; ++c) V(row, n_pole + c) = std::pow(z, c);
      ++row;
    }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  sig.condition = sv(0) / sv(sv.size() - 1);
  if (!(sig.condition < 1e12))
    throw std::runtime_error("moduli_signature: ill-conditioned fit (condition " +
                             std::to_string(sig.condition) + ")");
  Eigen::VectorXcd x = svd.solve(y);
  const double rss = (V * x - y).squaredNorm();
  const double sigma2 = rss / std::max(1, N - K);
  Eigen::MatrixXcd cov = (V.adjoint() * V).inverse();
  for (int c = 0; c < n_pole; ++c) {
    sig.coefficients.push_back(x(c));
    sig.fit_error.push_back(std::sqrt(sigma2 * std::abs(cov(c, c))));
  }
  return sig;
}

}  // namespace kwflow
