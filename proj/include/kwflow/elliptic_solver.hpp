#pragma once
// Linearized operator of the flow, its conjugate-gradient solve, and the
// half-space Green's function / Hardy inequality checks used to validate it.
//
// Op v = -sum_d D^c_d D^0_d v + sum_a [a_a, [v, a_a]]
// where D^0 is the centred covariant difference with v extended by zero past
// the faces and D^c the covariant difference used by the residuals. Op is the
// exact linearization (up to sign) of the discrete X under the flow update, and
// is symmetric for the inner product with weights t_i * dtau * hz^2.

#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "kwflow/field_state.hpp"

namespace kwflow {

// ---- Green's function of the Dirichlet Laplacian on the half-space ----

struct HalfSpacePoint {
  double t = 1;
  cplx z{};
};

// Throws std::invalid_argument at the pole.
double green(const HalfSpacePoint& q, const HalfSpacePoint& p);
// |grad_p G_q(p)|
double green_grad_norm(const HalfSpacePoint& q, const HalfSpacePoint& p);

struct GreenBoundsReport {
  int samples = 0;
  // Smallest c that makes each bound hold on the sample.
  double c_near_lower = 0;  // G >= 1/(c |p-q|) for |p-q| <= t_q / 4
  double c_upper = 0;       // G <= c / |p-q|
  double c_far = 0;         // G <= c t_p t_q / |p-q|^3 for far pairs
  double c_grad = 0;        // |grad G| <= c / |p-q|^2
  bool positive = true;     // G > 0 at every sample
  // (t_q, integral of G^2/(1+t^2), envelope min(t_q, (1+|ln t_q|)/t_q))
  struct IntegralRow {
    double t_q, integral, envelope;
  };
  std::vector<IntegralRow> integrals;
  double c_integral = 0;  // max integral / envelope
  double c0 = 24;
  bool pass() const;
};
GreenBoundsReport green_bounds_check(int samples, unsigned seed = 7,
                                     const std::vector<double>& t_q_list = {0.1, 1.0, 10.0});
// integral over the half-space of G_q^2 / (1 + t^2)
double green_weighted_l2(double t_q);

// ---- Hardy inequalities ----

enum class HardyVariant {
  HalfSpace,  // int f^2/t^2 <= 4 int |grad f|^2 on the half-space
  Ball,       // int_B f^2/|x-q|^2 <= c0 int_B (|grad f|^2 + f^2/rho^2)
  Line        // int f^2/t^4 <= (4/9) int |f'|^2/t^2 on (0, inf)
};
HardyVariant parse_hardy_variant(const std::string& name);
std::string to_string(HardyVariant v);

// A smooth test function: a sum of separable Gaussian bumps times the variant's
// factor (t e^(-decay t) for the half-space, t^2 e^(-decay t) for the line, 1 for
// the ball). wt <= 0 drops the t-Gaussian. For the ball, (t0, x0, y0) is the
// bump centre relative to the ball centre and wt is unused.
struct HardyTestFunction {
  struct Bump {
    double amp, t0, wt, x0, y0, wz;
  };
  std::vector<Bump> bumps;
  double decay = 1.0;  // extra exp(-decay * t) factor for the half-space / line variants
};
HardyTestFunction random_hardy_function(HardyVariant v, std::mt19937_64& rng);

struct HardySides {
  double lhs = 0, rhs = 0;
  bool holds() const { return lhs <= rhs; }
};
inline constexpr double kHardyBallC0 = 24.0;
HardySides hardy_check(const HardyTestFunction& f, HardyVariant v);
// The documented example functions: t exp(-t - |z|^2) and t^2 exp(-(t-1)^2).
HardyTestFunction hardy_example(HardyVariant v);

struct HardySuiteReport {
  HardyVariant variant;
  int trials = 0, passed = 0;
  double max_ratio = 0;  // max lhs/rhs
};
HardySuiteReport hardy_suite(HardyVariant v, int trials = 100, unsigned seed = 11);

// ---- The operator and its solve ----

struct EllipticProblem {
  const GaugeField* field = nullptr;
  NodeAlg rhs;  // only interior values are used

  EllipticProblem() = default;
  EllipticProblem(const GaugeField& f, NodeAlg r) : field(&f), rhs(std::move(r)) {}
};

// Precomputed real coefficients; apply() touches only interior nodes and
// returns zero on the faces.
class EllipticOperator {
 public:
  explicit EllipticOperator(const GaugeField& f);

  const HalfSpaceGrid& grid() const { return g_; }
  using Vec = std::vector<double>;  // 3 reals per node
  void apply(const Vec& v, Vec& out) const;
  // 3x3 block of Op at each interior node, inverted (identity on faces).
  const std::vector<double>& block_inverse() const { return binv_; }
  double dot(const Vec& a, const Vec& b) const;  // solver-weighted, interior only

  Vec pack(const NodeAlg& v) const;  // real parts, faces zeroed
  NodeAlg unpack(const Vec& v) const;

 private:
  HalfSpaceGrid g_;
  std::vector<double> A_[3];  // At, A1, A2 (3 reals per node)
  std::vector<double> a_[3];  // a1, a2, a3
  std::vector<double> binv_;
  std::vector<double> w_;  // solver weight per t level
  mutable Vec tmp_[3];
};

NodeAlg apply_operator(const EllipticProblem& problem, const NodeAlg& v);

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 0;  // 0: 20 * (interior nodes)^(1/3)
};

struct SolverStats {
  int iterations = 0;
  double relative_residual = 0;
  double b_norm = 0;  // weighted norm of the right-hand side
  std::vector<double> residual_history;
  std::vector<double> energy_history;
};
void to_json(nlohmann::json& j, const SolverStats& s);

class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverStats stats)
      : std::runtime_error(what), stats_(std::move(stats)) {}
  const SolverStats& stats() const { return stats_; }

 private:
  SolverStats stats_;
};

struct SolveResult {
  NodeAlg u;
  SolverStats stats;
};
// Block-Jacobi preconditioned CG on Op u = rhs, i.e. minimizing
// E(u) = 1/2 <u, Op u> - <rhs, u>. Throws SolverError past max_iter.
SolveResult solve_u(const EllipticProblem& problem, const SolverConfig& cfg = {},
                    const NodeAlg* initial = nullptr);
SolveResult solve_u(const EllipticOperator& op, const NodeAlg& rhs, const SolverConfig& cfg,
                    const NodeAlg* initial = nullptr);

// Green-weighted energy plus squared Green-weighted L1 norm of Op u, maximized
// over the sample points (which must avoid grid nodes).
double b_norm(const NodeAlg& u, const EllipticProblem& problem,
              const std::vector<HalfSpacePoint>& sample_q);
// Corners, centre and axis points of the box, offset from the nodes.
std::vector<HalfSpacePoint> default_b_norm_samples(const HalfSpaceGrid& g);

// Weighted (solver) inner product of node fields over the interior.
double solver_dot(const HalfSpaceGrid& g, const NodeAlg& a, const NodeAlg& b);

}  // namespace kwflow
