#pragma once
// Initial data interpolating the model solution k = m + 2p near t = 0 with the
// model solution m at large t, deformed by the polynomial
//   wp(z) = a_1 z^(k-1) + ... + a_p z^(k-p).
// The fields solve the first three equations; the fourth (X) is non-zero only
// in the transition layers.

#include <string>
#include <vector>

#include "kwflow/field_state.hpp"
#include "kwflow/seed_params.hpp"

namespace kwflow {

// Smooth step: 1 on (-inf, 1/4], 0 on [3/4, inf).
double cutoff_chi(double x);
double cutoff_chi_deriv(double x);

struct LaurentData {
  // mu[j-1] = mu_j, j = 1..p-1: 1/wp = (1/a_p)(z^-(m+p) + mu_{p-1} z^-(m+p-1) + ... + mu_1 z^-(m+1)) + R
  std::vector<cplx> mu;
  // c_n of 1/(1 + (a_{p-1}/a_p) z + ... + (a_1/a_p) z^(p-1)) = sum c_n z^n
  std::vector<cplx> inv_series;
  double radius = 0;           // distance from 0 to the nearest zero of that polynomial
  double remainder_bound = 0;  // sup of |z^m R| on |z| <= radius/2
};
LaurentData laurent_mu(const std::vector<cplx>& a, int m = 0, int terms = 64);

cplx wp_poly(const SeedParams& p, cplx z);

struct GammaPair {
  cplx gamma;
  cplx gamma_star;
};
GammaPair gamma_star(const SeedParams& p, double t, cplx z);

struct Frame {
  AlgElement sigma, ihat;
};
Frame sigma_frame(cplx gamma_star);

double omega_delta(double delta, double t);
// True when the z-dependent cutoff is needed: m = 0 and the z^-1 coefficient of
// the pole part of 1/wp is non-zero (p = 1, or mu_1 != 0).
bool needs_spread_cutoff(const SeedParams& p);

enum class SeedRegion { ModelK, InnerK, OuterM, General };
enum class SeedRoute { Direct, Conjugation };

struct SeedFields {
  AlgElement sigma, ihat, phi, a3, A1, A2, At, beta, bhat;
  AlgElement q;      // full q (pole part included), sigma - 4q = lambda
  double w = 0, alpha = 0;
  SeedRegion region = SeedRegion::General;
};

class SeedBuilder {
 public:
  explicit SeedBuilder(SeedParams params);

  const SeedParams& params() const { return p_; }
  const LaurentData& laurent() const { return lau_; }
  bool spread_cutoff() const { return spread_; }
  // Off: every point goes through the general frame route (for cross-checks).
  void set_shortcuts(bool on) { shortcuts_ = on; }

  GammaPair gamma(double t, cplx z) const;
  double w(double t, cplx z) const;
  double omega(double t) const { return omega_delta(p_.delta, t); }
  double omega_dagger(double t, cplx z) const;
  cplx hhat(cplx z) const;  // (1/4) x pole part of 1/wp
  // Ratio |phi| / |phi of the small-t formula|; identically 1 where omega = 1.
  double norm_ratio(double t, cplx z) const;
  AlgElement phi(double t, cplx z) const;
  AlgElement ehat(double t, cplx z) const;  // sqrt2-length direction of phi
  AlgElement q_full(double t, cplx z) const;
  // The bounded remainder (1/4) lambda gamma*-bar ihat + hhat phi, and its cut-off version.
  AlgElement q_remainder(double t, cplx z) const;
  AlgElement q_regular(double t, cplx z) const { return omega_dagger(t, z) * q_remainder(t, z); }
  // Literal remainder without the norm ratio (diagnostic only; unbounded near z = 0
  // where 0 < omega < 1).
  AlgElement q_remainder_literal(double t, cplx z) const;
  GroupElement frame_G0(double t, cplx z) const;  // exp(i w sigma) U

  SeedRegion region(double t, cplx z) const;
  SeedFields point(double t, cplx z, SeedRoute route = SeedRoute::Direct) const;
  // Continuum X at a point from high-order differences of point().
  AlgElement X_point(double t, cplx z) const;

 private:
  SeedFields point_nonzero(double t, cplx z, SeedRoute route) const;
  void fill_frame_data(double t, cplx z, SeedFields& f) const;

  SeedParams p_;
  LaurentData lau_;
  bool spread_;
  bool shortcuts_ = true;
};

// Thin wrappers with a fresh builder.
double seed_w(const SeedParams& p, double t, cplx z);
double omega_dagger(const SeedParams& p, double t, cplx z);
AlgElement q_section(const SeedParams& p, double t, cplx z);
std::pair<AlgElement, AlgElement> beta_bhat(const SeedParams& p, double t, cplx z);

GaugeField assemble_seed(const SeedParams& p, const HalfSpaceGrid& g);

struct RegionCheck {
  std::size_t nodes = 0;
  double max_X_discrete = 0;       // |X_h| over the region
  double max_diff_reference = 0;   // |X_h(seed) - X_h(reference model)|
  double max_X_continuum = 0;      // high-order pointwise X on a node sample
};
struct SeedXReport {
  RegionCheck small_t_far;   // |z| >= 4t, t <= delta/2, whole stencil in the model k region
  RegionCheck large_t;       // t >= delta (generic) or beyond the spread cutoff: reference model m
  double weighted_integral = 0;  // integral of (1 + t^2)|X|^2
  std::vector<std::pair<double, double>> tail;  // (R, integral of |X|^2 over |z| > R)
  double tail_slope = 0;
  double max_X = 0;
};
SeedXReport seed_X_bounds(const SeedParams& p, const GaugeField& field,
                          const std::vector<double>& R_list = {1, 2, 4});

// Least-squares slope of log y vs log x.
double loglog_slope(const std::vector<std::pair<double, double>>& xy);

}  // namespace kwflow
