#pragma once
// Closed-form integer-indexed model solutions on (0,inf) x R^2.
//
// Hyperbolic ratios are written through u = |z|/t and C = sqrt(1 + u^2)
// (so sinh(Theta) = 1/u, cosh(Theta) = C/u) with the polynomials
//   P_n = u^n U_n(C/u),  Q_n = u^n T_n(C/u)
// which stay finite at z = 0 and at large Theta.

#include "kwflow/lie_algebra.hpp"

namespace kwflow {

struct ModelPoint {
  int m = 0;
  double t = 1.0;
  cplx z{};
  AlgElement a3, phi, A1, A2, BA3, EA1, EA2;
  double alpha = 0.0;  // a3 = alpha sigma_3
};

struct HyperbolicRatios {
  double u = 0, C = 1;
  double P = 1;    // P_m
  double Pm1 = 0;  // P_{m-1}
  double Q = 1;    // Q_{m+1}
  double rho = 1;          // (m+1) sinh(Theta) / sinh((m+1) Theta)
  double rho_kappa = 1;    // rho * cosh((m+1)Theta) / cosh(Theta)
  double curv = 0;         // rho*kappa - rho^2  (>= 0)
};

HyperbolicRatios hyperbolic_ratios(int m, double t, double r);

double theta(double t, cplx z);  // asinh(t/|z|); throws for z = 0
ModelPoint model_fields(int m, double t, cplx z);

struct WAlpha {
  double w;
  double alpha;
};
WAlpha model_w_alpha(int m, double t, cplx z);
// |phi^(m)| = rho/(sqrt2 t); log computed without forming rho at small |z|.
double model_log_abs_phi(int m, double t, cplx z);

cplx zeta(int k, double t, cplx z);

double model_flux(int m, double t);

struct ModelResidual {
  double R1 = 0, R2 = 0, R3 = 0, X = 0;
  double max() const;
};
// The four equations evaluated with centred differences of step h applied to
// the closed forms.
ModelResidual model_equation_residual(int m, double t, cplx z, double h);

}  // namespace kwflow
