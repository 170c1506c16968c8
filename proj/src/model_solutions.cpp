#include "kwflow/model_solutions.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kwflow/quadrature.hpp"

namespace kwflow {

HyperbolicRatios hyperbolic_ratios(int m, double t, double r) {
  if (m < 0) throw std::invalid_argument("model index must be non-negative");
  if (!(t > 0)) throw std::invalid_argument("t must be positive");
  HyperbolicRatios h;
  h.u = r / t;
  const double u2 = h.u * h.u;
  h.C = std::sqrt(1.0 + u2);
  double p_prev = 0.0, p = 1.0;  // P_{-1}, P_0
  for (int n = 0; n < m; ++n) {
    double nxt = 2.0 * h.C * p - u2 * p_prev;
    p_prev = p;
    p = nxt;
  }
  h.P = p;
  h.Pm1 = p_prev;
  double q_prev = 1.0, q = h.C;  // Q_0, Q_1
  for (int n = 1; n < m + 1; ++n) {
    double nxt = 2.0 * h.C * q - u2 * q_prev;
    q_prev = q;
    q = nxt;
  }
  h.Q = q;
  const double n1 = m + 1.0;
  h.rho = n1 * std::pow(h.u, m) / h.P;
  h.rho_kappa = n1 * h.Q / (h.P * h.C);
  if (h.u > 2.0) {
    // rho (kappa - rho) = rho [sinh(2n Th) - n sinh(2 Th)] / (2 cosh Th sinh(n Th)); the bracket
    // cancels to O(Th^3), so sum its odd series sum_k (n^k - n) x^k / k! with x = 2 Th.
    const double th = std::asinh(1.0 / h.u), x = 2.0 * th;
    double sum = 0.0, xk = x, nk = n1, fact = 1.0;
    for (int k = 1; k < 200; k += 2) {
      if (k > 1) {
        xk *= x * x;
        nk *= n1 * n1;
        fact *= static_cast<double>(k - 1) * k;
      }
      const double term = (nk - n1) * xk / fact;
      sum += term;
      if (k > 3 && std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    h.curv = h.rho * sum / (2.0 * std::cosh(th) * std::sinh(n1 * th));
  } else {
    h.curv = h.rho_kappa - h.rho * h.rho;
    if (h.curv < 0) h.curv = 0.0;
  }
  return h;
}

double theta(double t, cplx z) {
  double r = std::abs(z);
  if (r == 0.0) throw std::domain_error("theta: undefined at z = 0");
  return std::asinh(t / r);
}

ModelPoint model_fields(int m, double t, cplx z) {
  const double r = std::abs(z);
  HyperbolicRatios h = hyperbolic_ratios(m, t, r);
  ModelPoint p;
  p.m = m;
  p.t = t;
  p.z = z;
  p.alpha = -h.rho_kappa / (2.0 * t);
  p.a3 = p.alpha * SIGMA3;
  p.phi = (-(m + 1.0) / (2.0 * t * h.P)) * std::pow(z / t, m) * E_PLUS;
  const double f = (m + 1.0) * h.Pm1 / (2.0 * t * t * h.P * h.C);
  p.A1 = (-f * z.imag()) * SIGMA3;
  p.A2 = (f * z.real()) * SIGMA3;
  const double C2 = h.C * h.C;
  p.BA3 = (h.curv / (2.0 * t * t * C2)) * SIGMA3;
  const double e = h.curv / (2.0 * t * t * t * C2);
  p.EA1 = (e * z.imag()) * SIGMA3;
  p.EA2 = (-e * z.real()) * SIGMA3;
  return p;
}

double model_log_abs_phi(int m, double t, cplx z) {
  HyperbolicRatios h = hyperbolic_ratios(m, t, std::abs(z));
  double v = std::log((m + 1.0) / (std::sqrt(2.0) * t * h.P));
  if (m > 0) v += m * std::log(std::abs(z) / t);
  return v;
}

WAlpha model_w_alpha(int m, double t, cplx z) {
  HyperbolicRatios h = hyperbolic_ratios(m, t, std::abs(z));
  return {0.5 * model_log_abs_phi(m, t, z), -h.rho_kappa / (2.0 * t)};
}

cplx zeta(int k, double t, cplx z) {
  HyperbolicRatios h = hyperbolic_ratios(k, t, std::abs(z));
  return ((k + 1.0) / (2.0 * t * h.P)) * std::pow(z / t, k);
}

double model_flux(int m, double t) {
  if (!(t > 0)) throw std::invalid_argument("model_flux: t must be positive");
  if (m == 0) return 0.0;
  // integral over the slice of <sigma_3 B> in the variable Theta; B is radial and
  // r dr = t^2 cosh/sinh^3 dTheta turns it into pi * int (rho kappa - rho^2)/(sinh cosh).
  auto integrand = [m](double th) {
    if (th <= 0) return 0.0;
    double s = std::sinh(th), c = std::cosh(th);
    HyperbolicRatios h = hyperbolic_ratios(m, 1.0, 1.0 / s);
    return h.curv / (s * c);
  };
  const double theta_max = 30.0;
  double prev = integrate_panels(integrand, 0.0, theta_max, 4);
  for (int panels = 8; panels <= 1024; panels *= 2) {
    double cur = integrate_panels(integrand, 0.0, theta_max, panels);
    if (std::abs(cur - prev) < 1e-10) return std::numbers::pi * cur;
    prev = cur;
  }
  std::ostringstream os;
  os << "model_flux: quadrature did not converge (last estimate " << std::numbers::pi * prev
     << ")";
  throw std::runtime_error(os.str());
}

double ModelResidual::max() const {
  double v = R1;
  if (R2 > v) v = R2;
  if (R3 > v) v = R3;
  if (X > v) v = X;
  return v;
}

namespace {

struct Fields {
  AlgElement A1, A2, a3, phi;
};

Fields closed_form(int m, double t, double z1, double z2) {
  ModelPoint p = model_fields(m, t, cplx(z1, z2));
  return {p.A1, p.A2, p.a3, p.phi};
}

}  // namespace

ModelResidual model_equation_residual(int m, double t, cplx z, double h) {
  if (!(t > h)) throw std::invalid_argument("model_equation_residual: need t > h");
  const double z1 = z.real(), z2 = z.imag();
  Fields c = closed_form(m, t, z1, z2);
  Fields tp = closed_form(m, t + h, z1, z2), tm = closed_form(m, t - h, z1, z2);
  Fields xp = closed_form(m, t, z1 + h, z2), xm = closed_form(m, t, z1 - h, z2);
  Fields yp = closed_form(m, t, z1, z2 + h), ym = closed_form(m, t, z1, z2 - h);
  const double s = 1.0 / (2.0 * h);
  // A_t = 0 for the model family
  AlgElement E1 = s * (tp.A1 - tm.A1);
  AlgElement E2 = s * (tp.A2 - tm.A2);
  AlgElement d1a3 = s * (xp.a3 - xm.a3) + bracket(c.A1, c.a3);
  AlgElement d2a3 = s * (yp.a3 - ym.a3) + bracket(c.A2, c.a3);
  AlgElement B3 = s * (xp.A2 - xm.A2) - s * (yp.A1 - ym.A1) + bracket(c.A1, c.A2);
  AlgElement d1phi = s * (xp.phi - xm.phi) + bracket(c.A1, c.phi);
  AlgElement d2phi = s * (yp.phi - ym.phi) + bracket(c.A2, c.phi);
  AlgElement dtphi = s * (tp.phi - tm.phi);
  AlgElement dta3 = s * (tp.a3 - tm.a3);

  ModelResidual r;
  r.R1 = std::sqrt(norm2(E1 - d2a3) + norm2(E2 + d1a3));
  r.R2 = norm(d1phi + I_UNIT * d2phi);
  r.R3 = norm(dtphi - I_UNIT * bracket(c.a3, c.phi));
  r.X = norm(dta3 - B3 - cplx(0.0, 0.5) * bracket(c.phi, star(c.phi)));
  return r;
}

}  // namespace kwflow
