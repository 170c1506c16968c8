#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "kwflow/model_solutions.hpp"

using namespace kwflow;

namespace {

double c3(const AlgElement& x) { return x[2].real(); }

}  // namespace

TEST(Theta, DefiningRelation) {
  EXPECT_NEAR(theta(1.0, cplx(0.0, 1.0)), 0.881373587019543, 1e-14);
  EXPECT_LT(theta(1e-9, 1.0), 1e-8);
  EXPECT_THROW(theta(1.0, 0.0), std::domain_error);
}

TEST(HyperbolicRatios, SmallThetaLimits) {
  for (int m = 0; m < 5; ++m) {
    HyperbolicRatios h = hyperbolic_ratios(m, 1e-6, 1.0);
    EXPECT_NEAR(h.rho, 1.0, 1e-9);
    EXPECT_NEAR(h.rho_kappa, 1.0, 1e-9);
  }
}

TEST(HyperbolicRatios, AgreeWithDirectSinhCosh) {
  for (int m = 0; m < 5; ++m) {
    for (double th : {0.1, 0.7, 2.0, 5.0}) {
      double t = 1.3, r = t / std::sinh(th);
      HyperbolicRatios h = hyperbolic_ratios(m, t, r);
      double rho = (m + 1) * std::sinh(th) / std::sinh((m + 1) * th);
      double kap = std::cosh((m + 1) * th) / std::cosh(th);
      EXPECT_NEAR(h.rho, rho, 1e-12 * (1 + rho));
      EXPECT_NEAR(h.rho_kappa, rho * kap, 1e-12 * (1 + rho * kap));
    }
  }
}

TEST(HyperbolicRatios, CurvatureStableAtLargeU) {
  for (int m = 0; m < 5; ++m) {
    const double n = m + 1.0;
    // the two branches meet at u = 2
    const double below = hyperbolic_ratios(m, 1.0, 2.0 - 1e-12).curv;
    const double above = hyperbolic_ratios(m, 1.0, 2.0 + 1e-12).curv;
    EXPECT_NEAR(below, above, 1e-12 * (1 + std::abs(below)));
    // rho (kappa - rho) ~ 2(n^2 - 1)/(3 u^2) as u -> infinity
    const double u = 1e4;
    EXPECT_NEAR(hyperbolic_ratios(m, 1.0, u).curv * u * u, 2 * (n * n - 1) / 3, 1e-6 * (1 + n * n));
  }
}

TEST(ModelFields, NahmPole) {
  for (double t : {0.1, 1.0, 4.0}) {
    ModelPoint p = model_fields(0, t, cplx(0.3, -0.8));
    EXPECT_NEAR(c3(p.a3), -1.0 / (2 * t), 1e-14);
    EXPECT_NEAR(std::abs(p.phi[0] + 1.0 / (2 * t)), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(p.phi[1] - cplx(0.0, 1.0 / (2 * t))), 0.0, 1e-14);
    EXPECT_EQ(norm(p.A1) + norm(p.A2), 0.0);
    EXPECT_EQ(norm(p.BA3) + norm(p.EA1) + norm(p.EA2), 0.0);
  }
}

// 40-digit evaluation of the sinh/cosh closed forms (tests/oracles/model_golden.py)
TEST(ModelFields, GoldenValues) {
  struct G {
    int m;
    double t, z1, z2, alpha, phr, phi_i, A1, A2, B, E1, E2;
  };
  const G gold[] = {
      {2, 1.0, 1.0, 0.0, -1.0714285714285714, -0.21428571428571429, 0.0, 0.0,
       0.42857142857142857, 0.48979591836734694, 0.0, -0.48979591836734694},
      {1, 0.7, 0.3, 0.4, -1.1872586872586873, -0.2491020830224699, -0.33213611069662657,
       -0.2702702702702703, 0.20270270270270271, 0.8948137326515705, 0.51132213294375463,
       -0.38349159970781594},
      {3, 2.0, -0.5, 1.5, -0.7847985347985348, -0.030351306628528481, 0.021012443050519718,
       -0.25824175824175824, -0.086080586080586081, 0.23979927276630573, 0.1798494545747293,
       0.059949818191576433},
  };
  for (const G& g : gold) {
    ModelPoint p = model_fields(g.m, g.t, cplx(g.z1, g.z2));
    const double tol = 1e-13;
    EXPECT_NEAR(c3(p.a3), g.alpha, tol);
    EXPECT_NEAR(p.alpha, g.alpha, tol);
    // phi = coefficient * (sigma_1 - i sigma_2)
    EXPECT_NEAR(std::abs(p.phi[0] - cplx(g.phr, g.phi_i)), 0.0, tol);
    EXPECT_NEAR(std::abs(p.phi[1] - cplx(0, -1) * cplx(g.phr, g.phi_i)), 0.0, tol);
    EXPECT_NEAR(c3(p.A1), g.A1, tol);
    EXPECT_NEAR(c3(p.A2), g.A2, tol);
    EXPECT_NEAR(c3(p.BA3), g.B, tol);
    EXPECT_NEAR(c3(p.EA1), g.E1, tol);
    EXPECT_NEAR(c3(p.EA2), g.E2, tol);
  }
}

TEST(ModelFields, PointwiseInvariants) {
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> lt(-3, 2), ang(0, 2 * std::numbers::pi), lr(-3, 2);
  for (int m = 0; m < 5; ++m) {
    for (int i = 0; i < 200; ++i) {
      double t = std::pow(10.0, lt(rng));
      cplx z = std::polar(std::pow(10.0, lr(rng)), ang(rng));
      ModelPoint p = model_fields(m, t, z);
      EXPECT_LT(c3(p.a3), -1.0 / (2 * t) * (1 - 1e-12));
      EXPECT_GE(c3(p.a3), -(m + 1.0) / (2 * t) * (1 + 1e-12));
      EXPECT_NEAR(std::abs(inner(SIGMA3, p.phi)), 0.0, 1e-14 / t);
      EXPECT_NEAR(std::abs(inner(p.phi, p.phi)), 0.0, 1e-12 / (t * t));
      AlgElement br = bracket(cplx(0.0, 0.5) * SIGMA3, p.phi) - p.phi;
      EXPECT_LT(norm(br), 1e-13 / t);
      EXPECT_LE(norm(p.phi), 1.0 / (std::sqrt(2.0) * t) * (1 + 1e-13));
      EXPECT_GE(c3(p.BA3), 0.0);
    }
  }
}

TEST(ModelFields, ZeroLimitAtAxis) {
  for (int m = 1; m < 4; ++m) {
    ModelPoint p = model_fields(m, 0.5, 0.0);
    EXPECT_EQ(norm(p.phi), 0.0);
    EXPECT_NEAR(c3(p.a3), -(m + 1.0) / (2 * 0.5), 1e-12);
  }
  ModelPoint p0 = model_fields(0, 0.5, 0.0);
  EXPECT_NEAR(norm(p0.phi), 1.0 / (std::sqrt(2.0) * 0.5), 1e-14);
}

TEST(ModelFields, ElectricFieldMatchesAlphaGradient) {
  // E_1 = d alpha / d z_2 sigma_3, E_2 = - d alpha / d z_1 sigma_3, B = (d_t alpha - |phi|^2) sigma_3
  const double h = 1e-5;
  for (int m = 1; m < 4; ++m) {
    double t = 0.8;
    cplx z(0.4, -0.9);
    ModelPoint p = model_fields(m, t, z);
    auto al = [&](double tt, cplx zz) { return model_fields(m, tt, zz).alpha; };
    double d2 = (al(t, z + cplx(0, h)) - al(t, z - cplx(0, h))) / (2 * h);
    double d1 = (al(t, z + h) - al(t, z - h)) / (2 * h);
    double dt = (al(t + h, z) - al(t - h, z)) / (2 * h);
    EXPECT_NEAR(c3(p.EA1), d2, 1e-8);
    EXPECT_NEAR(c3(p.EA2), -d1, 1e-8);
    EXPECT_NEAR(c3(p.BA3), dt - norm2(p.phi), 1e-8);
  }
}

TEST(ModelWAlpha, NahmPoleValues) {
  WAlpha wa = model_w_alpha(0, 0.7, cplx(1.0, 2.0));
  EXPECT_NEAR(wa.w, -0.5 * std::log(std::sqrt(2.0) * 0.7), 1e-14);
  EXPECT_NEAR(wa.alpha, -1.0 / (2 * 0.7), 1e-14);
}

TEST(ModelWAlpha, AlphaIsTimeDerivativeOfW) {
  for (int m = 0; m < 4; ++m) {
    cplx z(1.0, 0.0);
    double t = 1.0;
    WAlpha wa = model_w_alpha(m, t, z);
    EXPECT_NEAR(wa.alpha, model_fields(m, t, z).alpha, 1e-14);
    double errs[2];
    int k = 0;
    for (double h : {1e-3, 5e-4}) {
      double fd = (model_w_alpha(m, t + h, z).w - model_w_alpha(m, t - h, z).w) / (2 * h);
      errs[k++] = std::abs(fd - wa.alpha);
    }
    EXPECT_LT(errs[0], 1e-5);
    if (errs[0] > 1e-10) EXPECT_NEAR(errs[0] / errs[1], 4.0, 0.2);
  }
}

TEST(Zeta, BoundsAndReduction) {
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> lt(-2, 1), lr(-3, 2), ang(0, 6.28);
  for (int k = 0; k < 5; ++k) {
    for (int i = 0; i < 200; ++i) {
      double t = std::pow(10.0, lt(rng));
      cplx z = std::polar(std::pow(10.0, lr(rng)), ang(rng));
      cplx zt = zeta(k, t, z);
      EXPECT_LE(std::abs(zt), 1.0 / (std::sqrt(2.0) * t));
      ModelPoint p = model_fields(k, t, z);
      EXPECT_LT(norm(p.phi + zt * E_PLUS), 1e-13 / t);
    }
  }
  EXPECT_NEAR(std::abs(zeta(0, 0.25, cplx(3.0, 1.0)) - 2.0), 0.0, 1e-14);
}

TEST(Zeta, SmallZExpansion) {
  // zeta = (1 + tau)(k+1)/2^(k+1) z^k/t^(k+1) with |tau| <= c |z|^2/t^2
  for (int k = 1; k < 4; ++k) {
    double t = 0.5, prev_ratio = 0;
    for (double r : {1e-2, 5e-3, 2.5e-3}) {
      cplx z = std::polar(r, 0.3);
      cplx lead = (k + 1.0) / std::pow(2.0, k + 1) * std::pow(z, k) / std::pow(t, k + 1);
      double tau = std::abs(zeta(k, t, z) / lead - 1.0);
      double ratio = tau / (r * r / (t * t));
      if (prev_ratio > 0) EXPECT_NEAR(ratio, prev_ratio, 0.05 * prev_ratio);
      prev_ratio = ratio;
    }
  }
}

TEST(ModelFlux, ZeroForNahmPole) { EXPECT_EQ(model_flux(0, 1.0), 0.0); }

TEST(ModelFlux, HalfTheStatedQuantum) {
  // With <x y> = -1/2 tr(xy) the slice integral of <sigma_3 B> equals pi m.
  for (int m = 1; m <= 3; ++m)
    for (double t : {0.5, 1.0, 2.0})
      EXPECT_NEAR(model_flux(m, t), std::numbers::pi * m, 1e-8);
}

TEST(ModelResidual, SecondOrderConvergence) {
  for (int m = 0; m < 4; ++m) {
    ModelResidual a = model_equation_residual(m, 0.9, cplx(0.5, 0.6), 1e-2);
    ModelResidual b = model_equation_residual(m, 0.9, cplx(0.5, 0.6), 5e-3);
    const double floor = 1e-11;
    for (auto [ra, rb] : {std::pair{a.R1, b.R1}, {a.R2, b.R2}, {a.R3, b.R3}, {a.X, b.X}}) {
      if (ra > floor) EXPECT_NEAR(ra / rb, 4.0, 0.5);
    }
  }
}

TEST(ModelResidual, NahmPoleExactThirdEquation) {
  ModelResidual r = model_equation_residual(0, 1.0, cplx(0.2, 0.1), 1e-2);
  EXPECT_LT(r.R2, 1e-14);
}

TEST(ModelResidual, DerivedTolerance) {
  ModelResidual r = model_equation_residual(2, 0.7, cplx(0.3, 0.4), 1e-3);
  EXPECT_LT(r.max(), 1e-5);
}
