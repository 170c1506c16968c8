#include <gtest/gtest.h>

#include <cmath>

#include "kwflow/model_solutions.hpp"
#include "kwflow/seed_builder.hpp"

using namespace kwflow;

namespace {

SeedParams generic() { return SeedParams{1, 1, {cplx(2.0, 1.0)}, 0.05}; }
SeedParams spread() { return SeedParams{0, 1, {1.0}, 0.05}; }

double field_diff(const SeedFields& a, const SeedFields& b) {
  return std::max({norm(a.A1 - b.A1), norm(a.A2 - b.A2), norm(a.At - b.At), norm(a.a3 - b.a3),
                   norm(a.phi - b.phi)});
}
double field_scale(const SeedFields& a) {
  return 1.0 + std::max({norm(a.A1), norm(a.A2), norm(a.At), norm(a.a3), norm(a.phi)});
}

}  // namespace

TEST(Cutoff, PlateausAreExactAndMonotone) {
  for (double x : {-3.0, 0.0, 0.25}) EXPECT_EQ(cutoff_chi(x), 1.0);
  for (double x : {0.75, 1.0, 9.0}) EXPECT_EQ(cutoff_chi(x), 0.0);
  EXPECT_NEAR(cutoff_chi(0.5), 0.5, 1e-15);
  double prev = 1.0;
  for (double x = 0.26; x < 0.75; x += 0.01) {
    if (x > 0.3 && x < 0.7)
      EXPECT_LT(cutoff_chi(x), prev);
    else
      EXPECT_LE(cutoff_chi(x), prev);
    prev = cutoff_chi(x);
    const double h = 1e-6;
    EXPECT_NEAR(cutoff_chi_deriv(x), (cutoff_chi(x + h) - cutoff_chi(x - h)) / (2 * h), 1e-6);
  }
}

TEST(Laurent, MatchesSymbolicExpansion) {
  // golden values from tests/oracles/laurent_golden.py
  LaurentData a = laurent_mu({0.7, 1.0});
  ASSERT_EQ(a.mu.size(), 1u);
  EXPECT_NEAR(std::abs(a.mu[0] - cplx(-0.7)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(a.inv_series[4] - cplx(0.2401)), 0.0, 1e-14);
  EXPECT_NEAR(a.radius, 1 / 0.7, 1e-6);

  const cplx a1(0.5, 1.0 / 3), a2(-2.0, 1.0);
  LaurentData b = laurent_mu({a1, a2});
  EXPECT_NEAR(std::abs(b.mu[0] - cplx(0.13333333333333333, 0.23333333333333334)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(b.mu[0] + a1 / a2), 0.0, 1e-15);  // p = 2: mu_1 = -a_1/a_2

  LaurentData c = laurent_mu({1.0, -1.5, cplx(2.0, 1.0)});
  ASSERT_EQ(c.mu.size(), 2u);
  EXPECT_NEAR(std::abs(c.mu[0] - cplx(-0.13, -0.16)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.mu[1] - cplx(0.6, -0.3)), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(c.inv_series[5] - cplx(0.13086, 0.02277)), 0.0, 1e-14);

  EXPECT_TRUE(laurent_mu({1.0}).mu.empty());
  EXPECT_THROW(laurent_mu({1.0, 0.0}), std::invalid_argument);
}

TEST(Laurent, PolePartPlusRemainderIsInverse) {
  SeedBuilder sb(SeedParams{2, 3, {1.0, -1.5, cplx(2.0, 1.0)}, 0.05});
  const cplx z(0.03, -0.02);
  // 1/wp - 4 hhat is bounded by |z|^-m times a constant
  const cplx rem = 1.0 / wp_poly(sb.params(), z) - 4.0 * sb.hhat(z);
  EXPECT_LT(std::abs(rem) * std::norm(z), 2.0 * sb.laurent().remainder_bound);
}

TEST(SigmaFrame, ExamplesAndLinePlus) {
  Frame f0 = sigma_frame(0.0);
  EXPECT_LT(norm(f0.sigma - SIGMA3), 1e-15);
  EXPECT_LT(norm(f0.ihat - E_PLUS), 1e-15);
  Frame f1 = sigma_frame(1.0);
  EXPECT_LT(norm(f1.sigma - SIGMA1), 1e-15);
  Frame finf = sigma_frame(cplx(3e7, 4e7));
  EXPECT_LT(norm(finf.sigma + SIGMA3), 3.0 / 5e7);
  for (cplx g : {cplx(0.3, -0.2), cplx(1.0, 0.0), cplx(-2.0, 5.0), cplx(1e-8, 0.0)}) {
    Frame f = sigma_frame(g);
    EXPECT_TRUE(f.sigma.is_real(1e-15));
    EXPECT_NEAR(norm(f.sigma), 1.0, 1e-14);
    EXPECT_NEAR(norm(f.ihat), std::sqrt(2.0), 1e-14);
    EigenParts e = eig_project(f.sigma, f.ihat);
    EXPECT_LT(norm(e.minus) + std::abs(e.diag), 1e-14);
  }
  // both branches agree at |g| = 1
  const cplx g = std::polar(1.0, 0.7);
  Frame a = sigma_frame(g), b = sigma_frame(g * (1 + 1e-15));
  EXPECT_LT(norm(a.sigma - b.sigma) + norm(a.ihat - b.ihat), 1e-13);
}

TEST(Seed, ParamValidation) {
  EXPECT_THROW(SeedBuilder(SeedParams{0, 1, {0.0}, 0.05}), std::invalid_argument);
  EXPECT_THROW(SeedBuilder(SeedParams{0, 2, {1.0}, 0.05}), std::invalid_argument);
  EXPECT_THROW(SeedBuilder(SeedParams{-1, 1, {1.0}, 0.05}), std::invalid_argument);
  EXPECT_THROW(SeedBuilder(SeedParams{0, 1, {1.0}, 0.5}), std::invalid_argument);
  EXPECT_THROW(SeedBuilder(SeedParams{0, 1, {1.0}, 0.0}), std::invalid_argument);
  EXPECT_NO_THROW(SeedBuilder(generic()));
}

TEST(Seed, CutoffVariants) {
  SeedBuilder g(generic()), s(spread());
  EXPECT_FALSE(g.spread_cutoff());
  EXPECT_TRUE(s.spread_cutoff());
  EXPECT_TRUE(needs_spread_cutoff(SeedParams{0, 2, {0.7, 1.0}, 0.05}));
  EXPECT_FALSE(needs_spread_cutoff(SeedParams{0, 2, {0.0, 1.0}, 0.05}));
  EXPECT_EQ(g.omega_dagger(0.02, 3.0), 1.0);
  EXPECT_EQ(g.omega_dagger(0.06, 3.0), 0.0);
  EXPECT_EQ(s.omega_dagger(0.06, 0.0), 0.0);
  // spread: support moves out like (1 + |z|^2)^(1/4)
  EXPECT_EQ(s.omega_dagger(0.04, 3.0), 1.0);
  EXPECT_EQ(s.omega_dagger(0.2, 3.0), 0.0);
}

TEST(Seed, WMatchesModelsOutsideTheBand) {
  SeedBuilder sb(generic());
  const SeedParams& p = sb.params();
  for (cplx z : {cplx(0.3, 0.1), cplx(-2.0, 1.0)}) {
    EXPECT_NEAR(sb.w(0.2, z), model_w_alpha(p.m, 0.2, z).w, 1e-12);
    EXPECT_NEAR(sb.w(3.0, z), model_w_alpha(p.m, 3.0, z).w, 1e-12);
  }
  EXPECT_NEAR(sb.w(0.01, cplx(0.05, 0.02)), model_w_alpha(p.k(), 0.01, cplx(0.05, 0.02)).w, 1e-12);
}

TEST(Seed, PhiNormAndSmallTForm) {
  for (SeedParams p : {generic(), spread()}) {
    SeedBuilder sb(p);
    for (double t : {0.01, 0.03, 0.04, 0.3}) {
      for (cplx z : {cplx(0.004, 0.001), cplx(0.02, -0.03), cplx(1.0, 0.5)}) {
        SeedFields f = sb.point(t, z);
        EXPECT_NEAR(norm(f.phi) / std::exp(2 * f.w), 1.0, 1e-12);
        if (t < 0.5 * p.delta) {
          const GammaPair g = sb.gamma(t, z);
          const AlgElement ref = -zeta(p.k(), t, z) * (1.0 + std::norm(g.gamma_star)) * f.ihat;
          EXPECT_LT(norm(f.phi - ref), 1e-12 * norm(ref));
        }
      }
    }
  }
}

TEST(Seed, PhiVanishesToOrderMOnTheAxis) {
  for (SeedParams p : {generic(), spread(), SeedParams{2, 1, {1.0}, 0.05}}) {
    SeedBuilder sb(p);
    for (double t : {0.02, 0.045, 0.5}) {
      // at small t the order-m behaviour sets in below |z| ~ t^((k+1)/p)
      const double r0 = 1e-2 * std::min(1.0, std::pow(t, (p.k() + 1.0) / p.p));
      std::vector<double> ratio;
      for (double r : {r0, 1e-1 * r0, 1e-2 * r0, 1e-3 * r0})
        ratio.push_back(norm(sb.phi(t, cplx(r, 0.5 * r))) / std::pow(std::hypot(r, 0.5 * r), p.m));
      EXPECT_GT(ratio.back(), 0.0);
      EXPECT_LT(std::abs(ratio[3] - ratio[2]), 1e-3 * ratio[3]) << "m=" << p.m << " t=" << t;
      EXPECT_LT(std::abs(ratio[3] - ratio[2]), std::abs(ratio[1] - ratio[0]) + 1e-12 * ratio[3]);
    }
  }
}

TEST(Seed, RegionShortcutsMatchGeneralRoute) {
  for (SeedParams p : {generic(), spread(), SeedParams{1, 2, {0.0, 1.0}, 0.05},
                       SeedParams{0, 2, {0.7, 1.0}, 0.05}}) {
    SeedBuilder fast(p), slow(p);
    slow.set_shortcuts(false);
    struct Pt {
      double t;
      cplx z;
      SeedRegion r;
    };
    for (Pt q : {Pt{0.02, {0.1, 0.05}, SeedRegion::ModelK}, Pt{0.01, {-0.03, 0.01}, SeedRegion::ModelK},
                 Pt{0.02, {0.01, 0.01}, SeedRegion::InnerK}, Pt{0.03, {0.02, -0.01}, SeedRegion::InnerK},
                 Pt{0.5, {1.0, 0.4}, SeedRegion::OuterM}, Pt{3.0, {-6.0, 1.0}, SeedRegion::OuterM}}) {
      if (q.r == SeedRegion::OuterM && fast.spread_cutoff()) q.t = 0.05 * std::pow(1 + std::norm(q.z), 0.25) + q.t;
      ASSERT_EQ(fast.region(q.t, q.z), q.r);
      SeedFields a = fast.point(q.t, q.z), b = slow.point(q.t, q.z);
      EXPECT_LT(field_diff(a, b), 1e-6 * field_scale(a)) << "m=" << p.m << " p=" << p.p << " t=" << q.t;
      EXPECT_LT(norm(a.beta - b.beta) + norm(a.bhat - b.bhat), 1e-6 * field_scale(a));
      EXPECT_NEAR(a.alpha, b.alpha, 1e-6 * field_scale(a));
    }
  }
}

TEST(Seed, InnerAlphaFormula) {
  SeedBuilder sb(generic()), slow(generic());
  slow.set_shortcuts(false);
  const double t = 0.02;
  const cplx z(0.012, -0.007);
  const cplx g = sb.gamma(t, z).gamma;
  const double ak = model_fields(sb.params().k(), t, z).alpha;
  const double expect = ak * (1 - std::norm(g)) / (1 + std::norm(g));
  EXPECT_NEAR(slow.point(t, z).alpha, expect, 1e-6 * std::abs(ak));
  // a3 itself is the model k value
  EXPECT_LT(norm(slow.point(t, z).a3 - model_fields(sb.params().k(), t, z).a3), 1e-6 * std::abs(ak));
}

TEST(Seed, DirectAndConjugationRoutesAgree) {
  for (SeedParams p : {generic(), spread()}) {
    SeedBuilder sb(p);
    for (double t : {0.035, 0.04, 0.2, 1.5})
      for (cplx z : {cplx(0.3, 0.2), cplx(0.02, 0.05), cplx(-1.0, 2.0)}) {
        SeedFields a = sb.point(t, z, SeedRoute::Direct), b = sb.point(t, z, SeedRoute::Conjugation);
        EXPECT_LT(field_diff(a, b), 1e-6 * field_scale(a)) << "t=" << t << " z=" << z;
      }
  }
}

TEST(Seed, BetaAndBhatLieInLinePlus) {
  for (SeedParams p : {generic(), spread()}) {
    SeedBuilder sb(p);
    for (double t : {0.02, 0.035, 0.04, 0.3})
      for (cplx z : {cplx(0.01, 0.004), cplx(0.05, -0.02), cplx(0.5, 0.5)}) {
        SeedFields f = sb.point(t, z);
        EigenParts b = eig_project(f.sigma, f.beta), c = eig_project(f.sigma, f.bhat);
        const double s = 1e-6 * (1 + norm(f.beta) + norm(f.bhat));
        EXPECT_LT(norm(b.minus) + std::abs(b.diag), s);
        EXPECT_LT(norm(c.minus) + std::abs(c.diag), s);
      }
  }
}

TEST(Seed, BetaVanishesBeyondTheCutoffGenericCase) {
  SeedBuilder sb(generic());
  for (cplx z : {cplx(0.01, 0.0), cplx(0.3, 0.2), cplx(3.0, 1.0)}) {
    auto [b, bh] = beta_bhat(sb.params(), 0.07, z);
    EXPECT_EQ(norm(b), 0.0);
    EXPECT_EQ(norm(bh), 0.0);
  }
}

TEST(Seed, RemainderBoundedNearAxisWhereLiteralFormBlowsUp) {
  for (SeedParams p : {generic(), spread()}) {
    SeedBuilder sb(p);
    const double t = 0.04;  // 0 < omega < 1
    ASSERT_GT(sb.omega(t), 0.0);
    ASSERT_LT(sb.omega(t), 1.0);
    double qmax = 0, lit_small = 0, lit_large = 0;
    for (double r : {1e-4, 1e-5, 1e-6, 1e-7, 1e-8}) {
      const cplx z(r, -0.3 * r);
      qmax = std::max(qmax, norm(sb.q_remainder(t, z)));
      const double lit = norm(sb.q_remainder_literal(t, z));
      if (r == 1e-4) lit_large = lit;
      lit_small = lit;
    }
    EXPECT_LT(norm(sb.q_remainder(t, cplx(1e-8, 0))), 1.1 * qmax);
    EXPECT_GT(lit_small / lit_large, 1e3);  // grows like |z|^-p
    // where omega = 1 both forms coincide
    const cplx z(0.01, 0.003);
    EXPECT_LT(norm(sb.q_remainder(0.02, z) - sb.q_remainder_literal(0.02, z)),
              1e-12 * norm(sb.q_remainder(0.02, z)));
    // small-t section is (1/4) conj(gamma*) ihat
    const Frame f = sigma_frame(sb.gamma(0.02, z).gamma_star);
    // (the pole part cancels: compare against the size of each piece)
    EXPECT_LT(norm(sb.q_full(0.02, z) - 0.25 * std::conj(sb.gamma(0.02, z).gamma_star) * f.ihat),
              1e-10 * norm(sb.hhat(z) * sb.phi(0.02, z)));
  }
}

TEST(Seed, AxisPointIsFinite) {
  SeedBuilder sb(spread());
  for (double t : {0.02, 0.04, 1.0}) {
    SeedFields f = sb.point(t, 0.0);
    SeedFields g = sb.point(t, cplx(1e-5 * t, 0.0));
    EXPECT_TRUE(std::isfinite(norm(f.A1) + norm(f.a3) + norm(f.phi)));
    // axis values are averages over a 1e-4 t circle
    EXPECT_LT(norm(f.phi - g.phi), 1e-2 * (1 + norm(g.phi)));
  }
}

TEST(Seed, ContinuumXVanishesInZeroRegions) {
  for (SeedParams p : {generic(), spread()}) {
    SeedBuilder sb(p);
    // |z| >= 4t, t <= delta/2
    for (cplx z : {cplx(0.1, 0.05), cplx(-2.0, 3.0)})
      EXPECT_LT(norm(sb.X_point(0.02, z)), 1e-6);
  }
  SeedBuilder sb(generic());
  for (double t : {0.06, 0.2, 1.0, 4.5})
    for (double s : {0.02, 0.5, 1.3, 1.5, 1.65, 2.5}) {
      const cplx z = std::polar(s * t, 0.9);
      // nested differences leave a roundoff floor relative to the 1/t^2 field scale
      EXPECT_LT(norm(sb.X_point(t, z)), 2e-5 * (1 + 1 / (t * t))) << "t=" << t << " |z|/t=" << s;
    }
}

TEST(Seed, AssembledResidualsConvergeAtSecondOrder) {
  // Small-t patch where the cutoff layers are resolved (|gamma| << 1, widths ~ t);
  // compare on the nodes shared by the two grids.
  double r[2][3] = {};
  const int n0 = 17;
  for (int level = 0; level < 2; ++level) {
    const int n = level == 0 ? n0 : 2 * n0 - 1;
    HalfSpaceGrid g(GridSpec{0.01, 0.025, n, 0.05, n});
    ResidualFields rf = kw_residual_fields(assemble_seed(generic(), g));
    const int s = level + 1;
    for (int i = 1; i < n0 - 1; ++i)
      for (int j = 1; j < n0 - 1; ++j)
        for (int k = 1; k < n0 - 1; ++k) {
          const std::size_t q = g.index(s * i, s * j, s * k);
          r[level][0] = std::max(r[level][0], rf.R1_abs[q]);
          r[level][1] = std::max(r[level][1], rf.R2_abs[q]);
          r[level][2] = std::max(r[level][2], rf.R3_abs[q]);
        }
  }
  for (int c = 0; c < 3; ++c) EXPECT_NEAR(r[0][c] / r[1][c], 4.0, 1.0) << "residual " << c + 1;
}

TEST(Seed, XBoundsReport) {
  HalfSpaceGrid g(GridSpec{0.005, 2.0, 17, 3.0, 24});
  GaugeField f = assemble_seed(generic(), g);
  SeedXReport rep = seed_X_bounds(generic(), f, {1, 2});
  EXPECT_GT(rep.small_t_far.nodes, 0u);
  EXPECT_GT(rep.large_t.nodes, 0u);
  EXPECT_LT(rep.small_t_far.max_diff_reference, 1e-8);
  EXPECT_LT(rep.small_t_far.max_X_continuum, 1e-6);
  EXPECT_LT(rep.large_t.max_X_continuum, 1e-5);
  EXPECT_TRUE(std::isfinite(rep.weighted_integral));
  EXPECT_EQ(rep.tail.size(), 2u);
}

TEST(LogLogSlope, RecoversPowerLaw) {
  EXPECT_NEAR(loglog_slope({{1, 3.0}, {2, 1.5}, {4, 0.75}}), -1.0, 1e-12);
  EXPECT_TRUE(std::isnan(loglog_slope({{1, 1.0}, {2, 0.0}})));
}
