#include "kwflow/seed_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "kwflow/model_solutions.hpp"

namespace kwflow {

void SeedParams::validate(double delta_max) const {
  if (m < 0) throw std::invalid_argument("seed: m must be >= 0");
  if (p < 1) throw std::invalid_argument("seed: p must be >= 1");
  if (static_cast<int>(a.size()) != p) {
    std::ostringstream os;
    os << "seed: expected " << p << " coefficients a_1..a_p, got " << a.size();
    throw std::invalid_argument(os.str());
  }
  for (const cplx& v : a)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::invalid_argument("seed: coefficients must be finite");
  if (a.back() == cplx(0.0)) throw std::invalid_argument("seed: leading coefficient a_p must be nonzero");
  if (!(delta > 0) || !(delta <= delta_max)) {
    std::ostringstream os;
    os << "seed: delta must lie in (0, " << delta_max << "], got " << delta;
    throw std::invalid_argument(os.str());
  }
}

namespace {

double mollifier(double y) { return y > 0 ? std::exp(-1.0 / y) : 0.0; }
double mollifier_deriv(double y) { return y > 0 ? std::exp(-1.0 / y) / (y * y) : 0.0; }

constexpr double kAxisFraction = 1e-3;  // |z| < this * t uses the resolved axis formulas
constexpr double kFdFraction = 2e-4;    // pointwise difference step relative to the local scale
constexpr double kXFraction = 1e-3;    // outer step for the pointwise X (fields vary fast in the cutoff bands)

// 6th-order central first derivative from values at x +- h, +- 2h, +- 3h
template <class V>
V d6(const V& m3, const V& m2, const V& m1, const V& p1, const V& p2, const V& p3, double h) {
  return (1.0 / (60.0 * h)) * ((p3 - m3) + (-9.0) * (p2 - m2) + 45.0 * (p1 - m1));
}

GroupElement d6g(const GroupElement& m3, const GroupElement& m2, const GroupElement& m1,
                 const GroupElement& p1, const GroupElement& p2, const GroupElement& p3, double h) {
  return cplx(1.0 / (60.0 * h)) * ((p3 - m3) + cplx(-9.0) * (p2 - m2) + cplx(45.0) * (p1 - m1));
}

struct Steps {
  double ht, hz;
};
Steps fd_steps(double t, cplx z, double frac) {
  return {frac * t, frac * std::min(t, std::abs(z))};
}

template <class F>
auto deriv_t(F&& f, double t, cplx z, double h) {
  return d6(f(t - 3 * h, z), f(t - 2 * h, z), f(t - h, z), f(t + h, z), f(t + 2 * h, z),
            f(t + 3 * h, z), h);
}
template <class F>
auto deriv_z(F&& f, double t, cplx z, cplx dir, double h) {
  return d6(f(t, z - 3.0 * h * dir), f(t, z - 2.0 * h * dir), f(t, z - h * dir),
            f(t, z + h * dir), f(t, z + 2.0 * h * dir), f(t, z + 3.0 * h * dir), h);
}

// -dG G^-1 in one direction, neighbours sign-aligned with the centre value
template <class F>
AlgElement frame_conn(F&& G, double t, cplx z, int dir, double h, const GroupElement& g0) {
  auto at = [&](int j) {
    if (dir == 0) return align_sign(G(t + j * h, z), g0);
    cplx d = dir == 1 ? cplx(1.0) : I_UNIT;
    return align_sign(G(t, z + (j * h) * d), g0);
  };
  GroupElement dg = d6g(at(-3), at(-2), at(-1), at(1), at(2), at(3), h);
  return -1.0 * from_matrix(dg * g0.inverse());
}

}  // namespace

double cutoff_chi(double x) {
  const double a = mollifier(0.75 - x), b = mollifier(x - 0.25);
  return a / (a + b);
}

double cutoff_chi_deriv(double x) {
  const double a = mollifier(0.75 - x), b = mollifier(x - 0.25);
  const double da = mollifier_deriv(0.75 - x), db = mollifier_deriv(x - 0.25);
  if (a == 0.0 || b == 0.0) return 0.0;
  return -(da * b + a * db) / ((a + b) * (a + b));
}

LaurentData laurent_mu(const std::vector<cplx>& a, int m, int terms) {
  const int p = static_cast<int>(a.size());
  if (p < 1 || a.back() == cplx(0.0))
    throw std::invalid_argument("laurent_mu: leading coefficient a_p must be nonzero");
  // s_j = a_{p-j} / a_p, j = 0..p-1
  std::vector<cplx> s(p);
  for (int j = 0; j < p; ++j) s[j] = a[p - 1 - j] / a.back();
  LaurentData L;
  const int N = std::max(terms, p + 8);
  L.inv_series.assign(N, 0.0);
  L.inv_series[0] = 1.0;
  for (int n = 1; n < N; ++n) {
    cplx acc = 0;
    for (int j = 1; j <= std::min(n, p - 1); ++j) acc -= s[j] * L.inv_series[n - j];
    L.inv_series[n] = acc;
  }
  L.mu.resize(std::max(0, p - 1));
  for (int i = 1; i <= p - 1; ++i) L.mu[i - 1] = L.inv_series[p - i];
  // Radius: smallest root modulus of sum s_j z^j, estimated from the series
  // coefficients (root test on the tail); infinite for p = 1.
  L.radius = std::numeric_limits<double>::infinity();
  if (p > 1) {
    double est = std::numeric_limits<double>::infinity();
    for (int n = N / 2; n < N; ++n) {
      double c = std::abs(L.inv_series[n]);
      if (c > 0) est = std::min(est, std::pow(c, -1.0 / n));
    }
    L.radius = est;
  }
  // sup of |z^m R| = |(1/a_p) sum_{n>=p} c_n z^(n-p)| on |z| <= min(radius/2, 1)
  const double r = std::min(L.radius / 2, 1.0);
  double bound = 0;
  for (int n = p; n < N; ++n) bound += std::abs(L.inv_series[n]) * std::pow(r, n - p);
  L.remainder_bound = bound / std::abs(a.back());
  (void)m;
  return L;
}

cplx wp_poly(const SeedParams& p, cplx z) {
  // z^(k-p) (a_p + a_{p-1} z + ... + a_1 z^(p-1))
  cplx acc = 0;
  for (int j = 0; j < p.p; ++j) acc = acc * z + p.a[j];  // Horner from a_1
  return std::pow(z, p.k() - p.p) * acc;
}

GammaPair gamma_star(const SeedParams& p, double t, cplx z) {
  if (z == cplx(0.0)) throw std::domain_error("gamma_star: pole at z = 0");
  if (!(t > 0)) throw std::domain_error("gamma_star: t must be positive");
  const cplx g = wp_poly(p, z) / zeta(p.k(), t, z);
  return {g, cutoff_chi(std::abs(z) / t - 1.0) * g};
}

Frame sigma_frame(cplx g) {
  const double a2 = std::norm(g);
  Frame f;
  if (a2 <= 1.0) {
    const double d = 1.0 + a2;
    f.sigma = (std::conj(g) * E_PLUS + (1.0 - a2) * SIGMA3 + g * E_MINUS) / d;
    f.ihat = (E_PLUS - 2.0 * g * SIGMA3 - g * g * E_MINUS) / d;
  } else {
    // divide through by |g|^2 to keep the large-|g| limit finite
    const double inv = 1.0 / a2, d = 1.0 + inv;
    const cplx u = g * inv;  // 1 / conj(g)
    f.sigma = (std::conj(u) * E_PLUS + (inv - 1.0) * SIGMA3 + u * E_MINUS) / d;
    const cplx ph = g / std::sqrt(a2);
    f.ihat = (inv * E_PLUS - 2.0 * u * SIGMA3 - ph * ph * E_MINUS) / d;
  }
  return f;
}

double omega_delta(double delta, double t) { return cutoff_chi(2.0 * t / delta - 1.0); }

bool needs_spread_cutoff(const SeedParams& p) {
  if (p.m != 0) return false;
  if (p.p == 1) return true;
  LaurentData L = laurent_mu(p.a, p.m);
  return std::abs(L.mu[0]) > 1e-14;
}

SeedBuilder::SeedBuilder(SeedParams params) : p_(std::move(params)) {
  p_.validate();
  lau_ = laurent_mu(p_.a, p_.m);
  spread_ = needs_spread_cutoff(p_);
}

GammaPair SeedBuilder::gamma(double t, cplx z) const { return gamma_star(p_, t, z); }

namespace {

double log_rho(int n, double t, double r) {
  HyperbolicRatios h = hyperbolic_ratios(n, t, r);
  if (h.rho > 0) return std::log(h.rho);
  // underflow guard: rho = (n+1) u^n / P_n
  return std::log(n + 1.0) + n * std::log(r / t) - std::log(h.P);
}

}  // namespace

double SeedBuilder::w(double t, cplx z) const {
  if (z == cplx(0.0)) throw std::domain_error("seed w: evaluate through point() at z = 0");
  const double om = omega(t), r = std::abs(z);
  double val = -0.5 * std::log(std::sqrt(2.0) * t);
  if (om > 0) {
    const GammaPair g = gamma(t, z);
    val += 0.5 * om * (std::log1p(std::norm(g.gamma_star)) + log_rho(p_.k(), t, r));
  }
  if (om < 1) val += 0.5 * (1.0 - om) * log_rho(p_.m, t, r);
  return val;
}

double SeedBuilder::omega_dagger(double t, cplx z) const {
  if (!spread_) return omega(t);
  return cutoff_chi(2.0 * t / (p_.delta * std::pow(1.0 + std::norm(z), 0.25)) - 1.0);
}

cplx SeedBuilder::hhat(cplx z) const {
  cplx acc = 0;
  for (int j = p_.p - 1; j >= 0; --j) acc = acc * z + lau_.inv_series[j];
  return acc * std::pow(z, -(p_.m + p_.p)) / (4.0 * p_.a.back());
}

double SeedBuilder::norm_ratio(double t, cplx z) const {
  const double om = omega(t);
  if (om >= 1.0) return 1.0;
  const double r = std::abs(z);
  const GammaPair g = gamma(t, z);
  return std::exp((1.0 - om) *
                  (log_rho(p_.m, t, r) - std::log1p(std::norm(g.gamma_star)) - log_rho(p_.k(), t, r)));
}

AlgElement SeedBuilder::ehat(double t, cplx z) const {
  const Frame f = sigma_frame(gamma(t, z).gamma_star);
  return -std::pow(z / std::abs(z), p_.k()) * f.ihat;
}

AlgElement SeedBuilder::phi(double t, cplx z) const {
  return std::exp(2.0 * w(t, z)) / std::sqrt(2.0) * ehat(t, z);
}

AlgElement SeedBuilder::q_remainder(double t, cplx z) const {
  const GammaPair g = gamma(t, z);
  const Frame f = sigma_frame(g.gamma_star);
  const AlgElement ph = phi(t, z);
  const double lam = norm_ratio(t, z);
  const double r = std::abs(z);
  if (r < kAxisFraction * t && r < lau_.radius / 2) {
    // -(1/4) R phi - (1/4) lambda gamma^-1 ihat, R from its series
    cplx acc = 0;
    for (int n = static_cast<int>(lau_.inv_series.size()) - 1; n >= p_.p; --n)
      acc = acc * z + lau_.inv_series[n];
    const cplx R = acc * std::pow(z, -p_.m) / p_.a.back();
    return -0.25 * R * ph - 0.25 * lam / g.gamma * f.ihat;
  }
  return 0.25 * lam * std::conj(g.gamma_star) * f.ihat + hhat(z) * ph;
}

AlgElement SeedBuilder::q_remainder_literal(double t, cplx z) const {
  const GammaPair g = gamma(t, z);
  const Frame f = sigma_frame(g.gamma_star);
  return 0.25 * std::conj(g.gamma_star) * f.ihat + hhat(z) * phi(t, z);
}

AlgElement SeedBuilder::q_full(double t, cplx z) const {
  const double od = omega_dagger(t, z);
  if (std::abs(z) < kAxisFraction * t) return -hhat(z) * phi(t, z) + od * q_remainder(t, z);
  // grouped so that the pole term cancels exactly where omega-dagger = 1
  const GammaPair g = gamma(t, z);
  const Frame f = sigma_frame(g.gamma_star);
  return (od - 1.0) * hhat(z) * phi(t, z) +
         (0.25 * od * norm_ratio(t, z) * std::conj(g.gamma_star)) * f.ihat;
}

GroupElement SeedBuilder::frame_G0(double t, cplx z) const {
  const Frame f = sigma_frame(gamma(t, z).gamma_star);
  const AlgElement e = -std::pow(z / std::abs(z), p_.k()) * f.ihat;
  return exp_alg(I_UNIT * w(t, z) * f.sigma) * frame_unitary(f.sigma, e);
}

SeedRegion SeedBuilder::region(double t, cplx z) const {
  const double r = std::abs(z);
  if (t <= 0.625 * p_.delta) {
    if (r >= 1.75 * t) return SeedRegion::ModelK;
    if (r <= 1.25 * t) return SeedRegion::InnerK;
  }
  if (omega(t) == 0.0 && omega_dagger(t, z) == 0.0 && r >= 1.75 * t) return SeedRegion::OuterM;
  return SeedRegion::General;
}

void SeedBuilder::fill_frame_data(double t, cplx z, SeedFields& f) const {
  const GammaPair g = gamma(t, z);
  const Frame fr = sigma_frame(g.gamma_star);
  f.sigma = fr.sigma;
  f.ihat = fr.ihat;
  f.w = w(t, z);
  f.phi = std::exp(2.0 * f.w) / std::sqrt(2.0) * (-std::pow(z / std::abs(z), p_.k()) * fr.ihat);
  f.q = q_full(t, z);
}

namespace {

// b-hat = (1/8)([sigma, D1 sigma] + i [sigma, D2 sigma]) for the full connection
AlgElement bhat_from_sigma(const SeedBuilder& sb, double t, cplx z, const AlgElement& sigma,
                           const AlgElement& A1, const AlgElement& A2) {
  auto sig = [&](double tt, cplx zz) { return sigma_frame(sb.gamma(tt, zz).gamma_star).sigma; };
  const Steps h = fd_steps(t, z, kFdFraction);
  AlgElement d1 = deriv_z(sig, t, z, 1.0, h.hz) + bracket(A1, sigma);
  AlgElement d2 = deriv_z(sig, t, z, I_UNIT, h.hz) + bracket(A2, sigma);
  return 0.125 * (bracket(sigma, d1) + I_UNIT * bracket(sigma, d2));
}

}  // namespace

SeedFields SeedBuilder::point_nonzero(double t, cplx z, SeedRoute route) const {
  SeedFields f;
  fill_frame_data(t, z, f);
  f.region = shortcuts_ ? region(t, z) : SeedRegion::General;
  const double r = std::abs(z);
  switch (f.region) {
    case SeedRegion::ModelK: {
      ModelPoint mp = model_fields(p_.k(), t, z);
      f.A1 = mp.A1;
      f.A2 = mp.A2;
      f.a3 = mp.a3;
      f.alpha = mp.alpha;
      return f;
    }
    case SeedRegion::InnerK: {
      ModelPoint mp = model_fields(p_.k(), t, z);
      const cplx g = gamma(t, z).gamma;
      const double g2 = std::norm(g);
      f.A1 = mp.A1;
      f.A2 = mp.A2;
      f.a3 = mp.a3;
      f.alpha = mp.alpha * (1.0 - g2) / (1.0 + g2);
      // the sigma-orthogonal part of alpha_k sigma_3 (coefficient 1, not 1/2)
      f.beta = (-mp.alpha * std::conj(g) / (1.0 + g2)) * f.ihat;
      f.bhat = bhat_from_sigma(*this, t, z, f.sigma, f.A1, f.A2);
      return f;
    }
    case SeedRegion::OuterM: {
      ModelPoint mp = model_fields(p_.m, t, z);
      const double r2 = r * r;
      f.A1 = mp.A1 - (p_.p * z.imag() / r2) * SIGMA3;
      f.A2 = mp.A2 + (p_.p * z.real() / r2) * SIGMA3;
      f.a3 = mp.a3;
      f.alpha = mp.alpha;
      return f;
    }
    case SeedRegion::General:
      break;
  }

  const Steps h = fd_steps(t, z, kFdFraction);
  if (route == SeedRoute::Direct) {
    auto G = [this](double tt, cplx zz) { return frame_G0(tt, zz); };
    const GroupElement g0 = frame_G0(t, z);
    const AlgElement Ct = frame_conn(G, t, z, 0, h.ht, g0);
    const AlgElement Cz = frame_conn(G, t, z, 1, h.hz, g0) + I_UNIT * frame_conn(G, t, z, 2, h.hz, g0);
    const AlgElement hatAt = Ct.real_part(), hatA1 = Cz.real_part(), hatA2 = Cz.imag_part();
    f.alpha = inner(f.sigma, -1.0 * Ct.imag_part()).real();
    // Holomorphic multiples of phi contribute nothing to beta and b-hat, so q_regular
    // and q_full = q_regular - hhat phi give the same answer; use whichever avoids
    // cancelling large terms at this point (the smaller of the two).
    const bool use_full = norm(q_full(t, z)) < norm(q_regular(t, z));
    auto qr = [this, use_full](double tt, cplx zz) {
      return use_full ? q_full(tt, zz) : q_regular(tt, zz);
    };
    const AlgElement q = qr(t, z);
    if (!use_full && norm(q) == 0.0 && omega_dagger(t + 3 * h.ht, z) == 0.0 &&
        omega_dagger(t - 3 * h.ht, z) == 0.0 && !spread_) {
      f.beta = AlgElement{};
      f.bhat = AlgElement{};
    } else {
      const AlgElement dtq = deriv_t(qr, t, z, h.ht);
      const AlgElement d1q = deriv_z(qr, t, z, 1.0, h.hz);
      const AlgElement d2q = deriv_z(qr, t, z, I_UNIT, h.hz);
      f.beta = dtq + bracket(hatAt, q) - 2.0 * f.alpha * q;
      f.bhat = -I_UNIT * (d1q + bracket(hatA1, q) + I_UNIT * (d2q + bracket(hatA2, q)));
    }
    f.At = hatAt - I_UNIT * (f.beta - star(f.beta));
    f.A1 = hatA1 + f.bhat + star(f.bhat);
    f.A2 = hatA2 - I_UNIT * (f.bhat - star(f.bhat));
    f.a3 = f.alpha * f.sigma + f.beta + star(f.beta);
    return f;
  }

  // Conjugation route: G = (cosh w + i sinh w sigma + 2i e^-w q) U
  auto G = [this](double tt, cplx zz) {
    const Frame fr = sigma_frame(gamma(tt, zz).gamma_star);
    const double ww = w(tt, zz);
    const AlgElement e = -std::pow(zz / std::abs(zz), p_.k()) * fr.ihat;
    GroupElement gg = cplx(std::cosh(ww)) * GroupElement::identity() +
                      to_matrix((I_UNIT * std::sinh(ww)) * fr.sigma +
                                (2.0 * I_UNIT * std::exp(-ww)) * q_regular(tt, zz));
    return gg * frame_unitary(fr.sigma, e);
  };
  const GroupElement g0 = G(t, z);
  const AlgElement Ct = frame_conn(G, t, z, 0, h.ht, g0);
  const AlgElement Cz = frame_conn(G, t, z, 1, h.hz, g0) + I_UNIT * frame_conn(G, t, z, 2, h.hz, g0);
  f.At = Ct.real_part();
  f.a3 = -1.0 * Ct.imag_part();
  f.A1 = Cz.real_part();
  f.A2 = Cz.imag_part();
  EigenParts e3 = eig_project(f.sigma, f.a3);
  f.alpha = e3.diag.real();
  f.beta = e3.plus;
  f.bhat = bhat_from_sigma(*this, t, z, f.sigma, f.A1, f.A2);
  return f;
}

SeedFields SeedBuilder::point(double t, cplx z, SeedRoute route) const {
  if (!(t > 0)) throw std::domain_error("seed point: t must be positive");
  if (std::abs(z) >= 1e-7 * t) return point_nonzero(t, z, route);
  // On the axis: average four symmetric points at radius 1e-4 t (error O(1e-8)).
  const double e = 1e-4 * t;
  const cplx dirs[4] = {1.0, I_UNIT, -1.0, -I_UNIT};
  SeedFields acc;
  for (int j = 0; j < 4; ++j) {
    SeedFields s = point_nonzero(t, z + e * dirs[j], route);
    if (j == 0) acc.ihat = s.ihat;
    acc.sigma += 0.25 * s.sigma;
    acc.phi += 0.25 * s.phi;
    acc.a3 += 0.25 * s.a3;
    acc.A1 += 0.25 * s.A1;
    acc.A2 += 0.25 * s.A2;
    acc.At += 0.25 * s.At;
    acc.beta += 0.25 * s.beta;
    acc.bhat += 0.25 * s.bhat;
    acc.q += 0.25 * s.q;
    acc.w += 0.25 * s.w;
    acc.alpha += 0.25 * s.alpha;
  }
  acc.sigma = acc.sigma / norm(acc.sigma);
  acc.region = SeedRegion::General;
  return acc;
}

AlgElement SeedBuilder::X_point(double t, cplx z) const {
  // Inside the chi* band sigma turns over on a sub-layer of width ~ t / ln^2|gamma|.
  double frac = kXFraction;
  const double rz = std::abs(z) / t;
  if (rz > 1.25 && rz < 1.75) frac /= 1.0 + std::pow(std::log1p(std::abs(gamma(t, z).gamma)), 2);
  const Steps h = fd_steps(t, z, frac);
  const SeedFields c = point(t, z);
  auto a3 = [this](double tt, cplx zz) { return point(tt, zz).a3; };
  auto A1 = [this](double tt, cplx zz) { return point(tt, zz).A1; };
  auto A2 = [this](double tt, cplx zz) { return point(tt, zz).A2; };
  const AlgElement dta3 = deriv_t(a3, t, z, h.ht);
  const AlgElement d1A2 = deriv_z(A2, t, z, 1.0, h.hz);
  const AlgElement d2A1 = deriv_z(A1, t, z, I_UNIT, h.hz);
  const AlgElement B = d1A2 - d2A1 + bracket(c.A1, c.A2);
  return dta3 + bracket(c.At, c.a3) - B - cplx(0.0, 0.5) * bracket(c.phi, star(c.phi));
}

double seed_w(const SeedParams& p, double t, cplx z) { return SeedBuilder(p).w(t, z); }

double omega_dagger(const SeedParams& p, double t, cplx z) {
  return SeedBuilder(p).omega_dagger(t, z);
}

AlgElement q_section(const SeedParams& p, double t, cplx z) {
  if (z == cplx(0.0)) throw std::domain_error("q_section: pole at z = 0");
  return SeedBuilder(p).q_full(t, z);
}

std::pair<AlgElement, AlgElement> beta_bhat(const SeedParams& p, double t, cplx z) {
  SeedFields f = SeedBuilder(p).point(t, z);
  return {f.beta, f.bhat};
}

GaugeField assemble_seed(const SeedParams& p, const HalfSpaceGrid& g) {
  const SeedBuilder sb(p);
  GaugeField f(g);
  f.seed = p;
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(g.size()); ++idx) {
    int i, j, k;
    g.coords(static_cast<std::size_t>(idx), i, j, k);
    SeedFields s = sb.point(g.t(i), g.z(j, k));
    f.At[idx] = s.At;
    f.A1[idx] = s.A1;
    f.A2[idx] = s.A2;
    f.a3[idx] = s.a3;
    f.set_phi(static_cast<std::size_t>(idx), s.phi);
  }
  f.check_finite();
  return f;
}

double loglog_slope(const std::vector<std::pair<double, double>>& xy) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (auto [x, y] : xy) {
    if (!(x > 0) || !(y > 0)) return std::numeric_limits<double>::quiet_NaN();
    const double lx = std::log(x), ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SeedXReport seed_X_bounds(const SeedParams& p, const GaugeField& field,
                          const std::vector<double>& R_list) {
  const SeedBuilder sb(p);
  const HalfSpaceGrid& g = field.grid;
  ResidualFields r = kw_residual_fields(field);
  ResidualFields rk = kw_residual_fields(model_on_grid(p.k(), g));
  ResidualFields rm = kw_residual_fields(model_on_grid(p.m, g));
  SeedXReport rep;
  std::vector<std::size_t> small_nodes, large_nodes;
  for (std::size_t n = 0; n < g.size(); ++n) {
    if (!g.interior(n)) continue;
    int i, j, k;
    g.coords(n, i, j, k);
    const double t = g.t(i);
    const cplx z = g.z(j, k);
    rep.max_X = std::max(rep.max_X, r.X_abs[n]);
    // the whole difference stencil must sit where the seed is the model k solution
    auto model_k_at = [&](int a, int b, int c) {
      return sb.region(g.t(a), g.z(b, c)) == SeedRegion::ModelK;
    };
    if (std::abs(z) >= 4 * t && t <= 0.5 * p.delta && model_k_at(i - 1, j, k) &&
        model_k_at(i + 1, j, k) && model_k_at(i, j - 1, k) && model_k_at(i, j + 1, k) &&
        model_k_at(i, j, k - 1) && model_k_at(i, j, k + 1)) {
      small_nodes.push_back(n);
      rep.small_t_far.max_X_discrete = std::max(rep.small_t_far.max_X_discrete, r.X_abs[n]);
      rep.small_t_far.max_diff_reference =
          std::max(rep.small_t_far.max_diff_reference, norm(r.X[n] - rk.X[n]));
    }
    const bool beyond = sb.spread_cutoff()
                            ? t >= p.delta * std::pow(1.0 + std::norm(z), 0.25)
                            : t >= p.delta;
    if (beyond) {
      large_nodes.push_back(n);
      rep.large_t.max_X_discrete = std::max(rep.large_t.max_X_discrete, r.X_abs[n]);
      rep.large_t.max_diff_reference =
          std::max(rep.large_t.max_diff_reference, norm(r.X[n] - rm.X[n]));
    }
  }
  rep.small_t_far.nodes = small_nodes.size();
  rep.large_t.nodes = large_nodes.size();
  auto sample = [&](const std::vector<std::size_t>& nodes, RegionCheck& rc) {
    const std::size_t want = 64;
    const std::size_t stride = std::max<std::size_t>(1, nodes.size() / want);
    for (std::size_t s = 0; s < nodes.size(); s += stride) {
      int i, j, k;
      g.coords(nodes[s], i, j, k);
      const cplx z = g.z(j, k);
      if (std::abs(z) < 1e-7 * g.t(i)) continue;
      rc.max_X_continuum = std::max(rc.max_X_continuum, norm(sb.X_point(g.t(i), z)));
    }
  };
  sample(small_nodes, rep.small_t_far);
  sample(large_nodes, rep.large_t);

  NodeReal x2(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) x2[n] = r.X_abs[n] * r.X_abs[n];
  rep.weighted_integral = weighted_integral(g, x2, {WeightKind::OnePlusT2, 0}, true);
  for (double R : R_list)
    rep.tail.emplace_back(R, weighted_integral(g, x2, {WeightKind::OutsideRadius, R}, true));
  rep.tail_slope = loglog_slope(rep.tail);
  return rep;
}

}  // namespace kwflow
