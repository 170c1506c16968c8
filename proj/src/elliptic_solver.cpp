#include "kwflow/elliptic_solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <nlohmann/json.hpp>

#include "kwflow/quadrature.hpp"

namespace kwflow {

namespace {

constexpr double kPi = std::numbers::pi;

struct P3 {
  double t, x, y;
};
P3 as3(const HalfSpacePoint& p) { return {p.t, p.z.real(), p.z.imag()}; }

}  // namespace

// ---------------------------------------------------------------- Green

double green(const HalfSpacePoint& q, const HalfSpacePoint& p) {
  const double dz2 = std::norm(p.z - q.z);
  const double a2 = (p.t - q.t) * (p.t - q.t) + dz2;
  if (a2 == 0.0) throw std::invalid_argument("green: p coincides with the pole q");
  const double b2 = (p.t + q.t) * (p.t + q.t) + dz2;
  // 1/a - 1/b written to keep relative accuracy when a << b or p.t -> 0
  const double a = std::sqrt(a2), b = std::sqrt(b2);
  return (4.0 * p.t * q.t) / (a * b * (a + b)) / (4.0 * kPi);
}

double green_grad_norm(const HalfSpacePoint& q, const HalfSpacePoint& p) {
  const P3 P = as3(p), Q = as3(q);
  const double d[3] = {P.t - Q.t, P.x - Q.x, P.y - Q.y};
  const double e[3] = {P.t + Q.t, P.x - Q.x, P.y - Q.y};
  const double a = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  if (a == 0.0) throw std::invalid_argument("green_grad_norm: p coincides with the pole q");
  const double b = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  double g2 = 0;
  for (int c = 0; c < 3; ++c) {
    const double gc = (-d[c] / (a * a * a) + e[c] / (b * b * b)) / (4.0 * kPi);
    g2 += gc * gc;
  }
  return std::sqrt(g2);
}

double green_weighted_l2(double t_q) {
  if (!(t_q > 0)) throw std::invalid_argument("green_weighted_l2: t_q must be positive");
  // polar coordinates (r, theta) about (t_q, 0) in the (t, rho) half-plane; rho dr
  // dtheta measure with the z-angle integrated out
  const double R0 = 4.0 * t_q;
  auto radial = [&](double th) {
    const double c = std::cos(th), s = std::sin(th);
    auto integrand = [&](double r) {
      const double t = t_q + r * c;
      if (t <= 0) return 0.0;
      const double b = std::sqrt((t + t_q) * (t + t_q) + r * r * s * s);
      // r^2 G^2 with G = (1/r - 1/b)/(4 pi)
      const double rG = (1.0 - r / b) / (4.0 * kPi);
      return 2.0 * kPi * s * rG * rG / (1.0 + t * t);
    };
    const double rmax = c < 0 ? t_q / (-c) : std::numeric_limits<double>::infinity();
    double sum = integrate_panels(integrand, 0.0, std::min(R0, rmax), 24, 16);
    if (rmax > R0) {
      // r = R0 / y
      const double ylo = std::isinf(rmax) ? 0.0 : R0 / rmax;
      sum += integrate_panels([&](double y) { return y <= 0 ? 0.0 : integrand(R0 / y) * R0 / (y * y); },
                              ylo, 1.0, 24, 16);
    }
    return sum;
  };
  return integrate_panels(radial, 0.0, kPi, 64, 16);
}

bool GreenBoundsReport::pass() const {
  return positive && c_near_lower <= c0 && c_upper <= c0 && c_far <= c0 && c_grad <= c0 &&
         c_integral <= c0;
}

GreenBoundsReport green_bounds_check(int samples, unsigned seed,
                                     const std::vector<double>& t_q_list) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  GreenBoundsReport rep;
  rep.samples = samples;
  auto log_uniform = [&](double lo, double hi) { return lo * std::pow(hi / lo, U(rng)); };
  auto unit_dir = [&]() {
    double v[3];
    double n2;
    do {
      for (double& c : v) c = 2 * U(rng) - 1;
      n2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    } while (n2 > 1 || n2 < 1e-6);
    const double n = std::sqrt(n2);
    return std::array<double, 3>{v[0] / n, v[1] / n, v[2] / n};
  };
  for (int s = 0; s < samples; ++s) {
    HalfSpacePoint q{log_uniform(1e-2, 1e2), {4 * U(rng) - 2, 4 * U(rng) - 2}};
    // alternate near pairs (inside the t_q/4 ball) and pairs at all scales
    const bool near = s % 2 == 0;
    const double dist = near ? 0.25 * q.t * std::cbrt(U(rng)) : log_uniform(1e-3, 1e3) * q.t;
    const auto e = unit_dir();
    HalfSpacePoint p{q.t + dist * e[0], q.z + cplx(dist * e[1], dist * e[2])};
    if (p.t <= 0) p.t = -p.t;  // reflect into the half-space
    if (p.t == 0) continue;
    const double r = std::sqrt((p.t - q.t) * (p.t - q.t) + std::norm(p.z - q.z));
    if (r == 0) continue;
    const double G = green(q, p);
    if (!(G > 0)) rep.positive = false;
    if (r <= 0.25 * q.t) rep.c_near_lower = std::max(rep.c_near_lower, 1.0 / (G * r));
    rep.c_upper = std::max(rep.c_upper, G * r);
    if (r >= 0.25 * q.t || r >= 0.25 * p.t)
      rep.c_far = std::max(rep.c_far, G * r * r * r / (p.t * q.t));
    rep.c_grad = std::max(rep.c_grad, green_grad_norm(q, p) * r * r);
  }
  for (double tq : t_q_list) {
    const double I = green_weighted_l2(tq);
    const double env = std::min(tq, (1.0 + std::abs(std::log(tq))) / tq);
    rep.integrals.push_back({tq, I, env});
    rep.c_integral = std::max(rep.c_integral, I / env);
  }
  return rep;
}

// ---------------------------------------------------------------- Hardy

HardyVariant parse_hardy_variant(const std::string& name) {
  if (name == "half-space" || name == "half_space") return HardyVariant::HalfSpace;
  if (name == "ball") return HardyVariant::Ball;
  if (name == "line") return HardyVariant::Line;
  throw std::invalid_argument("unsupported Hardy variant '" + name +
                              "' (expected half-space, ball or line)");
}

std::string to_string(HardyVariant v) {
  switch (v) {
    case HardyVariant::HalfSpace: return "half-space";
    case HardyVariant::Ball: return "ball";
    default: return "line";
  }
}

HardyTestFunction random_hardy_function(HardyVariant v, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  HardyTestFunction f;
  const int nb = 1 + static_cast<int>(U(rng) * 4);
  f.decay = v == HardyVariant::Ball ? 0.0 : 0.2 + 1.8 * U(rng);
  for (int b = 0; b < nb; ++b) {
    HardyTestFunction::Bump k{};
    k.amp = 2 * U(rng) - 1;
    if (v == HardyVariant::Ball) {
      // centres inside the unit ball, widths comparable to it
      k.t0 = 1.6 * U(rng) - 0.8;
      k.x0 = 1.6 * U(rng) - 0.8;
      k.y0 = 1.6 * U(rng) - 0.8;
      k.wz = 0.2 + 0.8 * U(rng);
    } else {
      k.t0 = 3.0 * U(rng);
      k.wt = U(rng) < 0.2 ? 0.0 : 0.2 + 1.5 * U(rng);
      k.x0 = 2 * U(rng) - 1;
      k.y0 = 2 * U(rng) - 1;
      k.wz = 0.3 + 0.9 * U(rng);
    }
    f.bumps.push_back(k);
  }
  return f;
}

HardyTestFunction hardy_example(HardyVariant v) {
  HardyTestFunction f;
  switch (v) {
    case HardyVariant::HalfSpace:
      f.decay = 1.0;
      f.bumps.push_back({1.0, 0.0, 0.0, 0.0, 0.0, 1.0});
      break;
    case HardyVariant::Line:
      f.decay = 0.0;
      f.bumps.push_back({1.0, 1.0, 1.0, 0.0, 0.0, 1.0});
      break;
    case HardyVariant::Ball:
      f.decay = 0.0;
      f.bumps.push_back({1.0, 0.3, 0.0, 0.1, -0.2, 0.5});
      break;
  }
  return f;
}

namespace {

double gauss1(double x, double x0, double w) {
  if (w <= 0) return 1.0;
  const double u = (x - x0) / w;
  return std::exp(-u * u);
}
// d/dx log of gauss1
double dlog_gauss1(double x, double x0, double w) { return w <= 0 ? 0.0 : -2.0 * (x - x0) / (w * w); }

// Pairwise 1D integrals over the quadrature nodes of [lo, hi].
struct Quad1 {
  std::vector<double> x, w;
  Quad1(double lo, double hi, int panels, int n = 16) {
    const GaussRule& g = gauss_legendre(n);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p)
      for (int i = 0; i < n; ++i) {
        x.push_back(lo + p * h + 0.5 * h * (g.x[i] + 1.0));
        w.push_back(0.5 * h * g.w[i]);
      }
  }
  double sum(const std::vector<double>& a, const std::vector<double>& b) const {
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * a[i] * b[i];
    return s;
  }
};

HardySides hardy_half_space(const HardyTestFunction& f) {
  // f = t e^{-ct} sum_k A_k g_k(t) X_k(x) Y_k(y); every integral factorizes over pairs
  const double c = f.decay;
  const Quad1 qt(0.0, 40.0 / std::max(c, 0.25) + 8.0, 80), qz(-8.0, 8.0, 32);
  const std::size_t nb = f.bumps.size();
  std::vector<std::vector<double>> T(nb), Tp(nb), Tt(nb), X(nb), Xp(nb), Y(nb), Yp(nb);
  for (std::size_t k = 0; k < nb; ++k) {
    const auto& b = f.bumps[k];
    for (double t : qt.x) {
      const double base = std::exp(-c * t) * gauss1(t, b.t0, b.wt);
      Tt[k].push_back(base);  // T / t
      T[k].push_back(t * base);
      Tp[k].push_back(base * (1.0 + t * (-c + dlog_gauss1(t, b.t0, b.wt))));
    }
    for (double x : qz.x) {
      X[k].push_back(gauss1(x, b.x0, b.wz));
      Xp[k].push_back(X[k].back() * dlog_gauss1(x, b.x0, b.wz));
      Y[k].push_back(gauss1(x, b.y0, b.wz));
      Yp[k].push_back(Y[k].back() * dlog_gauss1(x, b.y0, b.wz));
    }
  }
  HardySides s;
  double grad = 0;
  for (std::size_t k = 0; k < nb; ++k)
    for (std::size_t l = 0; l < nb; ++l) {
      const double A = f.bumps[k].amp * f.bumps[l].amp;
      const double tt = qt.sum(T[k], T[l]), xx = qz.sum(X[k], X[l]), yy = qz.sum(Y[k], Y[l]);
      s.lhs += A * qt.sum(Tt[k], Tt[l]) * xx * yy;
      grad += A * (qt.sum(Tp[k], Tp[l]) * xx * yy + tt * qz.sum(Xp[k], Xp[l]) * yy +
                   tt * xx * qz.sum(Yp[k], Yp[l]));
    }
  s.rhs = 4.0 * grad;
  return s;
}

HardySides hardy_line(const HardyTestFunction& f) {
  // f = t^2 e^{-ct} sum_k A_k g_k(t)
  const double c = f.decay;
  auto sums = [&](double t, double& f_t2, double& fp_t) {
    f_t2 = fp_t = 0;
    for (const auto& b : f.bumps) {
      const double base = b.amp * std::exp(-c * t) * gauss1(t, b.t0, b.wt);
      f_t2 += base;
      fp_t += base * (2.0 + t * (-c + dlog_gauss1(t, b.t0, b.wt)));
    }
  };
  const double hi = 40.0 / std::max(c, 0.25) + 8.0;
  HardySides s;
  s.lhs = integrate_panels([&](double t) { double a, b; sums(t, a, b); return a * a; }, 0, hi, 80, 16);
  s.rhs = (4.0 / 9.0) *
          integrate_panels([&](double t) { double a, b; sums(t, a, b); return b * b; }, 0, hi, 80, 16);
  return s;
}

HardySides hardy_ball(const HardyTestFunction& f) {
  // unit ball about the origin, spherical coordinates
  const double rho = 1.0;
  const GaussRule& gr = gauss_legendre(32);
  const GaussRule& gc = gauss_legendre(24);
  const int nphi = 48;
  HardySides s;
  double grad_term = 0, l2_term = 0;
  for (int ir = 0; ir < 32; ++ir) {
    const double r = 0.5 * rho * (gr.x[ir] + 1.0), wr = 0.5 * rho * gr.w[ir];
    for (int ic = 0; ic < 24; ++ic) {
      const double ct = gc.x[ic], st = std::sqrt(1.0 - ct * ct), wc = gc.w[ic];
      for (int ip = 0; ip < nphi; ++ip) {
        const double ph = 2.0 * kPi * ip / nphi, wp = 2.0 * kPi / nphi;
        const double x[3] = {r * ct, r * st * std::cos(ph), r * st * std::sin(ph)};
        double val = 0, g[3] = {0, 0, 0};
        for (const auto& b : f.bumps) {
          const double d[3] = {x[0] - b.t0, x[1] - b.x0, x[2] - b.y0};
          const double e =
              b.amp * std::exp(-(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]) / (b.wz * b.wz));
          val += e;
          for (int a = 0; a < 3; ++a) g[a] += e * (-2.0 * d[a] / (b.wz * b.wz));
        }
        const double w = wr * wc * wp;
        s.lhs += w * val * val;  // f^2/r^2 * r^2 dr dOmega
        grad_term += w * r * r * (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        l2_term += w * r * r * val * val;
      }
    }
  }
  s.rhs = kHardyBallC0 * (grad_term + l2_term / (rho * rho));
  return s;
}

}  // namespace

HardySides hardy_check(const HardyTestFunction& f, HardyVariant v) {
  switch (v) {
    case HardyVariant::HalfSpace: return hardy_half_space(f);
    case HardyVariant::Line: return hardy_line(f);
    case HardyVariant::Ball: return hardy_ball(f);
  }
  throw std::invalid_argument("hardy_check: unsupported variant");
}

HardySuiteReport hardy_suite(HardyVariant v, int trials, unsigned seed) {
  std::mt19937_64 rng(seed);
  HardySuiteReport rep{v, 0, 0, 0.0};
  for (int i = 0; i < trials; ++i) {
    const HardySides s = hardy_check(random_hardy_function(v, rng), v);
    ++rep.trials;
    if (s.holds()) ++rep.passed;
    if (s.rhs > 0) rep.max_ratio = std::max(rep.max_ratio, s.lhs / s.rhs);
  }
  return rep;
}

// ---------------------------------------------------------------- operator

namespace {

inline void cross_ad(const double* x, const double* y, double* out) {
  // ad_x y = [x, y] = -2 x cross y
  out[0] = -2.0 * (x[1] * y[2] - x[2] * y[1]);
  out[1] = -2.0 * (x[2] * y[0] - x[0] * y[2]);
  out[2] = -2.0 * (x[0] * y[1] - x[1] * y[0]);
}

void invert3(const double* m, double* inv) {
  const double c00 = m[4] * m[8] - m[5] * m[7], c01 = m[5] * m[6] - m[3] * m[8],
               c02 = m[3] * m[7] - m[4] * m[6];
  const double det = m[0] * c00 + m[1] * c01 + m[2] * c02;
  const double id = 1.0 / det;
  inv[0] = c00 * id;
  inv[1] = (m[2] * m[7] - m[1] * m[8]) * id;
  inv[2] = (m[1] * m[5] - m[2] * m[4]) * id;
  inv[3] = c01 * id;
  inv[4] = (m[0] * m[8] - m[2] * m[6]) * id;
  inv[5] = (m[2] * m[3] - m[0] * m[5]) * id;
  inv[6] = c02 * id;
  inv[7] = (m[1] * m[6] - m[0] * m[7]) * id;
  inv[8] = (m[0] * m[4] - m[1] * m[3]) * id;
}

std::vector<double> real_field(const NodeAlg& v) {
  std::vector<double> out(3 * v.size());
  for (std::size_t n = 0; n < v.size(); ++n)
    for (int a = 0; a < 3; ++a) out[3 * n + a] = v[n][a].real();
  return out;
}

}  // namespace

EllipticOperator::EllipticOperator(const GaugeField& f) : g_(f.grid) {
  f.check_finite();
  for (int d = 0; d < 3; ++d) A_[d] = real_field(f.A(static_cast<Dir>(d)));
  a_[0] = real_field(f.a1);
  a_[1] = real_field(f.a2);
  a_[2] = real_field(f.a3);
  w_.resize(g_.n_t());
  for (int i = 0; i < g_.n_t(); ++i) w_[i] = g_.solver_weight(i);
  const std::size_t N = g_.size();
  binv_.assign(9 * N, 0.0);
  for (auto& t : tmp_) t.assign(3 * N, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(N); ++idx) {
    const std::size_t n = static_cast<std::size_t>(idx);
    int i, j, k;
    g_.coords(n, i, j, k);
    double* out = &binv_[9 * n];
    if (!g_.interior(i, j, k)) {
      out[0] = out[4] = out[8] = 1.0;
      continue;
    }
    double m[9] = {0};
    const double sz = 1.0 / (2.0 * g_.hz());
    auto st = [&](int ii) { return 1.0 / (2.0 * g_.dtau() * g_.t(ii)); };
    const double diag = st(i) * (st(i + 1) + st(i - 1)) + 2.0 * (2.0 * sz * sz);
    m[0] = m[4] = m[8] = diag;
    auto add_ad2 = [&](const double* x) {
      // -ad_x^2 = 4 (|x|^2 - x x^T)
      const double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m[3 * r + c] += 4.0 * ((r == c ? x2 : 0.0) - x[r] * x[c]);
    };
    for (int d = 0; d < 3; ++d) add_ad2(&A_[d][3 * n]);
    for (int a = 0; a < 3; ++a) add_ad2(&a_[a][3 * n]);
    invert3(m, out);
  }
}

void EllipticOperator::apply(const Vec& v, Vec& out) const {
  const std::size_t N = g_.size();
  out.assign(3 * N, 0.0);
  const int nt = g_.n_t(), nz = g_.n_z();
  // value of v with the faces forced to zero
  auto val = [&](std::size_t n, int a) {
    int i, j, k;
    g_.coords(n, i, j, k);
    return g_.interior(i, j, k) ? v[3 * n + a] : 0.0;
  };
  // G_d = D^0_d v on every node
  for (int d = 0; d < 3; ++d) {
    const Dir dir = static_cast<Dir>(d);
    const std::size_t s = g_.stride(dir);
    const int cnt = d == 0 ? nt : nz;
    Vec& G = tmp_[d];
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(N); ++idx) {
      const std::size_t n = static_cast<std::size_t>(idx);
      const int c = g_.coord(n, dir);
      double scale = 1.0 / (2.0 * (d == 0 ? g_.dtau() : g_.hz()));
      if (d == 0) scale /= g_.t(c);
      double vn[3], ad[3];
      for (int a = 0; a < 3; ++a) {
        // odd reflection through the faces, where v = 0
        double diff;
        if (c == 0)
          diff = 2.0 * val(n + s, a);
        else if (c == cnt - 1)
          diff = -2.0 * val(n - s, a);
        else
          diff = val(n + s, a) - val(n - s, a);
        G[3 * n + a] = scale * diff;
        vn[a] = val(n, a);
      }
      cross_ad(&A_[d][3 * n], vn, ad);
      for (int a = 0; a < 3; ++a) G[3 * n + a] += ad[a];
    }
  }
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(N); ++idx) {
    const std::size_t n = static_cast<std::size_t>(idx);
    int i, j, k;
    g_.coords(n, i, j, k);
    if (!g_.interior(i, j, k)) continue;
    double acc[3] = {0, 0, 0}, tmp[3];
    for (int d = 0; d < 3; ++d) {
      const Dir dir = static_cast<Dir>(d);
      const std::size_t s = g_.stride(dir);
      double scale = 1.0 / (2.0 * (d == 0 ? g_.dtau() : g_.hz()));
      if (d == 0) scale /= g_.t(i);
      const Vec& G = tmp_[d];
      cross_ad(&A_[d][3 * n], &G[3 * n], tmp);
      for (int a = 0; a < 3; ++a) acc[a] -= scale * (G[3 * (n + s) + a] - G[3 * (n - s) + a]) + tmp[a];
    }
    const double* vn = &v[3 * n];
    for (int b = 0; b < 3; ++b) {
      const double* x = &a_[b][3 * n];
      const double x2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      const double xv = x[0] * vn[0] + x[1] * vn[1] + x[2] * vn[2];
      for (int a = 0; a < 3; ++a) acc[a] += 4.0 * (x2 * vn[a] - x[a] * xv);
    }
    for (int a = 0; a < 3; ++a) out[3 * n + a] = acc[a];
  }
}

double EllipticOperator::dot(const Vec& a, const Vec& b) const {
  const int nt = g_.n_t(), nz = g_.n_z();
  double sum = 0;
  // per-level partial sums in a fixed order keep the result reproducible
  std::vector<double> level(nt, 0.0);
#pragma omp parallel for schedule(static)
  for (int i = 1; i < nt - 1; ++i) {
    double s = 0;
    for (int j = 1; j < nz - 1; ++j)
      for (int k = 1; k < nz - 1; ++k) {
        const std::size_t n = 3 * g_.index(i, j, k);
        s += a[n] * b[n] + a[n + 1] * b[n + 1] + a[n + 2] * b[n + 2];
      }
    level[i] = w_[i] * s;
  }
  for (double l : level) sum += l;
  return sum;
}

EllipticOperator::Vec EllipticOperator::pack(const NodeAlg& v) const {
  if (v.size() != g_.size()) throw std::invalid_argument("EllipticOperator: size mismatch");
  Vec out = real_field(v);
  for (std::size_t n = 0; n < v.size(); ++n)
    if (!g_.interior(n)) out[3 * n] = out[3 * n + 1] = out[3 * n + 2] = 0.0;
  return out;
}

NodeAlg EllipticOperator::unpack(const Vec& v) const {
  NodeAlg out(g_.size());
  for (std::size_t n = 0; n < out.size(); ++n)
    out[n] = AlgElement(v[3 * n], v[3 * n + 1], v[3 * n + 2]);
  return out;
}

NodeAlg apply_operator(const EllipticProblem& problem, const NodeAlg& v) {
  if (!problem.field) throw std::invalid_argument("apply_operator: problem has no field");
  EllipticOperator op(*problem.field);
  EllipticOperator::Vec out;
  op.apply(op.pack(v), out);
  return op.unpack(out);
}

double solver_dot(const HalfSpaceGrid& g, const NodeAlg& a, const NodeAlg& b) {
  double sum = 0;
  for (int i = 1; i < g.n_t() - 1; ++i) {
    double s = 0;
    for (int j = 1; j < g.n_z() - 1; ++j)
      for (int k = 1; k < g.n_z() - 1; ++k) {
        const std::size_t n = g.index(i, j, k);
        s += inner(star(a[n]), b[n]).real();
      }
    sum += g.solver_weight(i) * s;
  }
  return sum;
}

// ---------------------------------------------------------------- CG

void to_json(nlohmann::json& j, const SolverStats& s) {
  j = nlohmann::json{{"iterations", s.iterations},
                     {"relative_residual", s.relative_residual},
                     {"rhs_norm", s.b_norm},
                     {"residual_history", s.residual_history},
                     {"energy_history", s.energy_history}};
}

SolveResult solve_u(const EllipticOperator& op, const NodeAlg& rhs, const SolverConfig& cfg,
                    const NodeAlg* initial) {
  using Vec = EllipticOperator::Vec;
  const HalfSpaceGrid& g = op.grid();
  const std::size_t N3 = 3 * g.size();
  for (const auto& x : rhs)
    for (int a = 0; a < 3; ++a)
      if (!std::isfinite(x[a].real()) || !std::isfinite(x[a].imag()))
        throw std::invalid_argument("solve_u: right-hand side is not finite");
  const Vec b = op.pack(rhs);
  Vec x = initial ? op.pack(*initial) : Vec(N3, 0.0);
  const std::size_t interior = static_cast<std::size_t>(g.n_t() - 2) * (g.n_z() - 2) * (g.n_z() - 2);
  const int max_iter =
      cfg.max_iter > 0 ? cfg.max_iter : static_cast<int>(20.0 * std::cbrt(static_cast<double>(interior)));

  SolveResult res;
  SolverStats& st = res.stats;
  st.b_norm = std::sqrt(op.dot(b, b));
  if (st.b_norm == 0.0) {
    res.u = op.unpack(Vec(N3, 0.0));
    return res;
  }
  Vec r(N3), z(N3), p(N3), Ap(N3);
  op.apply(x, Ap);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(N3); ++n) r[n] = b[n] - Ap[n];
  const auto& Binv = op.block_inverse();
  auto precondition = [&](const Vec& in, Vec& out) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(g.size()); ++idx) {
      const std::size_t n = static_cast<std::size_t>(idx);
      const double* M = &Binv[9 * n];
      const double* v = &in[3 * n];
      for (int a = 0; a < 3; ++a) out[3 * n + a] = M[3 * a] * v[0] + M[3 * a + 1] * v[1] + M[3 * a + 2] * v[2];
    }
  };
  auto energy = [&]() {
    // E = 1/2 <x, Ax> - <b, x> = -1/2 <x, b + r>
    Vec br(N3);
    for (std::size_t n = 0; n < N3; ++n) br[n] = b[n] + r[n];
    return -0.5 * op.dot(x, br);
  };
  precondition(r, z);
  p = z;
  double rz = op.dot(r, z);
  double rel = std::sqrt(op.dot(r, r)) / st.b_norm;
  st.residual_history.push_back(rel);
  st.energy_history.push_back(energy());
  int it = 0;
  while (rel >= cfg.tol) {
    if (it >= max_iter) {
      st.iterations = it;
      st.relative_residual = rel;
      throw SolverError("solve_u: no convergence in " + std::to_string(max_iter) +
                            " iterations (relative residual " + std::to_string(rel) + ")",
                        st);
    }
    op.apply(p, Ap);
    const double pAp = op.dot(p, Ap);
    if (!(pAp > 0)) throw SolverError("solve_u: operator not positive on the search direction", st);
    const double alpha = rz / pAp;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(N3); ++n) {
      x[n] += alpha * p[n];
      r[n] -= alpha * Ap[n];
    }
    precondition(r, z);
    const double rz_new = op.dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(N3); ++n) p[n] = z[n] + beta * p[n];
    ++it;
    rel = std::sqrt(op.dot(r, r)) / st.b_norm;
    st.residual_history.push_back(rel);
    st.energy_history.push_back(energy());
  }
  st.iterations = it;
  st.relative_residual = rel;
  res.u = op.unpack(x);
  return res;
}

SolveResult solve_u(const EllipticProblem& problem, const SolverConfig& cfg, const NodeAlg* initial) {
  if (!problem.field) throw std::invalid_argument("solve_u: problem has no field");
  EllipticOperator op(*problem.field);
  return solve_u(op, problem.rhs, cfg, initial);
}

// ---------------------------------------------------------------- B-norm

std::vector<HalfSpacePoint> default_b_norm_samples(const HalfSpaceGrid& g) {
  const int nt = g.n_t();
  auto tmid = [&](int i) { return std::sqrt(g.t(i) * g.t(i + 1)); };
  const double h = g.hz(), L = g.spec().L;
  // z = 0 is a cell centre for even n_z; otherwise shift by half a cell
  const cplx axis = g.n_z() % 2 == 0 ? cplx(0.0, 0.0) : cplx(0.5 * h, 0.5 * h);
  const cplx corner(L - 1.5 * h, L - 1.5 * h);
  std::vector<HalfSpacePoint> out;
  for (int i : {1, nt / 2, nt - 3}) {
    out.push_back({tmid(i), axis});
    out.push_back({tmid(i), corner});
    out.push_back({tmid(i), -corner});
    out.push_back({tmid(i), cplx(corner.real(), -corner.imag())});
    out.push_back({tmid(i), cplx(-corner.real(), corner.imag())});
  }
  return out;
}

double b_norm(const NodeAlg& u, const EllipticProblem& problem,
              const std::vector<HalfSpacePoint>& sample_q) {
  if (!problem.field) throw std::invalid_argument("b_norm: problem has no field");
  const GaugeField& f = *problem.field;
  const HalfSpaceGrid& g = f.grid;
  EllipticOperator op(f);
  const auto uv = op.pack(u);
  EllipticOperator::Vec Ou;
  op.apply(uv, Ou);
  const NodeAlg uz = op.unpack(uv);
  NodeAlg D[3];
  for (int d = 0; d < 3; ++d) {
    const Dir dir = static_cast<Dir>(d);
    D[d] = partial_dirichlet(g, uz, dir);
    for (std::size_t n = 0; n < g.size(); ++n) D[d][n] += bracket(f.A(dir)[n], uz[n]);
  }
  NodeReal dens(g.size()), opabs(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) {
    double e = norm2(D[0][n]) + norm2(D[1][n]) + norm2(D[2][n]);
    for (const NodeAlg* a : {&f.a1, &f.a2, &f.a3}) e += norm2(bracket((*a)[n], uz[n]));
    dens[n] = e;
    opabs[n] = std::sqrt(Ou[3 * n] * Ou[3 * n] + Ou[3 * n + 1] * Ou[3 * n + 1] + Ou[3 * n + 2] * Ou[3 * n + 2]);
  }
  double best = 0;
  for (const auto& q : sample_q) {
    double energy = 0, l1 = 0;
    for (int i = 1; i < g.n_t() - 1; ++i)
      for (int j = 1; j < g.n_z() - 1; ++j)
        for (int k = 1; k < g.n_z() - 1; ++k) {
          const std::size_t n = g.index(i, j, k);
          const HalfSpacePoint p{g.t(i), g.z(j, k)};
          const double G = green(q, p);
          const double w = g.volume_weight(i, j, k);
          energy += w * (1.0 + G) * dens[n];
          l1 += w * G * opabs[n];
        }
    best = std::max(best, energy + l1 * l1);
  }
  return std::sqrt(best);
}

}  // namespace kwflow
