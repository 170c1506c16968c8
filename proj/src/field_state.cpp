#include "kwflow/field_state.hpp"

#include "kwflow/model_solutions.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kwflow {

GaugeField::GaugeField(const HalfSpaceGrid& g)
    : grid(g),
      At(g.size()),
      A1(g.size()),
      A2(g.size()),
      a1(g.size()),
      a2(g.size()),
      a3(g.size()) {}

NodeAlg GaugeField::phi_all() const {
  NodeAlg out(a1.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = phi(n);
  return out;
}

namespace {

bool finite(const AlgElement& x) {
  for (int a = 0; a < 3; ++a)
    if (!std::isfinite(x[a].real()) || !std::isfinite(x[a].imag())) return false;
  return true;
}

double max_imag(const NodeAlg& v) {
  double m = 0;
  for (const auto& x : v)
    for (int a = 0; a < 3; ++a) m = std::max(m, std::abs(x[a].imag()));
  return m;
}

}  // namespace

void GaugeField::check_finite() const {
  const NodeAlg* fields[] = {&At, &A1, &A2, &a1, &a2, &a3};
  const char* names[] = {"At", "A1", "A2", "a1", "a2", "a3"};
  for (int f = 0; f < 6; ++f) {
    for (std::size_t n = 0; n < fields[f]->size(); ++n) {
      if (!finite((*fields[f])[n])) {
        int i, j, k;
        grid.coords(n, i, j, k);
        std::ostringstream os;
        os << "non-finite " << names[f] << " at node (" << i << "," << j << "," << k << ")";
        throw std::runtime_error(os.str());
      }
    }
  }
}

double GaugeField::max_imaginary() const {
  return std::max({max_imag(At), max_imag(A1), max_imag(A2), max_imag(a1), max_imag(a2),
                   max_imag(a3)});
}

NodeAlg cov_deriv(const GaugeField& f, const NodeAlg& target, Dir d) {
  NodeAlg out = partial(f.grid, target, d);
  const NodeAlg& A = f.A(d);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(out.size()); ++n)
    out[n] += bracket(A[n], target[n]);
  return out;
}

Curvature curvature(const GaugeField& f) {
  const HalfSpaceGrid& g = f.grid;
  Curvature c;
  NodeAlg dtA1 = partial(g, f.A1, Dir::T), dtA2 = partial(g, f.A2, Dir::T);
  NodeAlg d1At = partial(g, f.At, Dir::Z1), d2At = partial(g, f.At, Dir::Z2);
  NodeAlg d1A2 = partial(g, f.A2, Dir::Z1), d2A1 = partial(g, f.A1, Dir::Z2);
  c.EA1.resize(g.size());
  c.EA2.resize(g.size());
  c.BA3.resize(g.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(g.size()); ++n) {
    c.EA1[n] = dtA1[n] - d1At[n] + bracket(f.At[n], f.A1[n]);
    c.EA2[n] = dtA2[n] - d2At[n] + bracket(f.At[n], f.A2[n]);
    c.BA3[n] = d1A2[n] - d2A1[n] + bracket(f.A1[n], f.A2[n]);
  }
  return c;
}

ResidualFields kw_residual_fields(const GaugeField& f) {
  const HalfSpaceGrid& g = f.grid;
  Curvature c = curvature(f);
  NodeAlg phi = f.phi_all();
  NodeAlg Dt_a3 = cov_deriv(f, f.a3, Dir::T);
  NodeAlg D1_a3 = cov_deriv(f, f.a3, Dir::Z1);
  NodeAlg D2_a3 = cov_deriv(f, f.a3, Dir::Z2);
  NodeAlg Dt_phi = cov_deriv(f, phi, Dir::T);
  NodeAlg D1_phi = cov_deriv(f, phi, Dir::Z1);
  NodeAlg D2_phi = cov_deriv(f, phi, Dir::Z2);
  ResidualFields r;
  const std::size_t N = g.size();
  r.R1a.resize(N);
  r.R1b.resize(N);
  r.R2.resize(N);
  r.R3.resize(N);
  r.X.resize(N);
  r.R1_abs.resize(N);
  r.R2_abs.resize(N);
  r.R3_abs.resize(N);
  r.X_abs.resize(N);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(N); ++n) {
    r.R1a[n] = c.EA1[n] - D2_a3[n];
    r.R1b[n] = c.EA2[n] + D1_a3[n];
    r.R2[n] = D1_phi[n] + I_UNIT * D2_phi[n];
    r.R3[n] = Dt_phi[n] - I_UNIT * bracket(f.a3[n], phi[n]);
    r.X[n] = Dt_a3[n] - c.BA3[n] - cplx(0.0, 0.5) * bracket(phi[n], star(phi[n]));
    r.R1_abs[n] = std::sqrt(norm2(r.R1a[n]) + norm2(r.R1b[n]));
    r.R2_abs[n] = norm(r.R2[n]);
    r.R3_abs[n] = norm(r.R3[n]);
    r.X_abs[n] = norm(r.X[n]);
  }
  return r;
}

double ResidualReport::first_three_max() const { return std::max({R1.max, R2.max, R3.max}); }

double weighted_integral(const HalfSpaceGrid& g, const NodeReal& values, Weight w,
                         bool interior_only) {
  if (values.size() != g.size()) throw std::invalid_argument("weighted_integral: size mismatch");
  double sum = 0;
  // fixed summation order for reproducibility
  for (int i = 0; i < g.n_t(); ++i) {
    const double t = g.t(i);
    double wt = 1.0;
    if (w.kind == WeightKind::OnePlusT2) wt = 1.0 + t * t;
    if (w.kind == WeightKind::InvT2) wt = 1.0 / (t * t);
    double level = 0;
    for (int j = 0; j < g.n_z(); ++j) {
      for (int k = 0; k < g.n_z(); ++k) {
        if (interior_only && !g.interior(i, j, k)) continue;
        if (w.kind == WeightKind::OutsideRadius && std::abs(g.z(j, k)) <= w.R) continue;
        level += g.volume_weight(i, j, k) * values[g.index(i, j, k)];
      }
    }
    sum += wt * level;
  }
  return sum;
}

NormPair interior_norms(const HalfSpaceGrid& g, const NodeReal& values) {
  NodeReal sq(values.size());
  NormPair p;
  for (std::size_t n = 0; n < values.size(); ++n) {
    sq[n] = values[n] * values[n];
    if (g.interior(n)) p.max = std::max(p.max, values[n]);
  }
  p.l2 = std::sqrt(weighted_integral(g, sq, {}, true));
  return p;
}

ResidualReport kw_residuals(const GaugeField& f, const std::vector<double>& tail_R) {
  ResidualFields r = kw_residual_fields(f);
  const HalfSpaceGrid& g = f.grid;
  ResidualReport rep;
  rep.R1 = interior_norms(g, r.R1_abs);
  rep.R2 = interior_norms(g, r.R2_abs);
  rep.R3 = interior_norms(g, r.R3_abs);
  rep.X = interior_norms(g, r.X_abs);
  NodeReal x2(g.size());
  for (std::size_t n = 0; n < x2.size(); ++n) x2[n] = r.X_abs[n] * r.X_abs[n];
  rep.X_weighted = weighted_integral(g, x2, {WeightKind::OnePlusT2, 0}, true);
  for (double R : tail_R)
    rep.X_tail.emplace_back(R, weighted_integral(g, x2, {WeightKind::OutsideRadius, R}, true));
  return rep;
}

NodeAlg frame_connection(const HalfSpaceGrid& grid, const NodeGroup& G, Dir d) {
  const int cnt = grid.count(d);
  const std::size_t s = grid.stride(d);
  const double h = d == Dir::T ? grid.dtau() : grid.hz();
  NodeAlg out(G.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(G.size()); ++idx) {
    const std::size_t n = static_cast<std::size_t>(idx);
    const int c = grid.coord(n, d);
    double scale = 1.0 / (2.0 * h);
    if (d == Dir::T) scale /= grid.t(c);
    auto at = [&](std::ptrdiff_t off) {
      return align_sign(G[static_cast<std::size_t>(static_cast<std::ptrdiff_t>(n) + off)], G[n]);
    };
    const std::ptrdiff_t ss = static_cast<std::ptrdiff_t>(s);
    GroupElement dG;
    if (c == 0)
      dG = cplx(-3.0) * G[n] + cplx(4.0) * at(ss) - at(2 * ss);
    else if (c == cnt - 1)
      dG = cplx(3.0) * G[n] - cplx(4.0) * at(-ss) + at(-2 * ss);
    else
      dG = at(ss) - at(-ss);
    out[n] = -scale * from_matrix(dG * G[n].inverse());
  }
  return out;
}

GaugeField wq_reconstruct(const HalfSpaceGrid& g, const NodeReal& w, const NodeAlg& q,
                          const NodeAlg& sigma, const NodeAlg& ehat) {
  const std::size_t N = g.size();
  if (w.size() != N || q.size() != N || sigma.size() != N || ehat.size() != N)
    throw std::invalid_argument("wq_reconstruct: size mismatch");
  for (std::size_t n = 0; n < N; ++n)
    if (!std::isfinite(w[n])) throw std::runtime_error("wq_reconstruct: non-finite w");
  NodeReal alpha = partial(g, w, Dir::T);
  NodeGroup G0(N);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t n = 0; n < static_cast<std::ptrdiff_t>(N); ++n)
    G0[n] = exp_alg(I_UNIT * w[n] * sigma[n]) * frame_unitary(sigma[n], ehat[n]);
  NodeAlg Ct = frame_connection(g, G0, Dir::T);
  NodeAlg C1 = frame_connection(g, G0, Dir::Z1);
  NodeAlg C2 = frame_connection(g, G0, Dir::Z2);

  GaugeField hat(g);
  for (std::size_t n = 0; n < N; ++n) {
    AlgElement Cz = C1[n] + I_UNIT * C2[n];
    hat.At[n] = Ct[n].real_part();
    hat.A1[n] = Cz.real_part();
    hat.A2[n] = Cz.imag_part();
  }
  NodeAlg Dtq = cov_deriv(hat, q, Dir::T);
  NodeAlg D1q = cov_deriv(hat, q, Dir::Z1);
  NodeAlg D2q = cov_deriv(hat, q, Dir::Z2);

  GaugeField out(g);
  for (std::size_t n = 0; n < N; ++n) {
    AlgElement beta = Dtq[n] - 2.0 * alpha[n] * q[n];
    AlgElement bhat = -I_UNIT * (D1q[n] + I_UNIT * D2q[n]);
    out.At[n] = hat.At[n] - I_UNIT * (beta - star(beta));
    out.A1[n] = hat.A1[n] + bhat + star(bhat);
    out.A2[n] = hat.A2[n] - I_UNIT * (bhat - star(bhat));
    out.a3[n] = alpha[n] * sigma[n] + beta + star(beta);
    out.set_phi(n, std::exp(2.0 * w[n]) / std::sqrt(2.0) * ehat[n]);
  }
  return out;
}

GaugeField sl2c_gauge_apply(const NodeGroup& g, const GaugeField& base) {
  const HalfSpaceGrid& grid = base.grid;
  const std::size_t N = grid.size();
  if (g.size() != N) throw std::invalid_argument("sl2c_gauge_apply: size mismatch");
  NodeGroup dt = partial(grid, g, Dir::T), d1 = partial(grid, g, Dir::Z1),
            d2 = partial(grid, g, Dir::Z2);
  GaugeField out(grid);
  out.seed = base.seed;
  for (std::size_t n = 0; n < N; ++n) {
    if (std::abs(g[n].det() - 1.0) > 1e-8)
      throw std::domain_error("sl2c_gauge_apply: det(g) != 1");
    GroupElement gi = g[n].inverse();
    AlgElement Ct = base.At[n] - I_UNIT * base.a3[n];
    AlgElement Cz = base.A1[n] + I_UNIT * base.A2[n];
    AlgElement nCt = adjoint(g[n], Ct) - from_matrix(dt[n] * gi);
    AlgElement nCz = adjoint(g[n], Cz) - from_matrix((d1[n] + I_UNIT * d2[n]) * gi);
    out.At[n] = nCt.real_part();
    out.a3[n] = -1.0 * nCt.imag_part();
    out.A1[n] = nCz.real_part();
    out.A2[n] = nCz.imag_part();
    out.set_phi(n, adjoint(g[n], base.phi(n)));
  }
  return out;
}

GaugeField model_on_grid(int m, const HalfSpaceGrid& g) {
  GaugeField f(g);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(g.size()); ++idx) {
    int i, j, k;
    g.coords(static_cast<std::size_t>(idx), i, j, k);
    ModelPoint p = model_fields(m, g.t(i), g.z(j, k));
    f.A1[idx] = p.A1;
    f.A2[idx] = p.A2;
    f.a3[idx] = p.a3;
    f.set_phi(static_cast<std::size_t>(idx), p.phi);
  }
  return f;
}

void write_snapshot(const std::string& path, const GaugeField& f) {
  std::FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot write " + path);
  const char* names[] = {"At", "A1", "A2", "a1", "a2", "a3"};
  std::fprintf(fp, "i_t,i_z1,i_z2");
  for (const char* nm : names)
    for (int a = 1; a <= 3; ++a) std::fprintf(fp, ",%s_c%d_re,%s_c%d_im", nm, a, nm, a);
  std::fprintf(fp, "\n");
  const NodeAlg* fields[] = {&f.At, &f.A1, &f.A2, &f.a1, &f.a2, &f.a3};
  for (std::size_t n = 0; n < f.grid.size(); ++n) {
    int i, j, k;
    f.grid.coords(n, i, j, k);
    std::fprintf(fp, "%d,%d,%d", i, j, k);
    for (const NodeAlg* fld : fields)
      for (int a = 0; a < 3; ++a)
        std::fprintf(fp, ",%.17g,%.17g", (*fld)[n][a].real(), (*fld)[n][a].imag());
    std::fprintf(fp, "\n");
  }
  std::fclose(fp);
}

GaugeField read_snapshot(const std::string& path, const HalfSpaceGrid& g) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  std::getline(in, line);
  GaugeField f(g);
  NodeAlg* fields[] = {&f.At, &f.A1, &f.A2, &f.a1, &f.a2, &f.a3};
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != 39) throw std::runtime_error("snapshot: bad row width in " + path);
    int i = static_cast<int>(v[0]), j = static_cast<int>(v[1]), k = static_cast<int>(v[2]);
    if (i < 0 || i >= g.n_t() || j < 0 || j >= g.n_z() || k < 0 || k >= g.n_z())
      throw std::runtime_error("snapshot: node index outside grid");
    std::size_t n = g.index(i, j, k);
    for (int fl = 0; fl < 6; ++fl)
      for (int a = 0; a < 3; ++a) (*fields[fl])[n][a] = cplx(v[3 + 6 * fl + 2 * a], v[4 + 6 * fl + 2 * a]);
    ++rows;
  }
  if (rows != g.size()) throw std::runtime_error("snapshot: row count does not match grid");
  return f;
}

}  // namespace kwflow
