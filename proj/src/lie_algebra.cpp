#include "kwflow/lie_algebra.hpp"

#include <cmath>
#include <stdexcept>

namespace kwflow {

bool AlgElement::is_real(double tol) const {
  for (const auto& v : c)
    if (std::abs(v.imag()) > tol) return false;
  return true;
}

// [sigma_a, sigma_b] = -2 eps_abc sigma_c, so [x,y] = -2 (x cross y).
AlgElement bracket(const AlgElement& x, const AlgElement& y) {
  return {-2.0 * (x[1] * y[2] - x[2] * y[1]), -2.0 * (x[2] * y[0] - x[0] * y[2]),
          -2.0 * (x[0] * y[1] - x[1] * y[0])};
}

cplx inner(const AlgElement& x, const AlgElement& y) {
  return x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
}

AlgElement star(const AlgElement& x) {
  return {std::conj(x[0]), std::conj(x[1]), std::conj(x[2])};
}

double norm2(const AlgElement& x) {
  return std::norm(x[0]) + std::norm(x[1]) + std::norm(x[2]);
}

double norm(const AlgElement& x) { return std::sqrt(norm2(x)); }

EigenParts eig_project(const AlgElement& sigma, const AlgElement& x) {
  if (!sigma.is_real(1e-12) || std::abs(norm(sigma) - 1.0) > 1e-10)
    throw std::invalid_argument("eig_project: sigma must be a unit su(2) element");
  EigenParts out;
  out.diag = inner(sigma, x);
  AlgElement perp = x - out.diag * sigma;
  // [i/2 sigma, y] = -i (sigma cross y)
  AlgElement rot = bracket(sigma, perp) * cplx(0.0, 0.5);
  out.plus = 0.5 * (perp + rot);
  out.minus = 0.5 * (perp - rot);
  return out;
}

GroupElement GroupElement::inverse() const {
  cplx d = det();
  if (std::abs(d) < 1e-300) throw std::domain_error("GroupElement: singular matrix");
  return {m[3] / d, -m[1] / d, -m[2] / d, m[0] / d};
}

GroupElement GroupElement::dagger() const {
  return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

bool GroupElement::is_unitary(double tol) const {
  GroupElement p = (*this) * dagger();
  return std::abs(p.m[0] - 1.0) < tol && std::abs(p.m[3] - 1.0) < tol &&
         std::abs(p.m[1]) < tol && std::abs(p.m[2]) < tol;
}

void GroupElement::renormalize() {
  cplx d = det();
  if (std::abs(d) < 1e-300) throw std::domain_error("GroupElement: singular matrix");
  cplx s = 1.0 / std::sqrt(d);
  for (auto& v : m) v *= s;
}

GroupElement operator*(const GroupElement& a, const GroupElement& b) {
  return {a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
          a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]};
}

GroupElement operator+(const GroupElement& a, const GroupElement& b) {
  return {a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]};
}

GroupElement operator-(const GroupElement& a, const GroupElement& b) {
  return {a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]};
}

GroupElement operator*(cplx s, const GroupElement& a) {
  return {s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]};
}

// sum c_a sigma_a = i [[c3, c1 - i c2], [c1 + i c2, -c3]]
GroupElement to_matrix(const AlgElement& x) {
  const cplx i = I_UNIT;
  return {i * x[2], i * (x[0] - i * x[1]), i * (x[0] + i * x[1]), -i * x[2]};
}

AlgElement from_matrix(const GroupElement& g) {
  // c_a = -1/2 tr(sigma_a M)
  const cplx i = I_UNIT;
  const auto& m = g.m;
  cplx c1 = -0.5 * i * (m[2] + m[1]);
  cplx c2 = -0.5 * (m[2] - m[1]);
  cplx c3 = -0.5 * i * (m[0] - m[3]);
  return {c1, c2, c3};
}

cplx trace_part(const GroupElement& g) { return 0.5 * g.trace(); }

AlgElement adjoint(const GroupElement& g, const AlgElement& x) {
  return from_matrix(g * to_matrix(x) * g.inverse());
}

// exp(M) for traceless M with M^2 = theta^2 * 1.
GroupElement exp_alg(const AlgElement& x) {
  // matrix of x squares to -(sum c_a^2) 1
  cplx theta2 = -(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
  cplx theta = std::sqrt(theta2);
  cplx ch, sh_over;
  if (std::abs(theta) < 1e-4) {
    ch = 1.0 + theta2 / 2.0 + theta2 * theta2 / 24.0 + theta2 * theta2 * theta2 / 720.0;
    sh_over = 1.0 + theta2 / 6.0 + theta2 * theta2 / 120.0 + theta2 * theta2 * theta2 / 5040.0;
  } else {
    ch = std::cosh(theta);
    sh_over = std::sinh(theta) / theta;
  }
  GroupElement m = to_matrix(x);
  return {ch + sh_over * m.m[0], sh_over * m.m[1], sh_over * m.m[2], ch + sh_over * m.m[3]};
}

GroupElement exp_iu(const AlgElement& u, double ds) { return exp_alg(cplx(0.0, ds) * u); }

GroupElement frame_unitary(const AlgElement& sigma, const AlgElement& e) {
  // Rotation R with columns R e1 = Re e, R e2 = -Im e, R e3 = sigma.
  double r[3][3];
  for (int a = 0; a < 3; ++a) {
    r[a][0] = e[a].real();
    r[a][1] = -e[a].imag();
    r[a][2] = sigma[a].real();
  }
  // Quaternion (w, v) of R; then U = w - v.sigma rotates x by R.
  double tr = r[0][0] + r[1][1] + r[2][2];
  double w, v0, v1, v2;
  if (tr > 0) {
    double s = 2.0 * std::sqrt(1.0 + tr);
    w = 0.25 * s;
    v0 = (r[2][1] - r[1][2]) / s;
    v1 = (r[0][2] - r[2][0]) / s;
    v2 = (r[1][0] - r[0][1]) / s;
  } else if (r[0][0] > r[1][1] && r[0][0] > r[2][2]) {
    double s = 2.0 * std::sqrt(1.0 + r[0][0] - r[1][1] - r[2][2]);
    w = (r[2][1] - r[1][2]) / s;
    v0 = 0.25 * s;
    v1 = (r[0][1] + r[1][0]) / s;
    v2 = (r[0][2] + r[2][0]) / s;
  } else if (r[1][1] > r[2][2]) {
    double s = 2.0 * std::sqrt(1.0 + r[1][1] - r[0][0] - r[2][2]);
    w = (r[0][2] - r[2][0]) / s;
    v0 = (r[0][1] + r[1][0]) / s;
    v1 = 0.25 * s;
    v2 = (r[1][2] + r[2][1]) / s;
  } else {
    double s = 2.0 * std::sqrt(1.0 + r[2][2] - r[0][0] - r[1][1]);
    w = (r[1][0] - r[0][1]) / s;
    v0 = (r[0][2] + r[2][0]) / s;
    v1 = (r[1][2] + r[2][1]) / s;
    v2 = 0.25 * s;
  }
  double n = std::sqrt(w * w + v0 * v0 + v1 * v1 + v2 * v2);
  w /= n;
  v0 /= n;
  v1 /= n;
  v2 /= n;
  GroupElement g = to_matrix(AlgElement{-v0, -v1, -v2});
  g.m[0] += w;
  g.m[3] += w;
  return g;
}

GroupElement align_sign(const GroupElement& g, const GroupElement& ref) {
  cplx ov = 0.0;
  for (int k = 0; k < 4; ++k) ov += std::conj(ref.m[k]) * g.m[k];
  if (ov.real() < 0) return cplx(-1.0) * g;
  return g;
}

double frobenius_distance(const GroupElement& a, const GroupElement& b) {
  double s = 0;
  for (int k = 0; k < 4; ++k) s += std::norm(a.m[k] - b.m[k]);
  return std::sqrt(s);
}

}  // namespace kwflow
