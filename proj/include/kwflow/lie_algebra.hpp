#pragma once
// su(2) / sl(2,C) arithmetic in the basis sigma_a = i * Pauli_a.
//
// With this choice sigma_1 sigma_2 = -sigma_3 (cyclic), sigma_a^2 = -1, and the
// basis is orthonormal for <x y> = -1/2 tr(xy).

#include <array>
#include <complex>

namespace kwflow {

using cplx = std::complex<double>;
inline constexpr cplx I_UNIT{0.0, 1.0};

struct AlgElement {
  std::array<cplx, 3> c{};

  AlgElement() = default;
  AlgElement(cplx c1, cplx c2, cplx c3) : c{c1, c2, c3} {}

  cplx& operator[](int a) { return c[a]; }
  const cplx& operator[](int a) const { return c[a]; }

  AlgElement& operator+=(const AlgElement& o) {
    for (int a = 0; a < 3; ++a) c[a] += o.c[a];
    return *this;
  }
  AlgElement& operator-=(const AlgElement& o) {
    for (int a = 0; a < 3; ++a) c[a] -= o.c[a];
    return *this;
  }
  AlgElement& operator*=(cplx s) {
    for (auto& v : c) v *= s;
    return *this;
  }

  static AlgElement basis(int a) {
    AlgElement e;
    e.c[a] = 1.0;
    return e;
  }
  bool is_real(double tol = 1e-10) const;
  AlgElement real_part() const { return {c[0].real(), c[1].real(), c[2].real()}; }
  AlgElement imag_part() const { return {c[0].imag(), c[1].imag(), c[2].imag()}; }
};

inline AlgElement operator+(AlgElement x, const AlgElement& y) { return x += y; }
inline AlgElement operator-(AlgElement x, const AlgElement& y) { return x -= y; }
inline AlgElement operator-(const AlgElement& x) { return {-x.c[0], -x.c[1], -x.c[2]}; }
inline AlgElement operator*(cplx s, AlgElement x) { return x *= s; }
inline AlgElement operator*(AlgElement x, cplx s) { return x *= s; }
inline AlgElement operator*(double s, AlgElement x) { return x *= cplx(s); }
inline AlgElement operator*(AlgElement x, double s) { return x *= cplx(s); }
inline AlgElement operator/(AlgElement x, cplx s) { return x *= (1.0 / s); }
inline AlgElement operator/(AlgElement x, double s) { return x *= cplx(1.0 / s); }

// Convenience constants.
inline const AlgElement SIGMA1{1.0, 0.0, 0.0};
inline const AlgElement SIGMA2{0.0, 1.0, 0.0};
inline const AlgElement SIGMA3{0.0, 0.0, 1.0};
// sigma_1 - i sigma_2 and sigma_1 + i sigma_2
inline const AlgElement E_PLUS{1.0, cplx(0.0, -1.0), 0.0};
inline const AlgElement E_MINUS{1.0, cplx(0.0, 1.0), 0.0};

AlgElement bracket(const AlgElement& x, const AlgElement& y);
cplx inner(const AlgElement& x, const AlgElement& y);  // <xy>, bilinear
AlgElement star(const AlgElement& x);                  // -x^dagger
double norm2(const AlgElement& x);                     // <x* x> = sum |c_a|^2
double norm(const AlgElement& x);

struct EigenParts {
  AlgElement plus;
  cplx diag;
  AlgElement minus;
};
// Decompose x relative to the unit su(2) element sigma into the +1 / -1
// eigenspaces of [i/2 sigma, .] and the sigma-line.
EigenParts eig_project(const AlgElement& sigma, const AlgElement& x);

struct GroupElement {
  // row-major 2x2
  std::array<cplx, 4> m{1.0, 0.0, 0.0, 1.0};

  GroupElement() = default;
  GroupElement(cplx a, cplx b, cplx c, cplx d) : m{a, b, c, d} {}

  static GroupElement identity() { return {}; }
  cplx det() const { return m[0] * m[3] - m[1] * m[2]; }
  cplx trace() const { return m[0] + m[3]; }
  GroupElement inverse() const;  // throws on singular
  GroupElement dagger() const;
  bool is_unitary(double tol = 1e-12) const;
  void renormalize();  // rescale to det = 1
};

GroupElement operator*(const GroupElement& a, const GroupElement& b);
GroupElement operator+(const GroupElement& a, const GroupElement& b);
GroupElement operator-(const GroupElement& a, const GroupElement& b);
GroupElement operator*(cplx s, const GroupElement& a);

// Matrix realization of an algebra element and back. from_matrix drops the
// identity component (use trace_part to inspect it).
GroupElement to_matrix(const AlgElement& x);
AlgElement from_matrix(const GroupElement& m);
cplx trace_part(const GroupElement& m);  // coefficient of the identity

AlgElement adjoint(const GroupElement& g, const AlgElement& x);
GroupElement exp_iu(const AlgElement& u, double ds);
GroupElement exp_alg(const AlgElement& x);  // exp of the matrix of x

// Unitary U with U sigma_3 U^-1 = sigma and U (sigma_1 - i sigma_2) U^-1 = e.
// Requires sigma real unit and e in L+(sigma) with |e| = sqrt 2. Defined up to
// overall sign.
GroupElement frame_unitary(const AlgElement& sigma, const AlgElement& e);
// Flip the sign of g if that brings it closer to ref (branch alignment).
GroupElement align_sign(const GroupElement& g, const GroupElement& ref);

double frobenius_distance(const GroupElement& a, const GroupElement& b);

}  // namespace kwflow
