#pragma once
// Truncated half-space (0,inf) x R^2: log-spaced t levels, uniform square z lattice.

#include <complex>
#include <cstddef>
#include <vector>

#include "kwflow/lie_algebra.hpp"

namespace kwflow {

enum class Dir { T = 0, Z1 = 1, Z2 = 2 };

struct GridSpec {
  double t_min = 0.02;
  double t_max = 8.0;
  int n_t = 33;
  double L = 6.0;
  int n_z = 64;
};

class HalfSpaceGrid {
 public:
  HalfSpaceGrid() : HalfSpaceGrid(GridSpec{}) {}
  explicit HalfSpaceGrid(const GridSpec& spec);

  const GridSpec& spec() const { return spec_; }
  int n_t() const { return spec_.n_t; }
  int n_z() const { return spec_.n_z; }
  std::size_t size() const { return static_cast<std::size_t>(spec_.n_t) * spec_.n_z * spec_.n_z; }
  int count(Dir d) const { return d == Dir::T ? spec_.n_t : spec_.n_z; }

  double dtau() const { return dtau_; }  // spacing in ln t
  double hz() const { return hz_; }
  double t(int i) const { return t_[i]; }
  double z1(int j) const { return -spec_.L + j * hz_; }
  double z2(int k) const { return -spec_.L + k * hz_; }
  std::complex<double> z(int j, int k) const { return {z1(j), z2(k)}; }

  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * spec_.n_z + j) * spec_.n_z + k;
  }
  void coords(std::size_t n, int& i, int& j, int& k) const {
    k = static_cast<int>(n % spec_.n_z);
    j = static_cast<int>((n / spec_.n_z) % spec_.n_z);
    i = static_cast<int>(n / (static_cast<std::size_t>(spec_.n_z) * spec_.n_z));
  }
  std::size_t stride(Dir d) const {
    switch (d) {
      case Dir::T: return static_cast<std::size_t>(spec_.n_z) * spec_.n_z;
      case Dir::Z1: return spec_.n_z;
      default: return 1;
    }
  }
  int coord(std::size_t n, Dir d) const {
    int i, j, k;
    coords(n, i, j, k);
    return d == Dir::T ? i : (d == Dir::Z1 ? j : k);
  }
  bool interior(int i, int j, int k) const {
    return i > 0 && i < spec_.n_t - 1 && j > 0 && j < spec_.n_z - 1 && k > 0 &&
           k < spec_.n_z - 1;
  }
  bool interior(std::size_t n) const {
    int i, j, k;
    coords(n, i, j, k);
    return interior(i, j, k);
  }

  // Trapezoid weights: their sum is exactly the box volume.
  double volume_weight(int i, int j, int k) const { return wt_[i] * wz_[j] * wz_[k]; }
  double volume_weight(std::size_t n) const {
    int i, j, k;
    coords(n, i, j, k);
    return volume_weight(i, j, k);
  }
  double volume() const;
  // Weights t_i * dtau * hz^2 used by the discrete inner product of the solver;
  // with them centred tau-differences are exactly antisymmetric.
  double solver_weight(int i) const { return t_[i] * dtau_ * hz_ * hz_; }

 private:
  GridSpec spec_;
  double dtau_, hz_;
  std::vector<double> t_, wt_, wz_;
};

using NodeAlg = std::vector<AlgElement>;
using NodeReal = std::vector<double>;
using NodeGroup = std::vector<GroupElement>;

// First derivative in direction d: centred in the interior (in tau for t, with
// d/dt = (1/t) d/dtau) and one-sided second order at the faces.
NodeAlg partial(const HalfSpaceGrid& g, const NodeAlg& f, Dir d);
NodeReal partial(const HalfSpaceGrid& g, const NodeReal& f, Dir d);
NodeGroup partial(const HalfSpaceGrid& g, const NodeGroup& f, Dir d);

// Derivative for fields that vanish on the faces (the flow generator): centred in
// the interior, and at a face the odd reflection through the face, i.e. the
// one-sided difference (f_inner - f_face)/h.
NodeAlg partial_dirichlet(const HalfSpaceGrid& g, const NodeAlg& f, Dir d);

}  // namespace kwflow
