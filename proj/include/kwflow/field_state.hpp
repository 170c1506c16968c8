#pragma once
// Gauge fields on the truncated half-space grid: covariant calculus, curvature,
// the four equation residuals, weighted integrals, the (w, q) reconstruction
// and complex gauge transformations.

#include <optional>
#include <string>
#include <vector>

#include "kwflow/grid.hpp"
#include "kwflow/seed_params.hpp"

namespace kwflow {

struct GaugeField {
  HalfSpaceGrid grid;
  NodeAlg At, A1, A2;  // connection relative to the product connection
  NodeAlg a1, a2, a3;
  std::optional<SeedParams> seed;

  GaugeField() = default;
  explicit GaugeField(const HalfSpaceGrid& g);

  // phi = a1 - i a2; set_phi stores a1 = Re, a2 = -Im (coefficientwise)
  AlgElement phi(std::size_t n) const { return a1[n] - I_UNIT * a2[n]; }
  void set_phi(std::size_t n, const AlgElement& p) {
    a1[n] = p.real_part();
    a2[n] = -1.0 * p.imag_part();
  }
  NodeAlg phi_all() const;

  const NodeAlg& A(Dir d) const { return d == Dir::T ? At : (d == Dir::Z1 ? A1 : A2); }
  NodeAlg& A(Dir d) { return d == Dir::T ? At : (d == Dir::Z1 ? A1 : A2); }

  // Throws std::runtime_error naming the first offending node.
  void check_finite() const;
  double max_imaginary() const;  // largest imaginary coefficient over all six fields
};

// partial + [A_d, .]
NodeAlg cov_deriv(const GaugeField& f, const NodeAlg& target, Dir d);

struct Curvature {
  NodeAlg EA1, EA2, BA3;
};
Curvature curvature(const GaugeField& f);

struct ResidualFields {
  NodeAlg R1a, R1b, R2, R3, X;
  // pointwise magnitudes; |R1| combines both components
  NodeReal R1_abs, R2_abs, R3_abs, X_abs;
};
ResidualFields kw_residual_fields(const GaugeField& f);

struct NormPair {
  double l2 = 0, max = 0;
};
struct ResidualReport {
  NormPair R1, R2, R3, X;
  double X_weighted = 0;  // integral of (1 + t^2)|X|^2 over the interior
  std::vector<std::pair<double, double>> X_tail;  // (R, integral of |X|^2 over |z| > R)
  double first_three_max() const;
};
ResidualReport kw_residuals(const GaugeField& f, const std::vector<double>& tail_R = {});

enum class WeightKind { One, OnePlusT2, InvT2, OutsideRadius };
struct Weight {
  WeightKind kind = WeightKind::One;
  double R = 0;  // for OutsideRadius
};
// Trapezoid product rule. With interior_only the face nodes are dropped.
double weighted_integral(const HalfSpaceGrid& g, const NodeReal& values, Weight w = {},
                         bool interior_only = false);

// Interior L2 norm and max of a node-wise magnitude.
NormPair interior_norms(const HalfSpaceGrid& g, const NodeReal& values);

// Build (A, a) from w, q and the frame (sigma, ehat), ehat being the sqrt2-length
// L+ direction of phi. alpha = d_t w, A-hat from the flat frame connection,
// beta and b-hat from discrete covariant derivatives of q.
GaugeField wq_reconstruct(const HalfSpaceGrid& g, const NodeReal& w, const NodeAlg& q,
                          const NodeAlg& sigma, const NodeAlg& ehat);

// Complex gauge action: C_t = A_t - i a3 and C_zbar = A1 + i A2 transform as
// C -> g C g^-1 - dg g^-1, and phi -> g phi g^-1.
GaugeField sl2c_gauge_apply(const NodeGroup& g, const GaugeField& base);

// Node-wise d g g^-1 style connection of a frame field: returns C = -dG G^-1
// for direction d (G sign-aligned along the stencil).
NodeAlg frame_connection(const HalfSpaceGrid& grid, const NodeGroup& G, Dir d);

// Closed-form model solution sampled at the grid nodes.
GaugeField model_on_grid(int m, const HalfSpaceGrid& g);

// CSV snapshot: i_t,i_z1,i_z2 then 36 columns (At,A1,A2,a1,a2,a3) x (c1,c2,c3) x (re,im)
void write_snapshot(const std::string& path, const GaugeField& f);
GaugeField read_snapshot(const std::string& path, const HalfSpaceGrid& g);

}  // namespace kwflow
