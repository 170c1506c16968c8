#include "kwflow/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace kwflow {

HalfSpaceGrid::HalfSpaceGrid(const GridSpec& spec) : spec_(spec) {
  if (!(spec.t_min > 0) || !(spec.t_max > spec.t_min))
    throw std::invalid_argument("grid: need 0 < t_min < t_max");
  if (spec.n_t < 3 || spec.n_z < 3) throw std::invalid_argument("grid: need at least 3 levels per direction");
  if (!(spec.L > 0)) throw std::invalid_argument("grid: need L > 0");
  dtau_ = std::log(spec.t_max / spec.t_min) / (spec.n_t - 1);
  hz_ = 2.0 * spec.L / (spec.n_z - 1);
  t_.resize(spec.n_t);
  for (int i = 0; i < spec.n_t; ++i) t_[i] = spec.t_min * std::exp(i * dtau_);
  t_.back() = spec.t_max;
  wt_.assign(spec.n_t, 0.0);
  for (int i = 0; i + 1 < spec.n_t; ++i) {
    double d = 0.5 * (t_[i + 1] - t_[i]);
    wt_[i] += d;
    wt_[i + 1] += d;
  }
  wz_.assign(spec.n_z, hz_);
  wz_.front() = wz_.back() = 0.5 * hz_;
}

double HalfSpaceGrid::volume() const {
  return (spec_.t_max - spec_.t_min) * 4.0 * spec_.L * spec_.L;
}

namespace {

template <class V>
std::vector<V> partial_impl(const HalfSpaceGrid& g, const std::vector<V>& f, Dir d) {
  if (f.size() != g.size()) throw std::invalid_argument("partial: size mismatch");
  const int n = g.count(d);
  const std::ptrdiff_t s = static_cast<std::ptrdiff_t>(g.stride(d));
  const double h = d == Dir::T ? g.dtau() : g.hz();
  std::vector<V> out(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(f.size()); ++idx) {
    const std::size_t node = static_cast<std::size_t>(idx);
    const int c = g.coord(node, d);
    double scale = 1.0 / (2.0 * h);
    if (d == Dir::T) scale /= g.t(c);
    V v;
    if (c == 0)
      v = -3.0 * f[node] + 4.0 * f[node + s] - f[node + 2 * s];
    else if (c == n - 1)
      v = 3.0 * f[node] - 4.0 * f[node - s] + f[node - 2 * s];
    else
      v = f[node + s] - f[node - s];
    out[node] = scale * v;
  }
  return out;
}

}  // namespace

NodeAlg partial(const HalfSpaceGrid& g, const NodeAlg& f, Dir d) { return partial_impl(g, f, d); }

NodeReal partial(const HalfSpaceGrid& g, const NodeReal& f, Dir d) { return partial_impl(g, f, d); }

NodeGroup partial(const HalfSpaceGrid& g, const NodeGroup& f, Dir d) {
  if (f.size() != g.size()) throw std::invalid_argument("partial: size mismatch");
  const int n = g.count(d);
  const std::size_t s = g.stride(d);
  const double h = d == Dir::T ? g.dtau() : g.hz();
  NodeGroup out(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(f.size()); ++idx) {
    const std::size_t node = static_cast<std::size_t>(idx);
    const int c = g.coord(node, d);
    double scale = 1.0 / (2.0 * h);
    if (d == Dir::T) scale /= g.t(c);
    GroupElement v;
    if (c == 0)
      v = cplx(-3.0) * f[node] + cplx(4.0) * f[node + s] - f[node + 2 * s];
    else if (c == n - 1)
      v = cplx(3.0) * f[node] - cplx(4.0) * f[node - s] + f[node - 2 * s];
    else
      v = f[node + s] - f[node - s];
    out[node] = cplx(scale) * v;
  }
  return out;
}

NodeAlg partial_dirichlet(const HalfSpaceGrid& g, const NodeAlg& f, Dir d) {
  if (f.size() != g.size()) throw std::invalid_argument("partial: size mismatch");
  const int n = g.count(d);
  const std::size_t s = g.stride(d);
  const double h = d == Dir::T ? g.dtau() : g.hz();
  NodeAlg out(f.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(f.size()); ++idx) {
    const std::size_t node = static_cast<std::size_t>(idx);
    const int c = g.coord(node, d);
    double scale = 1.0 / (2.0 * h);
    if (d == Dir::T) scale /= g.t(c);
    if (c == 0)
      out[node] = (2.0 * scale) * (f[node + s] - f[node]);
    else if (c == n - 1)
      out[node] = (2.0 * scale) * (f[node] - f[node - s]);
    else
      out[node] = scale * (f[node + s] - f[node - s]);
  }
  return out;
}

}  // namespace kwflow
