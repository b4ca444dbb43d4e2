#pragma once

#include <vector>

#include "hvns/fft.hpp"
#include "hvns/operators.hpp"

namespace hvns {

/// Grid values of (u . grad) v, given u already on the grid.
inline PhysicalField advect_on_grid(const PhysicalField& u_grid, const SpectralField& v) {
  const BoxSpec& box = v.box();
  const int d = box.dim();
  const std::size_t pts = box.grid_points();
  PhysicalField g(box, d);
  std::vector<double> dv(pts);
  for (int j = 0; j < d; ++j) {
    auto gj = g.component(j);
    for (int i = 0; i < d; ++i) {
      derivative_to_physical(v, j, i, dv);
      const auto ui = u_grid.component(i);
      for (std::size_t p = 0; p < pts; ++p) gj[p] += ui[p] * dv[p];
    }
  }
  return g;
}

/// b(u, v, w) = sum_ij int u_i (d_i v_j) w_j dx by grid quadrature.
///
/// Exact for fields inside the 2/3 truncation: the triple product then has
/// no aliased contribution to the mean.
inline double trilinear_b(const SpectralField& u, const SpectralField& v, const SpectralField& w) {
  require_same_box(u.box(), v.box(), "trilinear_b");
  require_same_box(u.box(), w.box(), "trilinear_b");
  const PhysicalField ug = to_physical(u);
  const PhysicalField g = advect_on_grid(ug, v);
  const PhysicalField wg = to_physical(w);
  double sum = 0.0;
  for (int j = 0; j < u.components(); ++j) {
    const auto a = g.component(j);
    const auto b = wg.component(j);
    for (std::size_t p = 0; p < a.size(); ++p) sum += a[p] * b[p];
  }
  return sum * u.box().volume() / static_cast<double>(u.box().grid_points());
}

/// B(u, v): Leray projection of the dealiased product (u . grad) v.
inline SpectralField nonlinear_B(const SpectralField& u, const SpectralField& v) {
  require_same_box(u.box(), v.box(), "nonlinear_B");
  const PhysicalField g = advect_on_grid(to_physical(u), v);
  return leray_project(dealias(to_spectral(g)));
}

/// B(u, v) with u supplied on the grid (lets callers reuse one transform).
inline SpectralField nonlinear_B(const PhysicalField& u_grid, const SpectralField& v) {
  return leray_project(dealias(to_spectral(advect_on_grid(u_grid, v))));
}

/// A field together with its grid values and grid gradient, so that several
/// products against the same field share the inverse transforms.
struct GridState {
  PhysicalField value;
  std::vector<std::vector<double>> grad;  // grad[j * d + i] = d_i u_j

  explicit GridState(const SpectralField& u) : value(to_physical(u)) {
    const int d = u.components();
    grad.assign(static_cast<std::size_t>(d * d), std::vector<double>(u.box().grid_points()));
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) derivative_to_physical(u, j, i, grad[static_cast<std::size_t>(j * d + i)]);
  }

  int dim() const { return value.components(); }
  const std::vector<double>& d(int j, int i) const { return grad[static_cast<std::size_t>(j * dim() + i)]; }
};

/// -B(u, u).
inline SpectralField minus_self_advection(const GridState& u) {
  const int d = u.dim();
  const BoxSpec& box = u.value.box();
  PhysicalField g(box, d);
  for (int j = 0; j < d; ++j) {
    auto gj = g.component(j);
    for (int i = 0; i < d; ++i) {
      const auto ui = u.value.component(i);
      const auto& dij = u.d(j, i);
      for (std::size_t p = 0; p < gj.size(); ++p) gj[p] -= ui[p] * dij[p];
    }
  }
  return leray_project(dealias(to_spectral(g)));
}

/// -(B(u, U) + B(U, u)): the nonlinear part of the linearization around u.
inline SpectralField minus_linearized_advection(const GridState& u, const SpectralField& tangent) {
  const GridState t(tangent);
  const int d = u.dim();
  PhysicalField g(u.value.box(), d);
  for (int j = 0; j < d; ++j) {
    auto gj = g.component(j);
    for (int i = 0; i < d; ++i) {
      const auto ui = u.value.component(i);
      const auto ti = t.value.component(i);
      const auto& du = u.d(j, i);
      const auto& dt = t.d(j, i);
      for (std::size_t p = 0; p < gj.size(); ++p) gj[p] -= ui[p] * dt[p] + ti[p] * du[p];
    }
  }
  return leray_project(dealias(to_spectral(g)));
}

}  // namespace hvns
