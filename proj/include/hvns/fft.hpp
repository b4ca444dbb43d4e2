#pragma once

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <map>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include "hvns/field.hpp"

namespace hvns {

namespace detail {

/// FFTW plan pair for one (d, N). Plans are created once, under a lock
/// (the FFTW planner is not thread-safe), and executed through the
/// new-array interface, which is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

inline PlanPair plans_for(int d, int n) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, PlanPair> cache;
  std::lock_guard lock(mu);
  auto it = cache.find({d, n});
  if (it != cache.end()) return it->second;

  std::array<int, 3> dims{n, n, n};
  std::size_t real_size = 1;
  for (int a = 0; a < d; ++a) real_size *= static_cast<std::size_t>(n);
  const std::size_t complex_size = real_size / static_cast<std::size_t>(n) * static_cast<std::size_t>(n / 2 + 1);
  std::vector<double> r(real_size);
  std::vector<Complex> c(complex_size);
  auto* cp = reinterpret_cast<fftw_complex*>(c.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  PlanPair p;
  p.forward = fftw_plan_dft_r2c(d, dims.data(), r.data(), cp, flags);
  p.backward = fftw_plan_dft_c2r(d, dims.data(), cp, r.data(), flags);
  cache.emplace(std::make_pair(d, n), p);
  return p;
}

}  // namespace detail

/// Coefficients -> grid values for one scalar component.
inline void to_physical(const BoxSpec& box, std::span<const Complex> coeffs, std::span<double> out) {
  const auto plans = detail::plans_for(box.dim(), box.n());
  // multi-dimensional c2r overwrites its input
  std::vector<Complex> scratch(coeffs.begin(), coeffs.end());
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

/// Grid values -> normalized coefficients for one scalar component.
inline void to_spectral(const BoxSpec& box, std::span<const double> values, std::span<Complex> out) {
  const auto plans = detail::plans_for(box.dim(), box.n());
  std::vector<double> scratch(values.begin(), values.end());
  fftw_execute_dft_r2c(plans.forward, scratch.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / static_cast<double>(box.grid_points());
  for (auto& c : out) c *= scale;
}

inline PhysicalField to_physical(const SpectralField& u) {
  PhysicalField out(u.box(), u.components());
  for (int c = 0; c < u.components(); ++c) to_physical(u.box(), u.component(c), out.component(c));
  return out;
}

inline SpectralField to_spectral(const PhysicalField& p) {
  if (p.components() != p.box().dim()) {
    throw StructuralError("to_spectral: vector field needs " + std::to_string(p.box().dim()) + " components");
  }
  SpectralField out(p.box());
  for (int c = 0; c < p.components(); ++c) to_spectral(p.box(), p.component(c), out.component(c));
  return out;
}

/// Grid values of the partial derivative d/dx_axis of one component.
inline void derivative_to_physical(const SpectralField& u, int component, int axis, std::span<double> out) {
  const auto& lat = u.box().lattice();
  std::vector<Complex> scratch(lat.modes);
  const auto src = u.component(component);
  for (std::size_t m = 0; m < lat.modes; ++m) scratch[m] = Complex(0.0, lat.k[m][axis]) * src[m];
  const auto plans = detail::plans_for(u.box().dim(), u.box().n());
  fftw_execute_dft_c2r(plans.backward, reinterpret_cast<fftw_complex*>(scratch.data()), out.data());
}

}  // namespace hvns
