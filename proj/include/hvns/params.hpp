#pragma once

#include <cmath>
#include <string>

#include "hvns/modes.hpp"

namespace hvns {

/// Coefficients of du/dt + eps A^l u + nu A u + B(u,u) = f.
struct PhysicalParams {
  double nu = 1.0;
  double eps = 0.0;
  double l = 2.0;
  SpectralField forcing;

  /// Per-mode decay rate nu |k|^2 + eps |k|^(2l).
  double decay_rate(double k2) const {
    if (k2 == 0.0) return 0.0;
    return nu * k2 + (eps == 0.0 ? 0.0 : eps * std::pow(k2, l));
  }

  void validate(const BoxSpec& box) const {
    std::string problems;
    if (!(nu > 0.0)) problems += "params.nu must be positive; ";
    if (!(eps >= 0.0)) problems += "params.eps must be non-negative; ";
    if (!(l >= 1.0)) problems += "params.l must be >= 1; ";
    if (!problems.empty()) throw ContractError(problems.substr(0, problems.size() - 2));
    if (!forcing.box().valid()) throw ContractError("params.forcing has no box");
    require_same_box(box, forcing.box(), "PhysicalParams");
    if (mean_magnitude(forcing) != 0.0) throw ContractError("params.forcing must have zero mean");
    if (divergence_defect(forcing) > 1e-12) throw ContractError("params.forcing must be solenoidal");
  }
};

inline PhysicalParams make_params(const BoxSpec& box, double nu, double eps, double l) {
  PhysicalParams p;
  p.nu = nu;
  p.eps = eps;
  p.l = l;
  p.forcing = SpectralField(box);
  return p;
}

/// Kolmogorov forcing  f = amplitude * sin(n x_2) e_1  (x_2 the second axis).
inline SpectralField kolmogorov_forcing(const BoxSpec& box, int wavenumber, double amplitude) {
  SpectralField f(box);
  // sin(n y) = (e^{iny} - e^{-iny}) / 2i  ->  coefficient -i/2 at +n
  add_real_mode(f, WaveIndex{0, wavenumber, 0}, {Complex(0.0, -0.5 * amplitude), Complex{}, Complex{}});
  return f;
}

/// L2 norm of the forcing (the ||f|| of every bound).
inline double forcing_norm(const PhysicalParams& p) { return sobolev_norm(p.forcing, 0.0); }

}  // namespace hvns
