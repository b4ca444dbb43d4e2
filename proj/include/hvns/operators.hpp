#pragma once

#include <algorithm>
#include <cmath>

#include "hvns/field.hpp"

namespace hvns {

/// Zero every mode outside the 2/3 truncation, the Nyquist planes and the mean.
inline SpectralField dealias(SpectralField u) {
  const auto& lat = u.box().lattice();
  for (int c = 0; c < u.components(); ++c) {
    auto a = u.component(c);
    for (std::size_t m = 0; m < lat.modes; ++m) {
      if (!lat.kept[m] || m == 0) a[m] = Complex{};
    }
  }
  return u;
}

/// Leray projection, mode-wise (I - k k^T / |k|^2) u_k; the mean is removed.
inline SpectralField leray_project(SpectralField u) {
  const auto& lat = u.box().lattice();
  const int d = u.components();
  for (std::size_t m = 0; m < lat.modes; ++m) {
    if (lat.k2[m] == 0.0) {
      for (int c = 0; c < d; ++c) u.at(c, m) = Complex{};
      continue;
    }
    Complex dot{};
    for (int c = 0; c < d; ++c) dot += lat.k[m][c] * u.at(c, m);
    dot /= lat.k2[m];
    for (int c = 0; c < d; ++c) u.at(c, m) -= lat.k[m][c] * dot;
  }
  return u;
}

/// A^s u: multiply mode k by |k|^(2s). s = 0 is the identity.
inline SpectralField apply_stokes_power(SpectralField u, double s) {
  if (s < 0.0) throw ContractError("apply_stokes_power: exponent must be >= 0");
  if (s == 0.0) return u;
  const auto& lat = u.box().lattice();
  for (std::size_t m = 0; m < lat.modes; ++m) {
    const double f = std::pow(lat.k2[m], s);
    for (int c = 0; c < u.components(); ++c) u.at(c, m) *= f;
  }
  return u;
}

/// ||u||_s^2 = |Omega| * sum_k |k|^(2s) |u_k|^2. s = 0 is the L2 norm squared,
/// s = 1 the Dirichlet norm ||grad u||^2, s = 2 is ||A u||^2.
inline double sobolev_norm_squared(const SpectralField& u, double s) {
  const auto& lat = u.box().lattice();
  double sum = 0.0;
  for (std::size_t m = 0; m < lat.modes; ++m) {
    if (lat.k2[m] == 0.0 && s != 0.0) continue;
    double amp = 0.0;
    for (int c = 0; c < u.components(); ++c) amp += std::norm(u.at(c, m));
    if (amp == 0.0) continue;
    const double f = s == 0.0 ? 1.0 : std::pow(lat.k2[m], s);
    sum += lat.weight[m] * f * amp;
  }
  return sum * u.box().volume();
}

inline double sobolev_norm(const SpectralField& u, double s) { return std::sqrt(sobolev_norm_squared(u, s)); }

/// max_k |k . u_k| / max_k |k| |u_k|; zero for a solenoidal field.
inline double divergence_defect(const SpectralField& u) {
  const auto& lat = u.box().lattice();
  double worst = 0.0;
  double scale = 0.0;
  for (std::size_t m = 0; m < lat.modes; ++m) {
    Complex dot{};
    double amp = 0.0;
    for (int c = 0; c < u.components(); ++c) {
      dot += lat.k[m][c] * u.at(c, m);
      amp += std::norm(u.at(c, m));
    }
    worst = std::max(worst, std::abs(dot));
    scale = std::max(scale, std::sqrt(lat.k2[m] * amp));
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

/// Largest |u_k - conj(u_{-k})| on the self-conjugate plane, relative to the
/// largest coefficient.
inline double hermitian_defect(const SpectralField& u) {
  const auto& lat = u.box().lattice();
  const int d = u.components();
  double worst = 0.0;
  double scale = 0.0;
  for (int c = 0; c < d; ++c) {
    const auto a = u.component(c);
    for (std::size_t m = 0; m < lat.modes; ++m) {
      scale = std::max(scale, std::abs(a[m]));
      if (lat.index[m][d - 1] != 0) continue;
      worst = std::max(worst, std::abs(a[m] - std::conj(a[lat.partner[m]])));
    }
  }
  return scale == 0.0 ? 0.0 : worst / scale;
}

/// Make the self-conjugate plane exactly Hermitian by averaging each pair.
inline SpectralField enforce_hermitian(SpectralField u) {
  const auto& lat = u.box().lattice();
  const int d = u.components();
  for (int c = 0; c < d; ++c) {
    auto a = u.component(c);
    for (std::size_t m = 0; m < lat.modes; ++m) {
      if (lat.index[m][d - 1] != 0) continue;
      const std::size_t p = lat.partner[m];
      if (p == m) {
        a[m] = Complex(a[m].real(), 0.0);
      } else if (p > m) {
        const Complex avg = 0.5 * (a[m] + std::conj(a[p]));
        a[m] = avg;
        a[p] = std::conj(avg);
      }
    }
  }
  return u;
}

/// Mean coefficient magnitude (should be exactly zero for admissible fields).
inline double mean_magnitude(const SpectralField& u) {
  double s = 0.0;
  for (int c = 0; c < u.components(); ++c) s += std::norm(u.at(c, 0));
  return std::sqrt(s);
}

}  // namespace hvns
