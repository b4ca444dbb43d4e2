#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "hvns/operators.hpp"

namespace hvns {

/// Flat half-spectrum index of the stored representative of n, and whether
/// the stored coefficient is the conjugate of the one at n.
struct StoredMode {
  std::size_t flat = 0;
  bool conjugated = false;
};

inline StoredMode locate(const BoxSpec& box, WaveIndex n) {
  const int d = box.dim();
  const int N = box.n();
  bool conj = false;
  if (n[d - 1] < 0) {
    for (int a = 0; a < d; ++a) n[a] = -n[a];
    conj = true;
  }
  for (int a = 0; a < d; ++a) {
    if (2 * std::abs(n[a]) > N) throw ContractError("locate: wavenumber outside the grid");
  }
  std::size_t flat = 0;
  for (int a = 0; a < d - 1; ++a) flat = flat * static_cast<std::size_t>(N) + static_cast<std::size_t>((n[a] % N + N) % N);
  flat = flat * box.lattice().half + static_cast<std::size_t>(n[d - 1]);
  return {flat, conj};
}

/// u += a e^{i k.x} + conj(a) e^{-i k.x}  (a real contribution).
inline void add_real_mode(SpectralField& u, WaveIndex n, const std::array<Complex, 3>& a) {
  const auto& lat = u.box().lattice();
  const int d = u.components();
  const auto loc = locate(u.box(), n);
  for (int c = 0; c < d; ++c) {
    const Complex v = loc.conjugated ? std::conj(a[c]) : a[c];
    u.at(c, loc.flat) += v;
    if (lat.index[loc.flat][d - 1] == 0) {
      const std::size_t p = lat.partner[loc.flat];
      if (p == loc.flat) {
        u.at(c, loc.flat) += std::conj(v);
      } else {
        u.at(c, p) += std::conj(v);
      }
    }
  }
}

/// Orthonormal polarizations perpendicular to k (d - 1 of them).
inline std::vector<std::array<double, 3>> polarizations(const std::array<double, 3>& k, int d) {
  std::vector<std::array<double, 3>> out;
  const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
  if (d == 2) {
    out.push_back({-k[1] / kn, k[0] / kn, 0.0});
    return out;
  }
  auto cross = [](const std::array<double, 3>& a, const std::array<double, 3>& b) {
    return std::array<double, 3>{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
  };
  auto normalized = [](std::array<double, 3> v) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (auto& x : v) x /= n;
    return v;
  };
  const std::array<double, 3> khat{k[0] / kn, k[1] / kn, k[2] / kn};
  std::array<double, 3> e1 = cross(khat, {0.0, 0.0, 1.0});
  if (std::abs(e1[0]) + std::abs(e1[1]) + std::abs(e1[2]) < 1e-12) e1 = cross(khat, {1.0, 0.0, 0.0});
  e1 = normalized(e1);
  out.push_back(e1);
  out.push_back(normalized(cross(khat, e1)));
  return out;
}

/// Stored modes that represent one member of each +-k pair inside the truncation.
inline std::vector<std::size_t> canonical_modes(const BoxSpec& box) {
  const auto& lat = box.lattice();
  const int d = box.dim();
  std::vector<std::size_t> out;
  for (std::size_t m = 1; m < lat.modes; ++m) {
    if (!lat.kept[m]) continue;
    if (lat.index[m][d - 1] == 0 && lat.partner[m] < m) continue;
    out.push_back(m);
  }
  return out;
}

/// Number of real solenoidal degrees of freedom retained by the truncation.
inline std::size_t solenoidal_dof(const BoxSpec& box) {
  return canonical_modes(box).size() * 2 * static_cast<std::size_t>(box.dim() - 1);
}

/// The first `count` L2-normalized real eigenfunctions of the Stokes operator,
/// ordered by eigenvalue (ties in storage order): for each wavevector and
/// polarization a, sqrt(2/|Omega|) a cos(k.x) followed by the sine partner.
inline std::vector<SpectralField> solenoidal_eigenmodes(const BoxSpec& box, std::size_t count) {
  const auto& lat = box.lattice();
  auto modes = canonical_modes(box);
  std::stable_sort(modes.begin(), modes.end(), [&](std::size_t a, std::size_t b) { return lat.k2[a] < lat.k2[b]; });
  const double c = std::sqrt(2.0 / box.volume());
  std::vector<SpectralField> out;
  for (std::size_t m : modes) {
    for (const auto& pol : polarizations(lat.k[m], box.dim())) {
      for (int phase = 0; phase < 2 && out.size() < count; ++phase) {
        SpectralField f(box);
        std::array<Complex, 3> a{};
        for (int i = 0; i < box.dim(); ++i) {
          a[i] = phase == 0 ? Complex(0.5 * c * pol[i], 0.0) : Complex(0.0, -0.5 * c * pol[i]);
        }
        add_real_mode(f, lat.index[m], a);
        out.push_back(std::move(f));
      }
      if (out.size() >= count) return out;
    }
  }
  if (out.size() < count) throw ContractError("solenoidal_eigenmodes: box resolves fewer modes than requested");
  return out;
}

/// Eigenvalues matching `solenoidal_eigenmodes`.
inline std::vector<double> stokes_eigenvalues(const BoxSpec& box, std::size_t count) {
  const auto& lat = box.lattice();
  auto modes = canonical_modes(box);
  std::vector<double> k2;
  for (std::size_t m : modes) k2.push_back(lat.k2[m]);
  std::sort(k2.begin(), k2.end());
  std::vector<double> out;
  const std::size_t per = 2 * static_cast<std::size_t>(box.dim() - 1);
  for (double v : k2) {
    for (std::size_t r = 0; r < per && out.size() < count; ++r) out.push_back(v);
    if (out.size() >= count) break;
  }
  return out;
}

/// Spectrum of the random solenoidal generator: |u_k| ~ |k|^-gamma exp(-|k|^2/kc^2).
struct RandomSpectrum {
  double gamma = 1.0;
  double kc = 4.0;
  /// When positive, the field is rescaled so that ||u||^2 equals this value.
  double energy = -1.0;
};

/// Reproducible random dealiased solenoidal zero-mean real field.
inline SpectralField random_solenoidal(const BoxSpec& box, const RandomSpectrum& spec, std::uint64_t seed) {
  const auto& lat = box.lattice();
  const int d = box.dim();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SpectralField u(box);
  for (std::size_t m : canonical_modes(box)) {
    const double kk = std::sqrt(lat.k2[m]);
    const double amp = std::pow(kk, -spec.gamma) * std::exp(-lat.k2[m] / (spec.kc * spec.kc)) / std::sqrt(2.0);
    std::array<Complex, 3> a{};
    for (int c = 0; c < d; ++c) {
      const double re = normal(rng);
      const double im = normal(rng);
      a[c] = amp * Complex(re, im);
    }
    add_real_mode(u, lat.index[m], a);
  }
  u = leray_project(std::move(u));
  if (spec.energy > 0.0) {
    const double e = sobolev_norm_squared(u, 0.0);
    if (e > 0.0) u *= std::sqrt(spec.energy / e);
  }
  return u;
}

}  // namespace hvns
