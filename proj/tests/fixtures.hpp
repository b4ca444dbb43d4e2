// Small field builders shared by the test binaries.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "hvns/dynamics.hpp"

namespace fixtures {

using namespace hvns;

/// One real Fourier mode at n with amplitude along its first polarization.
inline SpectralField single_mode(const BoxSpec& box, WaveIndex n, double amplitude) {
  SpectralField u(box);
  const auto& lat = box.lattice();
  const auto loc = locate(box, n);
  const auto pols = polarizations(lat.k[loc.flat], box.dim());
  std::array<Complex, 3> a{};
  for (int c = 0; c < box.dim(); ++c) a[c] = Complex(0.5 * amplitude * pols[0][c], 0.1 * amplitude * pols[0][c]);
  add_real_mode(u, n, a);
  return u;
}

inline double max_abs_diff(const SpectralField& a, const SpectralField& b) {
  double e = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i) e = std::max(e, std::abs(a.raw()[i] - b.raw()[i]));
  return e;
}

inline SpectralField random_field(const BoxSpec& box, std::uint64_t seed) {
  return dealias(random_solenoidal(box, RandomSpectrum{1.0, 3.0, -1.0}, seed));
}

/// Random real field with no solenoidal constraint.
inline SpectralField random_unconstrained(const BoxSpec& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  SpectralField u(box);
  for (std::size_t m : canonical_modes(box)) {
    std::array<Complex, 3> a{};
    for (int c = 0; c < box.dim(); ++c) a[c] = Complex(g(rng), g(rng)) / (1.0 + box.lattice().k2[m]);
    add_real_mode(u, box.lattice().index[m], a);
  }
  return u;
}

inline std::vector<DiagnosticsRecord> run(const SimConfig& cfg) {
  std::vector<DiagnosticsRecord> out;
  simulate(cfg, [&](const DiagnosticsRecord& r) { out.push_back(r); });
  return out;
}

}  // namespace fixtures
