// Independent reference computations used only by the tests. Nothing here
// touches FFTW or the library's nonlinear kernels: fields are expanded into
// explicit (wavevector -> coefficient) maps and everything is summed directly.
#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <vector>

#include "hvns/field.hpp"

namespace oracle {

using hvns::Complex;
using Vec = std::array<Complex, 3>;
using Modes = std::map<hvns::WaveIndex, Vec>;

/// Every nonzero coefficient of the full lattice, conjugate modes included.
inline Modes full_modes(const hvns::SpectralField& u) {
  const auto& lat = u.box().lattice();
  const int d = u.components();
  Modes out;
  for (std::size_t m = 0; m < lat.modes; ++m) {
    Vec v{};
    bool any = false;
    for (int c = 0; c < d; ++c) {
      v[c] = u.at(c, m);
      any = any || v[c] != Complex{};
    }
    if (!any) continue;
    auto n = lat.index[m];
    out[n] = v;
    if (n[d - 1] > 0) {
      hvns::WaveIndex neg{};
      Vec cv{};
      for (int a = 0; a < d; ++a) neg[a] = -n[a];
      for (int c = 0; c < d; ++c) cv[c] = std::conj(v[c]);
      out[neg] = cv;
    }
  }
  return out;
}

/// Direct Fourier sum at a point.
inline std::array<double, 3> evaluate(const Modes& modes, int d, double length, const std::array<double, 3>& x) {
  const double k0 = 2.0 * std::numbers::pi / length;
  std::array<double, 3> out{};
  for (const auto& [n, v] : modes) {
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += k0 * n[a] * x[a];
    const Complex e(std::cos(phase), std::sin(phase));
    for (int c = 0; c < d; ++c) out[c] += (v[c] * e).real();
  }
  return out;
}

/// Gradient d_i u_j at a point by direct summation.
inline std::array<std::array<double, 3>, 3> gradient(const Modes& modes, int d, double length,
                                                      const std::array<double, 3>& x) {
  const double k0 = 2.0 * std::numbers::pi / length;
  std::array<std::array<double, 3>, 3> g{};
  for (const auto& [n, v] : modes) {
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += k0 * n[a] * x[a];
    const Complex e(std::cos(phase), std::sin(phase));
    for (int j = 0; j < d; ++j)
      for (int i = 0; i < d; ++i) g[j][i] += (Complex(0.0, k0 * n[i]) * v[j] * e).real();
  }
  return g;
}

/// Midpoint-rule quadrature of f(x) over the box on `m` points per side.
template <class F>
double quadrature(int d, double length, int m, F&& f) {
  const double h = length / m;
  double sum = 0.0;
  std::array<double, 3> x{};
  if (d == 2) {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        x = {i * h, j * h, 0.0};
        sum += f(x);
      }
  } else {
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) {
          x = {i * h, j * h, k * h};
          sum += f(x);
        }
  }
  return sum * std::pow(h, d);
}

/// b(u, v, w) by grid quadrature of directly summed fields.
inline double trilinear(const hvns::SpectralField& u, const hvns::SpectralField& v, const hvns::SpectralField& w,
                        int points) {
  const int d = u.components();
  const double L = u.box().length();
  const auto mu = full_modes(u), mv = full_modes(v), mw = full_modes(w);
  return quadrature(d, L, points, [&](const std::array<double, 3>& x) {
    const auto uu = evaluate(mu, d, L, x);
    const auto gv = gradient(mv, d, L, x);
    const auto ww = evaluate(mw, d, L, x);
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += uu[i] * gv[j][i] * ww[j];
    return s;
  });
}

/// Fourier coefficients of (u . grad) v by explicit convolution,
/// truncated to 3|n_a| < N and Leray-projected.
inline Modes projected_advection(const hvns::SpectralField& u, const hvns::SpectralField& v) {
  const int d = u.components();
  const int N = u.box().n();
  const double k0 = 2.0 * std::numbers::pi / u.box().length();
  const auto mu = full_modes(u), mv = full_modes(v);
  Modes out;
  for (const auto& [p, up] : mu) {
    for (const auto& [q, vq] : mv) {
      hvns::WaveIndex k{};
      bool keep = true;
      for (int a = 0; a < d; ++a) {
        k[a] = p[a] + q[a];
        if (3 * std::abs(k[a]) >= N) keep = false;
      }
      if (!keep) continue;
      Complex udotq{};
      for (int i = 0; i < d; ++i) udotq += up[i] * Complex(0.0, k0 * q[i]);
      auto& slot = out[k];
      for (int j = 0; j < d; ++j) slot[j] += udotq * vq[j];
    }
  }
  for (auto& [k, v] : out) {
    double k2 = 0.0;
    Complex dot{};
    for (int a = 0; a < d; ++a) {
      k2 += (k0 * k[a]) * (k0 * k[a]);
      dot += k0 * k[a] * v[a];
    }
    if (k2 == 0.0) {
      v = Vec{};
      continue;
    }
    for (int a = 0; a < d; ++a) v[a] -= k0 * k[a] * dot / k2;
  }
  return out;
}

/// max |a_k - b_k| over the union of both maps.
inline double max_difference(const Modes& a, const Modes& b, int d) {
  double worst = 0.0;
  auto visit = [&](const Modes& x, const Modes& y) {
    for (const auto& [k, v] : x) {
      auto it = y.find(k);
      for (int c = 0; c < d; ++c) {
        const Complex other = it == y.end() ? Complex{} : it->second[c];
        worst = std::max(worst, std::abs(v[c] - other));
      }
    }
  };
  visit(a, b);
  visit(b, a);
  return worst;
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration.
inline void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    x[i] = z;
    w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

// sqrt(int_0^T E0 (e^(-a t) - e^(-(a+delta) t))^2 dt), by composite Gauss-Legendre
// on the cancellation-free form e^(-a t) expm1(-delta t).
inline double single_mode_error(double energy0, double a, double delta, double T) {
  std::vector<double> x, w;
  gauss_legendre(12, x, w);
  const int panels = 200;
  const double h = T / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = h * (p + 0.5 * (x[i] + 1.0));
      const double g = std::exp(-a * t) * std::expm1(-delta * t);
      s += 0.5 * h * w[i] * g * g;
    }
  }
  return std::sqrt(energy0 * s);
}

}  // namespace oracle
