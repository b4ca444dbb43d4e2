#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hvns/errors.hpp"

namespace hvns {

/// Weights (in units of h) of the fourth-order Gregory rule on n uniformly
/// spaced samples: the trapezoid rule with end corrections 3/8, 7/6, 23/24.
/// Short series fall back to the closed Newton-Cotes rule of matching size.
inline std::vector<double> gregory_weights(std::size_t n) {
  std::vector<double> w(n, 1.0);
  switch (n) {
    case 0:
    case 1:
      std::fill(w.begin(), w.end(), 0.0);
      return w;
    case 2:
      return {0.5, 0.5};
    case 3:
      return {1.0 / 3, 4.0 / 3, 1.0 / 3};
    case 4:
      return {3.0 / 8, 9.0 / 8, 9.0 / 8, 3.0 / 8};
    case 5:
      return {14.0 / 45, 64.0 / 45, 24.0 / 45, 64.0 / 45, 14.0 / 45};
    default:
      break;
  }
  const double ends[3] = {3.0 / 8, 7.0 / 6, 23.0 / 24};
  for (std::size_t i = 0; i < 3; ++i) {
    w[i] = ends[i];
    w[n - 1 - i] = ends[i];
  }
  return w;
}

/// int y dt over uniformly spaced samples with spacing h.
inline double integrate_uniform(double h, std::span<const double> y) {
  const auto w = gregory_weights(y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
  return s * h;
}

/// Trapezoid rule on arbitrary sample times.
inline double trapezoid(std::span<const double> t, std::span<const double> y) {
  if (t.size() != y.size()) throw StructuralError("trapezoid: sample count mismatch");
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (y[i] + y[i - 1]);
  return s;
}

/// True when the sample times are uniform to a relative 1e-9.
inline bool is_uniform(std::span<const double> t) {
  if (t.size() < 3) return true;
  const double h = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (std::abs(t[i] - t[i - 1] - h) > 1e-9 * std::abs(h)) return false;
  }
  return true;
}

/// int over [t[i-1], t[i]] of the cubic through the (up to) four nearest
/// samples, evaluated by two-point Gauss-Legendre (exact for cubics).
inline double local_cubic_integral(std::span<const double> t, std::span<const double> y, std::size_t i) {
  const std::size_t n = t.size();
  if (n < 2 || i == 0 || i >= n) throw ContractError("local_cubic_integral: bad interval");
  std::size_t lo = i >= 2 ? i - 2 : 0;
  std::size_t hi = std::min(n - 1, lo + 3);
  if (hi - lo < 3 && n >= 4) lo = hi - 3;
  const double a = t[i - 1], b = t[i];
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  const double g = half / std::sqrt(3.0);
  double s = 0.0;
  for (const double x : {mid - g, mid + g}) {
    double p = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) {
      double basis = 1.0;
      for (std::size_t k = lo; k <= hi; ++k) {
        if (k != j) basis *= (x - t[k]) / (t[j] - t[k]);
      }
      p += basis * y[j];
    }
    s += p;
  }
  return s * half;
}

/// Mean and standard error of the mean from contiguous batch means.
struct MeanEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
  std::size_t samples = 0;
};

inline MeanEstimate batch_means(std::span<const double> x, std::size_t batches = 10) {
  MeanEstimate r;
  r.samples = x.size();
  if (x.empty()) return r;
  double s = 0.0;
  for (double v : x) s += v;
  r.mean = s / static_cast<double>(x.size());
  batches = std::min(batches, x.size());
  if (batches < 2) return r;
  const std::size_t per = x.size() / batches;
  std::vector<double> means;
  for (std::size_t b = 0; b < batches; ++b) {
    double m = 0.0;
    for (std::size_t i = b * per; i < (b + 1) * per; ++i) m += x[i];
    means.push_back(m / static_cast<double>(per));
  }
  double mm = 0.0;
  for (double m : means) mm += m;
  mm /= static_cast<double>(batches);
  double var = 0.0;
  for (double m : means) var += (m - mm) * (m - mm);
  var /= static_cast<double>(batches - 1);
  r.standard_error = std::sqrt(var / static_cast<double>(batches));
  return r;
}

/// Least-squares slope and intercept of y against x, with the RMS residual.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double rms_residual = 0.0;
};

inline LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() != y.size() || x.size() < 2) throw ContractError("fit_line: need at least two paired points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  LineFit f;
  const double den = n * sxx - sx * sx;
  if (den == 0.0) throw ContractError("fit_line: abscissae are all equal");
  f.slope = (n * sxy - sx * sy) / den;
  f.intercept = (sy - f.slope * sx) / n;
  double r = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double e = y[i] - (f.intercept + f.slope * x[i]);
    r += e * e;
  }
  f.rms_residual = std::sqrt(r / n);
  return f;
}

}  // namespace hvns
