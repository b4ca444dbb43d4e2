#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "hvns/box.hpp"
#include "hvns/errors.hpp"

namespace hvns {

using Complex = std::complex<double>;

/// Truncated Fourier coefficients of a real d-vector field on a periodic box.
///
/// Coefficients are the continuous Fourier-series coefficients, so that
/// Parseval reads  int |u|^2 dx = |Omega| * sum_k |u_k|^2  (the sum running
/// over the full lattice). Storage is component-major, each component laid
/// out in the half-spectrum order described in `Lattice`.
class SpectralField {
 public:
  SpectralField() = default;

  explicit SpectralField(const BoxSpec& box)
      : box_(box), data_(static_cast<std::size_t>(box.dim()) * box.modes()) {}

  SpectralField(const BoxSpec& box, std::vector<Complex> coeffs) : box_(box), data_(std::move(coeffs)) {
    if (data_.size() != static_cast<std::size_t>(box.dim()) * box.modes()) {
      throw StructuralError("SpectralField: " + std::to_string(data_.size()) +
                            " coefficients do not match box " + box.describe());
    }
  }

  const BoxSpec& box() const { return box_; }
  int components() const { return box_.dim(); }
  std::size_t modes() const { return box_.modes(); }

  std::span<Complex> component(int c) { return {data_.data() + offset(c), modes()}; }
  std::span<const Complex> component(int c) const { return {data_.data() + offset(c), modes()}; }

  Complex& at(int c, std::size_t m) { return data_[offset(c) + m]; }
  const Complex& at(int c, std::size_t m) const { return data_[offset(c) + m]; }

  std::span<Complex> raw() { return data_; }
  std::span<const Complex> raw() const { return data_; }

  SpectralField& operator+=(const SpectralField& o) {
    require_same_box(box_, o.box_, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  SpectralField& operator-=(const SpectralField& o) {
    require_same_box(box_, o.box_, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
    return *this;
  }
  SpectralField& operator*=(double s) {
    for (auto& c : data_) c *= s;
    return *this;
  }
  /// this += a * x
  SpectralField& axpy(double a, const SpectralField& x) {
    require_same_box(box_, x.box_, "axpy");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += a * x.data_[i];
    return *this;
  }

  friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
  friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
  friend SpectralField operator*(double s, SpectralField a) { return a *= s; }

  void set_zero() { std::fill(data_.begin(), data_.end(), Complex{}); }

 private:
  std::size_t offset(int c) const { return static_cast<std::size_t>(c) * modes(); }

  BoxSpec box_;
  std::vector<Complex> data_;
};

/// Grid samples of a real d-vector (or scalar) field, component-major,
/// row-major over the N^d grid.
class PhysicalField {
 public:
  PhysicalField() = default;
  PhysicalField(const BoxSpec& box, int components)
      : box_(box), components_(components), data_(static_cast<std::size_t>(components) * box.grid_points()) {}

  const BoxSpec& box() const { return box_; }
  int components() const { return components_; }
  std::size_t points() const { return box_.grid_points(); }

  std::span<double> component(int c) { return {data_.data() + static_cast<std::size_t>(c) * points(), points()}; }
  std::span<const double> component(int c) const {
    return {data_.data() + static_cast<std::size_t>(c) * points(), points()};
  }

  /// Pointwise Euclidean magnitude maximum.
  double max_magnitude() const {
    double best = 0.0;
    for (std::size_t p = 0; p < points(); ++p) {
      double s = 0.0;
      for (int c = 0; c < components_; ++c) {
        const double v = data_[static_cast<std::size_t>(c) * points() + p];
        s += v * v;
      }
      best = std::max(best, s);
    }
    return std::sqrt(best);
  }

 private:
  BoxSpec box_;
  int components_ = 0;
  std::vector<double> data_;
};

/// L2(Omega) inner product of two real fields from their coefficients.
inline double inner(const SpectralField& u, const SpectralField& v) {
  require_same_box(u.box(), v.box(), "inner");
  const auto& lat = u.box().lattice();
  double sum = 0.0;
  for (int c = 0; c < u.components(); ++c) {
    const auto a = u.component(c);
    const auto b = v.component(c);
    for (std::size_t m = 0; m < lat.modes; ++m) {
      sum += lat.weight[m] * (a[m].real() * b[m].real() + a[m].imag() * b[m].imag());
    }
  }
  return sum * u.box().volume();
}

/// Largest coefficient magnitude and the |k| at which it sits.
struct CoefficientPeak {
  double magnitude = 0.0;
  double k = 0.0;
  bool finite = true;
};

inline CoefficientPeak coefficient_peak(const SpectralField& u) {
  CoefficientPeak peak;
  const auto& lat = u.box().lattice();
  for (int c = 0; c < u.components(); ++c) {
    const auto a = u.component(c);
    for (std::size_t m = 0; m < lat.modes; ++m) {
      const double mag = std::abs(a[m]);
      if (!std::isfinite(mag)) {
        if (peak.finite) peak.k = std::sqrt(lat.k2[m]);
        peak.finite = false;
        peak.magnitude = mag;
        continue;
      }
      if (peak.finite && mag > peak.magnitude) {
        peak.magnitude = mag;
        peak.k = std::sqrt(lat.k2[m]);
      }
    }
  }
  return peak;
}

}  // namespace hvns
