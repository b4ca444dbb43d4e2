#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

#include "hvns/errors.hpp"

namespace hvns {

/// Integer wavenumber n (k = 2*pi/L * n). Unused trailing entries are 0.
using WaveIndex = std::array<int, 3>;

/// Precomputed per-mode tables for the half-spectrum layout.
///
/// Coefficients are stored like an FFTW r2c output: the first d-1 axes
/// run over all N indices (wrapped to negative wavenumbers above N/2), the
/// last axis over 0..N/2 only. Modes with negative last wavenumber are
/// implied by Hermitian symmetry.
struct Lattice {
  int d = 0;
  int n = 0;
  double length = 0.0;
  std::size_t half = 0;      // N/2 + 1
  std::size_t modes = 0;     // N^(d-1) * (N/2+1)
  std::vector<WaveIndex> index;
  std::vector<std::array<double, 3>> k;
  std::vector<double> k2;
  std::vector<double> weight;       // 2 for implied-conjugate modes, else 1
  std::vector<unsigned char> kept;  // inside the 2/3 truncation, not Nyquist
  std::vector<std::size_t> partner; // flat index of -n on the last==0 plane
};

namespace detail {

inline int wrap(std::size_t i, int n) {
  const int ii = static_cast<int>(i);
  return ii <= n / 2 ? ii : ii - n;
}

inline std::shared_ptr<const Lattice> build_lattice(int d, int n, double length) {
  auto lat = std::make_shared<Lattice>();
  lat->d = d;
  lat->n = n;
  lat->length = length;
  lat->half = static_cast<std::size_t>(n / 2 + 1);
  std::size_t lead = 1;
  for (int a = 0; a < d - 1; ++a) lead *= static_cast<std::size_t>(n);
  lat->modes = lead * lat->half;
  lat->index.resize(lat->modes);
  lat->k.resize(lat->modes);
  lat->k2.resize(lat->modes);
  lat->weight.resize(lat->modes);
  lat->kept.resize(lat->modes);
  lat->partner.resize(lat->modes);

  const double k0 = 2.0 * std::numbers::pi / length;
  const auto un = static_cast<std::size_t>(n);
  for (std::size_t m = 0; m < lat->modes; ++m) {
    WaveIndex w{0, 0, 0};
    const std::size_t last = m % lat->half;
    std::size_t rest = m / lat->half;
    w[d - 1] = static_cast<int>(last);
    for (int a = d - 2; a >= 0; --a) {
      w[a] = wrap(rest % un, n);
      rest /= un;
    }
    lat->index[m] = w;
    double sum = 0.0;
    bool nyquist = false;
    bool inside = true;
    for (int a = 0; a < d && a < 3; ++a) {
      lat->k[m][a] = k0 * w[a];
      sum += lat->k[m][a] * lat->k[m][a];
      if (std::abs(w[a]) == n / 2) nyquist = true;
      // strict 3|n| < N keeps quadratic products alias-free even when 3 | N
      if (3 * std::abs(w[a]) >= n) inside = false;
    }
    lat->k2[m] = sum;
    lat->kept[m] = (!nyquist && inside) ? 1 : 0;
    lat->weight[m] = (w[d - 1] == 0 || w[d - 1] == n / 2) ? 1.0 : 2.0;

    // partner of -n (only meaningful when the last index is 0)
    std::size_t flat = 0;
    for (int a = 0; a < d - 1; ++a) {
      const int neg = (-w[a] % n + n) % n;
      flat = flat * un + static_cast<std::size_t>(neg);
    }
    lat->partner[m] = flat * lat->half + last;
  }
  return lat;
}

}  // namespace detail

/// Periodic box (0, L)^d sampled on N points per side.
class BoxSpec {
 public:
  BoxSpec() = default;

  BoxSpec(int d, double length, int n) {
    std::string problems;
    if (d != 2 && d != 3) problems += "box.d must be 2 or 3; ";
    if (!(length > 0.0) || !std::isfinite(length)) problems += "box.L must be positive; ";
    if (n < 8 || n % 2 != 0) problems += "box.N must be an even integer >= 8; ";
    if (!problems.empty()) throw ContractError(problems.substr(0, problems.size() - 2));
    lattice_ = cached(d, n, length);
  }

  int dim() const { return lattice_->d; }
  int n() const { return lattice_->n; }
  double length() const { return lattice_->length; }
  double volume() const { return std::pow(length(), dim()); }
  std::size_t modes() const { return lattice_->modes; }
  std::size_t grid_points() const {
    std::size_t p = 1;
    for (int a = 0; a < dim(); ++a) p *= static_cast<std::size_t>(n());
    return p;
  }
  /// Smallest nonzero eigenvalue of the Stokes operator, (2 pi / L)^2.
  double lambda1() const {
    const double k0 = 2.0 * std::numbers::pi / length();
    return k0 * k0;
  }
  /// Largest retained integer wavenumber along one axis.
  int max_kept_index() const { return (n() - 1) / 3; }
  /// Largest retained |k| along one axis.
  double k_max() const { return 2.0 * std::numbers::pi / length() * max_kept_index(); }

  const Lattice& lattice() const { return *lattice_; }
  bool valid() const { return static_cast<bool>(lattice_); }

  friend bool operator==(const BoxSpec& a, const BoxSpec& b) {
    if (a.lattice_ == b.lattice_) return true;
    if (!a.lattice_ || !b.lattice_) return false;
    return a.dim() == b.dim() && a.n() == b.n() && a.length() == b.length();
  }

  std::string describe() const {
    return "d=" + std::to_string(dim()) + " N=" + std::to_string(n()) +
           " L=" + std::to_string(length());
  }

 private:
  static std::shared_ptr<const Lattice> cached(int d, int n, double length) {
    static std::mutex mu;
    static std::map<std::tuple<int, int, double>, std::shared_ptr<const Lattice>> cache;
    std::lock_guard lock(mu);
    auto& slot = cache[{d, n, length}];
    if (!slot) slot = detail::build_lattice(d, n, length);
    return slot;
  }

  std::shared_ptr<const Lattice> lattice_;
};

inline void require_same_box(const BoxSpec& a, const BoxSpec& b, const char* op) {
  if (!(a == b)) {
    throw StructuralError(std::string(op) + ": box mismatch (" + a.describe() + " vs " +
                          b.describe() + ")");
  }
}

}  // namespace hvns
