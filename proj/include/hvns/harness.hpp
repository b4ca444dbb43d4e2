#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hvns/diagnostics.hpp"
#include "hvns/dynamics.hpp"
#include "hvns/pool.hpp"
#include "hvns/quadrature.hpp"
#include "hvns/tangent.hpp"

namespace hvns {

/// Smallest l for which the epsilon -> 0 limit is known to hold: sup(d/2, (d+2)/4).
inline double convergence_l_threshold(int d) { return std::max(d / 2.0, (d + 2) / 4.0); }

// ---------------------------------------------------------------------------
// epsilon -> 0 convergence

struct ConvergenceRow {
  double eps = 0.0;
  double error = 0.0;  // ||u_eps - u_ref|| in L2(0,T; L2)
  bool flagged = false;
  std::string reason;
};

struct ConvergenceTable {
  double reference_eps = 0.0;
  std::vector<ConvergenceRow> rows;  // eps strictly decreasing
  double order = std::numeric_limits<double>::quiet_NaN();  // slope of log error vs log eps
  std::size_t fitted_rows = 0;
  double t_end = 0.0;
  double dt = 0.0;
  double sample_interval = 0.0;
  std::size_t samples = 0;
  std::vector<std::string> notes;

  std::vector<double> eps_values() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.eps);
    return v;
  }
  std::vector<double> errors() const {
    std::vector<double> v;
    for (const auto& r : rows) v.push_back(r.error);
    return v;
  }
};

namespace detail {

/// Smallest divisor s of `total` with total / s <= max_intervals, so the
/// samples stay uniform and the stored reference stays bounded.
inline long sampling_stride(long total, long max_intervals) {
  for (long s = 1; s < total; ++s) {
    if (total % s == 0 && total / s <= max_intervals) return s;
  }
  return total;
}

}  // namespace detail

/// Sampling intervals on [0, T] for the time integral: at least 200 whenever
/// the run has that many steps, every step up to 2000.
inline constexpr long kConvergenceMinSamples = 200;
inline constexpr long kConvergenceMaxSamples = 2000;

/// Runs the same initial data and forcing for every eps in `eps_list` and for
/// the reference, and tabulates sqrt(int_0^T ||u_eps - u_ref||^2 dt).
/// The reference defaults to eps = 0 in 2D and to the smallest listed eps in 3D.
/// The time integral uses the end-corrected trapezoid rule on a uniform grid.
inline ConvergenceTable convergence_study(const SimConfig& base, std::span<const double> eps_list,
                                          std::optional<double> reference_eps = std::nullopt,
                                          unsigned workers = 0) {
  validate(base);
  if (eps_list.empty()) throw ContractError("convergence_study: eps list is empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    if (!(eps_list[i] >= 0.0)) throw ContractError("convergence_study: eps values must be non-negative");
    if (i > 0 && !(eps_list[i] < eps_list[i - 1])) {
      throw ContractError("convergence_study: eps values must be strictly decreasing");
    }
  }
  if (!(base.t_end > 0.0)) throw ContractError("convergence_study: t_end must be positive");

  const BoxSpec& box = base.u0.box();
  ConvergenceTable table;
  table.t_end = base.t_end;
  if (reference_eps) {
    table.reference_eps = *reference_eps;
  } else if (box.dim() == 2) {
    table.reference_eps = 0.0;
  } else {
    table.reference_eps = eps_list.back();
    table.notes.push_back("3D: reference is the smallest eps run (Cauchy test in eps)");
  }
  if (base.params.l < convergence_l_threshold(box.dim())) {
    const std::string w = "l = " + std::to_string(base.params.l) + " is below sup(d/2, (d+2)/4) = " +
                          std::to_string(convergence_l_threshold(box.dim())) + "; no convergence theory applies";
    std::clog << "warning: " << w << '\n';
    table.notes.push_back(w);
  }

  const double requested = base.dt > 0.0 ? base.dt : default_dt(base.u0);
  table.dt = effective_dt(requested, base.t_end);
  const long total = step_count(table.dt, base.t_end);
  const long stride = detail::sampling_stride(total, kConvergenceMaxSamples);
  if (total / stride < kConvergenceMinSamples) {
    table.notes.push_back("only " + std::to_string(total / stride) + " sampling intervals (" + std::to_string(total) +
                          " steps, stride " + std::to_string(stride) + "); a smaller dt gives a finer time integral");
  }
  table.sample_interval = table.dt * static_cast<double>(stride);

  auto member = [&](double eps) {
    SimConfig cfg = base;
    cfg.params.eps = eps;
    cfg.dt = requested;
    cfg.output_every = stride;
    return cfg;
  };

  std::vector<SpectralField> reference;
  simulate(member(table.reference_eps),
           [&](const DiagnosticsRecord&, const SpectralField& u) { reference.push_back(u); });
  table.samples = reference.size();

  table.rows = parallel_map<ConvergenceRow>(
      eps_list.size(),
      [&](std::size_t i) {
        ConvergenceRow row;
        row.eps = eps_list[i];
        if (row.eps == table.reference_eps) return row;  // identical run: error 0
        std::vector<double> diff2;
        try {
          simulate(member(row.eps), [&](const DiagnosticsRecord&, const SpectralField& u) {
            diff2.push_back(sobolev_norm_squared(u - reference[diff2.size()], 0.0));
          });
          row.error = std::sqrt(integrate_uniform(table.sample_interval, diff2));
        } catch (const BlowUpError& e) {
          row.flagged = true;
          row.reason = e.what();
          row.error = std::numeric_limits<double>::quiet_NaN();
        }
        return row;
      },
      workers);

  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (!r.flagged && r.eps > 0.0 && r.error > 0.0) {
      x.push_back(std::log(r.eps));
      y.push_back(std::log(r.error));
    }
  }
  table.fitted_rows = x.size();
  if (x.size() >= 2) table.order = fit_line(x, y).slope;
  return table;
}

// ---------------------------------------------------------------------------
// functional inequalities

/// Largest observed value of one inequality ratio.
struct RatioStat {
  std::string name;
  double max_ratio = 0.0;
  std::size_t samples = 0;
  std::uint64_t worst_seed = 0;
  std::size_t violations = 0;  // only counted where the constant is known
};

struct InequalityAuditReport {
  std::uint64_t seed = 0;
  RandomSpectrum spectrum;
  RatioStat poincare;    // lambda_1 ||u||^2 / ||u||_1^2, must be <= 1
  RatioStat agmon;       // ||u||_inf / (||u||_1^(1/2) ||Au||^(1/2)) in 3D, ||u||^(1/2) in 2D
  RatioStat b_form;      // |b(u,v,u)| / (||u||^(1/2) ||u||_1^(3/2) ||v||_1), worst v
  RatioStat continuity;  // |b(u,v,w)| / (||u||_(1/2) ||v||_(3/2) ||w||_(1/2))
  double first_eigenmode_poincare = 0.0;
};

inline constexpr double kPoincareSlack = 1e-12;

namespace detail {

// Partner fields for a logged sample seed; fixed offsets keep them reproducible.
inline std::uint64_t partner_seed(std::uint64_t seed, std::uint64_t which) {
  return seed ^ (0x9E3779B97F4A7C15ull * which);
}

struct AuditSample {
  double poincare = 0.0, agmon = 0.0, b_form = 0.0, continuity = 0.0;
};

/// A^(-1) u on the nonzero modes.
inline SpectralField inverse_stokes(SpectralField u) {
  const auto& lat = u.box().lattice();
  for (int c = 0; c < u.components(); ++c)
    for (std::size_t m = 0; m < lat.modes; ++m) u.at(c, m) = lat.k2[m] > 0.0 ? u.at(c, m) / lat.k2[m] : Complex{};
  return u;
}

inline void accumulate(RatioStat& s, double ratio, std::uint64_t seed) {
  if (s.samples == 0 || ratio > s.max_ratio) {
    s.max_ratio = ratio;
    s.worst_seed = seed;
  }
  ++s.samples;
}

}  // namespace detail

/// Default audit spectrum: k^-2 with a Gaussian cutoff at half the resolved band.
inline RandomSpectrum audit_spectrum(const BoxSpec& box) { return RandomSpectrum{2.0, 0.5 * box.k_max(), -1.0}; }

/// Evaluates the inequality ratios on `samples` random dealiased solenoidal
/// fields drawn with seeds seed, seed+1, ...
///
/// The b-form ratio pairs each sample u with its worst partner
/// v = A^(-1) B(u, u), which maximizes |b(u, v, u)| / ||v||_1 over v; the
/// maximum over samples then converges far faster than with random v.
inline InequalityAuditReport inequality_audit(const BoxSpec& box, std::size_t samples, std::uint64_t seed,
                                              unsigned workers = 0, std::optional<RandomSpectrum> spectrum = {}) {
  if (samples < 100) throw ContractError("inequality_audit: at least 100 samples are required");
  InequalityAuditReport rep;
  rep.seed = seed;
  rep.spectrum = spectrum ? *spectrum : audit_spectrum(box);
  rep.poincare.name = "poincare";
  rep.agmon.name = "agmon";
  rep.b_form.name = "b_form";
  rep.continuity.name = "continuity";
  const double l1 = box.lambda1();
  const int d = box.dim();

  const auto results = parallel_map<detail::AuditSample>(
      samples,
      [&](std::size_t i) {
        const std::uint64_t s = seed + i;
        const SpectralField u = dealias(random_solenoidal(box, rep.spectrum, s));
        const SpectralField v = dealias(random_solenoidal(box, rep.spectrum, detail::partner_seed(s, 1)));
        const SpectralField w = dealias(random_solenoidal(box, rep.spectrum, detail::partner_seed(s, 2)));
        const SpectralField worst = detail::inverse_stokes(nonlinear_B(u, u));
        const double u0 = sobolev_norm(u, 0.0), u1 = sobolev_norm(u, 1.0), u2 = sobolev_norm(u, 2.0);
        detail::AuditSample r;
        r.poincare = l1 * u0 * u0 / (u1 * u1);
        const double sup = to_physical(u).max_magnitude();
        r.agmon = sup / (std::sqrt(d == 2 ? u0 : u1) * std::sqrt(u2));
        r.b_form = std::abs(trilinear_b(u, worst, u)) / (std::sqrt(u0) * std::pow(u1, 1.5) * sobolev_norm(worst, 1.0));
        r.continuity = std::abs(trilinear_b(u, v, w)) /
                       (sobolev_norm(u, 0.5) * sobolev_norm(v, 1.5) * sobolev_norm(w, 0.5));
        return r;
      },
      workers);

  for (std::size_t i = 0; i < samples; ++i) {
    const std::uint64_t s = seed + i;
    const auto& r = results[i];
    detail::accumulate(rep.poincare, r.poincare, s);
    if (r.poincare > 1.0 + kPoincareSlack) ++rep.poincare.violations;
    detail::accumulate(rep.agmon, r.agmon, s);
    detail::accumulate(rep.b_form, r.b_form, s);
    detail::accumulate(rep.continuity, r.continuity, s);
  }
  const SpectralField e1 = solenoidal_eigenmodes(box, 1).front();
  rep.first_eigenmode_poincare = l1 * sobolev_norm_squared(e1, 0.0) / sobolev_norm_squared(e1, 1.0);
  return rep;
}

// ---------------------------------------------------------------------------
// Lieb-Thirring ratio probe

/// Default exponent q = 1 + d/(2l), for which the left side is homogeneous of
/// degree one in rho.
inline double lieb_thirring_default_q(int d, double l) { return 1.0 + d / (2.0 * l); }

/// Admissible exponents: max(1, d/(2l)) < q <= 1 + d/(2l).
inline bool lieb_thirring_admissible(int d, double l, double q) {
  return q > std::max(1.0, d / (2.0 * l)) && q <= lieb_thirring_default_q(d, l) * (1.0 + 1e-15);
}

/// (int rho^(q/(q-1)))^(2l(q-1)/d) / sum ||A^(l/2) phi_j||^2 for an
/// L2-orthonormal family.
inline double lieb_thirring_ratio(std::span<const SpectralField> family, double l, double q) {
  if (family.empty()) throw ContractError("lieb_thirring_ratio: empty family");
  if (gram_deviation(family) > kGramTolerance) {
    throw ContractError("lieb_thirring_ratio: family is not orthonormal in L2");
  }
  const BoxSpec& box = family.front().box();
  const int d = box.dim();
  if (!lieb_thirring_admissible(d, l, q)) throw ContractError("lieb_thirring_ratio: q outside the admissible range");
  std::vector<double> rho(box.grid_points(), 0.0);
  double trace = 0.0;
  for (const auto& phi : family) {
    const PhysicalField g = to_physical(phi);
    for (int c = 0; c < d; ++c) {
      const auto comp = g.component(c);
      for (std::size_t x = 0; x < rho.size(); ++x) rho[x] += comp[x] * comp[x];
    }
    trace += sobolev_norm_squared(phi, l);
  }
  const double p = q / (q - 1.0);
  double integral = 0.0;
  for (double r : rho) integral += std::pow(r, p);
  integral *= box.volume() / static_cast<double>(box.grid_points());
  return std::pow(integral, 2.0 * l * (q - 1.0) / d) / trace;
}

/// Solenoidal Gaussian packet of width sigma centred at c: the curl of a
/// periodized Gaussian stream function (2D) or vector potential along `axis` (3D).
inline SpectralField gaussian_packet(const BoxSpec& box, const std::array<double, 3>& centre, double sigma,
                                     const std::array<double, 3>& axis) {
  const int d = box.dim();
  const int n = box.n();
  const double L = box.length();
  const double h = L / n;
  PhysicalField psi(box, 1);
  auto values = psi.component(0);
  std::size_t x = 0;
  const int nz = d == 3 ? n : 1;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < nz; ++k, ++x) {
        const std::array<int, 3> idx{i, j, k};
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          double s = idx[a] * h - centre[a];
          s -= L * std::round(s / L);
          r2 += s * s;
        }
        values[x] = std::exp(-0.5 * r2 / (sigma * sigma));
      }
  SpectralField u(box);
  std::vector<Complex> hat(box.lattice().modes);
  to_spectral(box, values, hat);
  const auto& lat = box.lattice();
  for (std::size_t m = 0; m < lat.modes; ++m) {
    const auto& kk = lat.k[m];
    const Complex ik(0.0, 1.0);
    if (d == 2) {
      u.at(0, m) = ik * kk[1] * hat[m];
      u.at(1, m) = -ik * kk[0] * hat[m];
    } else {
      // curl(axis * g) = grad g x axis
      u.at(0, m) = ik * (kk[1] * axis[2] - kk[2] * axis[1]) * hat[m];
      u.at(1, m) = ik * (kk[2] * axis[0] - kk[0] * axis[2]) * hat[m];
      u.at(2, m) = ik * (kk[0] * axis[1] - kk[1] * axis[0]) * hat[m];
    }
  }
  return leray_project(dealias(std::move(u)));
}

/// A random orthonormal family of `size` localized packets.
inline std::vector<SpectralField> random_packet_family(const BoxSpec& box, std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double h = box.length() / box.n();
  std::vector<SpectralField> family;
  for (std::size_t j = 0; j < size; ++j) {
    std::array<double, 3> c{}, axis{};
    for (int a = 0; a < 3; ++a) c[a] = box.length() * unit(rng);
    double norm = 0.0;
    for (int a = 0; a < 3; ++a) {
      axis[a] = normal(rng);
      norm += axis[a] * axis[a];
    }
    for (auto& a : axis) a /= std::sqrt(norm);
    // widths the dealiased band resolves: the spectrum e^(-k^2 sigma^2/2) is
    // below 1e-8 at the cutoff for sigma >= 3h
    const double sigma = h * (3.0 + 2.0 * unit(rng));
    family.push_back(gaussian_packet(box, c, sigma, axis));
  }
  modified_gram_schmidt(family);
  return family;
}

struct LiebThirringRow {
  std::size_t family_size = 0;
  std::size_t trials = 0;
  double max_ratio = 0.0;
  double mean_ratio = 0.0;
  double min_ratio = 0.0;
};

struct LiebThirringTable {
  double l = 2.0;
  double q = 0.0;
  std::uint64_t seed = 0;
  std::vector<LiebThirringRow> rows;

  /// Spread of the typical ratio across family sizes: largest mean_ratio over
  /// the smallest. A growth trend in N shows up here.
  double variation() const {
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      hi = std::max(hi, r.mean_ratio);
      lo = std::min(lo, r.mean_ratio);
    }
    return hi / lo;
  }
  /// Same spread for the per-size maxima; sensitive to single near-coincident packets.
  double max_variation() const {
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (const auto& r : rows) {
      hi = std::max(hi, r.max_ratio);
      lo = std::min(lo, r.max_ratio);
    }
    return hi / lo;
  }
  /// Empirical lower bound on the constant.
  double kappa_lower_bound() const {
    double hi = 0.0;
    for (const auto& r : rows) hi = std::max(hi, r.max_ratio);
    return hi;
  }
};

/// Ratio table over random localized orthonormal families; trial t of family
/// size N uses seed + 1000 N + t. q <= 0 selects 1 + d/(2l).
inline LiebThirringTable lieb_thirring_probe(const BoxSpec& box, std::span<const std::size_t> family_sizes, double l,
                                             double q = 0.0, std::uint64_t seed = 0, std::size_t trials = 8,
                                             unsigned workers = 0) {
  LiebThirringTable table;
  table.l = l;
  table.q = q > 0.0 ? q : lieb_thirring_default_q(box.dim(), l);
  table.seed = seed;
  if (!lieb_thirring_admissible(box.dim(), l, table.q)) {
    throw ContractError("lieb_thirring_probe: q outside the admissible range");
  }
  if (trials < 1) throw ContractError("lieb_thirring_probe: trials must be >= 1");
  const std::size_t jobs = family_sizes.size() * trials;
  const auto ratios = parallel_map<double>(
      jobs,
      [&](std::size_t job) {
        const std::size_t size = family_sizes[job / trials];
        const std::size_t t = job % trials;
        const auto family = random_packet_family(box, size, seed + 1000 * size + t);
        return lieb_thirring_ratio(family, l, table.q);
      },
      workers);
  for (std::size_t s = 0; s < family_sizes.size(); ++s) {
    LiebThirringRow row;
    row.family_size = family_sizes[s];
    row.trials = trials;
    row.min_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const double r = ratios[s * trials + t];
      row.max_ratio = std::max(row.max_ratio, r);
      row.min_ratio = std::min(row.min_ratio, r);
      row.mean_ratio += r / static_cast<double>(trials);
    }
    table.rows.push_back(row);
  }
  return table;
}

// ---------------------------------------------------------------------------
// dimension estimate against the degrees-of-freedom bounds

struct SweepRow {
  double target_G = 0.0;
  double G = 0.0;
  double forcing_norm = 0.0;
  DimensionReport dimension;
  double eps_diss = 0.0;
  BoundsReport bounds;
  double g_power_bound = 0.0;  // G^(21/20)
  double g_cube_half = 0.0;    // G^(3/2)
  bool flagged = false;
  std::string reason;
};

struct SweepTable {
  std::vector<SweepRow> rows;  // sorted by target G
  double slope = std::numeric_limits<double>::quiet_NaN();  // log m_star vs log G
  std::size_t fitted_rows = 0;
};

/// For each target G, rescales the base forcing to ||f|| = G nu^2 lambda_1^(3/4),
/// estimates the trace sums and evaluates the bounds at the measured
/// dissipation rate lambda_1^(3/2) nu <||u||_1^2>.
inline SweepTable dimension_vs_bound_sweep(const SimConfig& base, std::span<const double> G_list,
                                           const EnsembleOptions& opt, unsigned workers = 0) {
  validate(base);
  const BoxSpec& box = base.u0.box();
  const double base_norm = forcing_norm(base.params);
  for (double G : G_list) {
    if (!(G >= 0.0)) throw ContractError("dimension_vs_bound_sweep: G must be non-negative");
    if (G > 0.0 && base_norm == 0.0) {
      throw ContractError("dimension_vs_bound_sweep: positive G needs a nonzero base forcing shape");
    }
  }
  SweepTable table;
  table.rows = parallel_map<SweepRow>(
      G_list.size(),
      [&](std::size_t i) {
        SweepRow row;
        row.target_G = G_list[i];
        SimConfig cfg = base;
        const double target = row.target_G * base.params.nu * base.params.nu * std::pow(box.lambda1(), 0.75);
        if (base_norm > 0.0) cfg.params.forcing *= target / base_norm;
        row.G = grashof(cfg.params, box);
        row.forcing_norm = forcing_norm(cfg.params);
        row.g_power_bound = std::pow(row.G, kGrashofExponent);
        row.g_cube_half = std::pow(row.G, 1.5);
        try {
          row.dimension = evolve_ensemble(cfg, opt);
          row.flagged = row.dimension.aborted;
          row.reason = row.dimension.abort_reason;
          if (!row.dimension.m_star) {
            row.flagged = true;
            row.reason = "no negative trace sum within m = " + std::to_string(opt.m);
          }
        } catch (const BlowUpError& e) {
          row.flagged = true;
          row.reason = e.what();
        }
        row.eps_diss = std::pow(box.lambda1(), 1.5) * cfg.params.nu * row.dimension.mean_enstrophy;
        row.bounds = dof_bounds(row.eps_diss, cfg.params, box);
        return row;
      },
      workers);
  std::stable_sort(table.rows.begin(), table.rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.target_G < b.target_G; });

  std::vector<double> x, y;
  for (const auto& r : table.rows) {
    if (!r.flagged && r.G > 0.0 && r.dimension.m_star) {
      x.push_back(std::log(r.G));
      y.push_back(std::log(static_cast<double>(*r.dimension.m_star)));
    }
  }
  table.fitted_rows = x.size();
  if (x.size() >= 2 && std::adjacent_find(x.begin(), x.end(), std::not_equal_to<>()) != x.end()) {
    table.slope = fit_line(x, y).slope;
  }
  return table;
}

}  // namespace hvns
