#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "hvns/params.hpp"
#include "hvns/quadrature.hpp"
#include "hvns/record.hpp"

namespace hvns {

/// G = ||f|| / (nu^2 lambda_1^(3/4)).
inline double grashof(const PhysicalParams& p, const BoxSpec& box) {
  return forcing_norm(p) / (p.nu * p.nu * std::pow(box.lambda1(), 0.75));
}

/// rho_0 = ||f|| / (nu lambda_1).
inline double absorbing_radius(const PhysicalParams& p, const BoxSpec& box) {
  return forcing_norm(p) / (p.nu * box.lambda1());
}

/// Burn-in before tail averages: 3 / (nu lambda_1).
inline double burn_in_time(const PhysicalParams& p, const BoxSpec& box) { return 3.0 / (p.nu * box.lambda1()); }

/// Relative tolerance of the statistical inequality checks (plus 2 standard errors).
inline constexpr double kStatisticalTolerance = 0.05;

namespace detail {

inline void require_records(std::span<const DiagnosticsRecord> records, const char* who) {
  if (records.empty()) throw ContractError(std::string(who) + ": empty record stream");
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].t > records[i - 1].t)) throw ContractError(std::string(who) + ": records are not time-ordered");
  }
}

inline std::size_t first_at_or_after(std::span<const DiagnosticsRecord> records, double t) {
  std::size_t i = 0;
  while (i < records.size() && records[i].t < t) ++i;
  return i;
}

}  // namespace detail

/// Outcome of the absorbing-ball envelope check.
struct AbsorbingReport {
  double rho0 = 0.0;
  double burn_in = 0.0;
  std::vector<bool> inside;  // per sample: energy under the envelope
  std::size_t violations = 0;
  double worst_envelope_ratio = 0.0;  // max energy / envelope
  double tail_max = 0.0;              // max ||u|| for t >= burn_in
  std::size_t tail_samples = 0;
  bool tail_ok = true;  // tail_max <= rho0 (1 + tol)
};

/// Checks ||u(t)||^2 <= ||u0||^2 e^(-nu l1 t) + rho0^2 (1 - e^(-nu l1 t)) at
/// every sample (times measured from the first record) and the lim sup
/// surrogate max_{t >= burn_in} ||u|| <= rho0 (1 + tol).
inline AbsorbingReport absorbing_check(std::span<const DiagnosticsRecord> records, const PhysicalParams& p,
                                       double tol = 0.01) {
  detail::require_records(records, "absorbing_check");
  const BoxSpec& box = p.forcing.box();
  AbsorbingReport r;
  r.rho0 = absorbing_radius(p, box);
  r.burn_in = burn_in_time(p, box);
  const double rate = p.nu * box.lambda1();
  const double e0 = records.front().energy;
  const double t0 = records.front().t;
  for (const auto& rec : records) {
    const double decay = std::exp(-rate * (rec.t - t0));
    const double envelope = e0 * decay + r.rho0 * r.rho0 * (1.0 - decay);
    // round-off slack only: the envelope is exact for the continuous flow
    const bool ok = rec.energy <= envelope * (1.0 + 1e-10) + 1e-300;
    r.inside.push_back(ok);
    if (!ok) ++r.violations;
    if (envelope > 0.0) r.worst_envelope_ratio = std::max(r.worst_envelope_ratio, rec.energy / envelope);
    if (rec.t - t0 >= r.burn_in) {
      r.tail_max = std::max(r.tail_max, std::sqrt(rec.energy));
      ++r.tail_samples;
    }
  }
  r.tail_ok = r.tail_max <= r.rho0 * (1.0 + tol);
  return r;
}

/// Tail-window time average of one record quantity.
struct TailAverage {
  double t_start = 0.0;
  double t_end = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double standard_error = 0.0;
};

template <class Getter>
TailAverage tail_average(std::span<const DiagnosticsRecord> records, double t_start, Getter&& get) {
  const std::size_t i0 = detail::first_at_or_after(records, t_start);
  TailAverage a;
  a.samples = records.size() - i0;
  if (a.samples < 10) {
    throw ContractError("tail window holds " + std::to_string(a.samples) + " samples; at least 10 are needed");
  }
  std::vector<double> t, y;
  for (std::size_t i = i0; i < records.size(); ++i) {
    t.push_back(records[i].t);
    y.push_back(get(records[i]));
  }
  a.t_start = t.front();
  a.t_end = t.back();
  a.mean = trapezoid(t, y) / (a.t_end - a.t_start);
  a.standard_error = batch_means(y).standard_error;
  return a;
}

/// Mean dissipation rate  eps_diss = lambda_1^(3/2) nu <||u||_1^2>  over the
/// tail window, with the two upper bounds it must respect.
struct DissipationReport {
  TailAverage enstrophy;
  double burn_in = 0.0;
  double value = 0.0;
  double standard_error = 0.0;
  double bound_flux = 0.0;      // lambda_1^(1/2) ||f||^2 / nu
  double bound_grashof = 0.0;   // lambda_1^2 nu^3 G^2
  double enstrophy_bound = 0.0; // ||f||^2 / (nu^2 lambda_1)
  bool flux_ok = true;
  bool grashof_ok = true;
  bool enstrophy_ok = true;
};

/// Burn-in defaults to 3 / (nu lambda_1) past the first record.
inline DissipationReport dissipation_rate(std::span<const DiagnosticsRecord> records, const BoxSpec& box,
                                          const PhysicalParams& p, double burn_in = -1.0) {
  detail::require_records(records, "dissipation_rate");
  DissipationReport r;
  r.burn_in = burn_in >= 0.0 ? burn_in : burn_in_time(p, box);
  r.enstrophy = tail_average(records, records.front().t + r.burn_in, [](const DiagnosticsRecord& x) { return x.enstrophy; });
  const double l1 = box.lambda1();
  const double scale = std::pow(l1, 1.5) * p.nu;
  r.value = scale * r.enstrophy.mean;
  r.standard_error = scale * r.enstrophy.standard_error;
  const double f2 = std::pow(forcing_norm(p), 2);
  const double G = grashof(p, box);
  r.bound_flux = std::sqrt(l1) * f2 / p.nu;
  r.bound_grashof = l1 * l1 * std::pow(p.nu, 3) * G * G;
  r.enstrophy_bound = f2 / (p.nu * p.nu * l1);
  const double slack = 2.0 * r.standard_error;
  r.flux_ok = r.value <= r.bound_flux * (1.0 + kStatisticalTolerance) + slack;
  r.grashof_ok = r.value <= r.bound_grashof * (1.0 + kStatisticalTolerance) + slack;
  r.enstrophy_ok = r.enstrophy.mean <=
                   r.enstrophy_bound * (1.0 + kStatisticalTolerance) + 2.0 * r.enstrophy.standard_error;
  return r;
}

/// Degrees-of-freedom estimates with the unknown constant set to 1.
struct BoundsReport {
  double rho0 = 0.0;
  double G = 0.0;
  double eps_diss = 0.0;
  double l_eps = 0.0;  // (nu^3 / eps_diss)^(1/4)
  double l0 = 0.0;     // lambda_1^(-1/2)
  double dof_landau = 0.0;   // (l0 / l_eps)^3
  double dof_paper = 0.0;    // (l0 / l_eps)^(21/10)
  double dof_grashof = 0.0;  // G^(21/20)
  double tail_max_energy = 0.0;
  double c11 = 1.0;
  bool laminar = false;  // eps_diss == 0: l_eps undefined
  std::string constant_flag = "normalized-constant";
  std::string note = "dissipation length taken as (nu^3/eps)^(1/4); the form nu^3/eps is not a length";
};

inline constexpr double kDofExponent = 21.0 / 10.0;
inline constexpr double kGrashofExponent = 21.0 / 20.0;

inline BoundsReport dof_bounds(double eps_diss, const PhysicalParams& p, const BoxSpec& box) {
  if (!(eps_diss >= 0.0)) throw ContractError("dof_bounds: dissipation rate must be non-negative");
  BoundsReport r;
  r.rho0 = absorbing_radius(p, box);
  r.G = grashof(p, box);
  r.eps_diss = eps_diss;
  r.l0 = 1.0 / std::sqrt(box.lambda1());
  r.dof_grashof = r.c11 * std::pow(r.G, kGrashofExponent);
  if (eps_diss == 0.0) {
    r.laminar = true;
    r.l_eps = std::numeric_limits<double>::infinity();
    return r;
  }
  r.l_eps = std::pow(std::pow(p.nu, 3) / eps_diss, 0.25);
  const double ratio = r.l0 / r.l_eps;
  r.dof_landau = std::pow(ratio, 3.0);
  r.dof_paper = r.c11 * std::pow(ratio, kDofExponent);
  return r;
}

/// Net dissipation 2 eps ||A^(l/2)u||^2 + 2 nu ||u||_1^2 - 2 (f, u) of one record.
inline double net_dissipation(const DiagnosticsRecord& r, const PhysicalParams& p) {
  return 2.0 * p.eps * r.hyper + 2.0 * p.nu * r.enstrophy - 2.0 * r.injection;
}

/// Budget residual series recomputed from the records alone:
///   res_i = E_i - E_{i-1} + int_{t_{i-1}}^{t_i} net_dissipation dt,
/// the integral from the local cubic through the neighbouring samples.
/// res_0 = 0.
inline std::vector<double> energy_budget(std::span<const DiagnosticsRecord> records, const PhysicalParams& p) {
  detail::require_records(records, "energy_budget");
  std::vector<double> t, d;
  for (const auto& r : records) {
    t.push_back(r.t);
    d.push_back(net_dissipation(r, p));
  }
  std::vector<double> res(records.size(), 0.0);
  for (std::size_t i = 1; i < records.size(); ++i) {
    res[i] = records[i].energy - records[i - 1].energy + local_cubic_integral(t, d, i);
  }
  return res;
}

}  // namespace hvns
