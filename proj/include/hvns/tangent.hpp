#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hvns/diagnostics.hpp"
#include "hvns/dynamics.hpp"

namespace hvns {

/// -eps A^l U - nu A U - B(u, U) - B(U, u): the flow linearized around u.
inline SpectralField linearized_rhs(const SpectralField& U, const SpectralField& u, const PhysicalParams& p) {
  require_same_box(U.box(), u.box(), "linearized_rhs");
  SpectralField out = minus_linearized_advection(GridState(u), U);
  const auto& lat = U.box().lattice();
  for (int c = 0; c < U.components(); ++c)
    for (std::size_t m = 0; m < lat.modes; ++m) out.at(c, m) -= p.decay_rate(lat.k2[m]) * U.at(c, m);
  return out;
}

/// max_ij |(phi_i, phi_j) - delta_ij|.
inline double gram_deviation(std::span<const SpectralField> basis) {
  double worst = 0.0;
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j <= i; ++j)
      worst = std::max(worst, std::abs(inner(basis[i], basis[j]) - (i == j ? 1.0 : 0.0)));
  return worst;
}

/// In-place modified Gram-Schmidt in L2. Returns the diagonal of R, i.e. the
/// norm of each vector after removing its projection on the earlier ones.
inline std::vector<double> modified_gram_schmidt(std::span<SpectralField> v) {
  std::vector<double> r(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    for (std::size_t i = 0; i < j; ++i) v[j].axpy(-inner(v[i], v[j]), v[i]);
    r[j] = std::sqrt(inner(v[j], v[j]));
    if (!(r[j] > 0.0) || !std::isfinite(r[j])) {
      throw ContractError("modified_gram_schmidt: vector " + std::to_string(j) + " is degenerate");
    }
    v[j] *= 1.0 / r[j];
  }
  return r;
}

namespace detail {

/// b(phi, u, phi) with phi and grad u given on the grid.
inline double b_phi_u_phi(const GridState& u, const PhysicalField& phi) {
  const int d = u.dim();
  double s = 0.0;
  for (int i = 0; i < d; ++i) {
    const auto pi = phi.component(i);
    for (int k = 0; k < d; ++k) {
      const auto pk = phi.component(k);
      const auto& du = u.d(k, i);
      for (std::size_t x = 0; x < pi.size(); ++x) s += pi[x] * du[x] * pk[x];
    }
  }
  return s * phi.box().volume() / static_cast<double>(phi.box().grid_points());
}

/// Per-vector trace contributions -eps||A^(l/2)phi||^2 - nu||phi||_1^2 - b(phi, u, phi).
inline std::vector<double> trace_terms(const GridState& u, std::span<const SpectralField> basis, const PhysicalParams& p) {
  std::vector<double> out;
  out.reserve(basis.size());
  for (const auto& phi : basis) {
    double lin = -p.nu * sobolev_norm_squared(phi, 1.0);
    if (p.eps != 0.0) lin -= p.eps * sobolev_norm_squared(phi, p.l);
    out.push_back(lin - b_phi_u_phi(u, to_physical(phi)));
  }
  return out;
}

}  // namespace detail

/// Largest Gram deviation accepted by trace_increment.
inline constexpr double kGramTolerance = 1e-6;

/// sum_j ( -eps ||A^(l/2) phi_j||^2 - nu ||phi_j||_1^2 - b(phi_j, u, phi_j) ),
/// i.e. the trace of the linearized operator on span{phi_j}.
inline double trace_increment(const SpectralField& u, std::span<const SpectralField> basis, const PhysicalParams& p) {
  for (const auto& phi : basis) require_same_box(u.box(), phi.box(), "trace_increment");
  const double dev = gram_deviation(basis);
  if (dev > kGramTolerance) {
    throw ContractError("trace_increment: basis is not orthonormal (Gram deviation " + std::to_string(dev) + ")");
  }
  const auto terms = detail::trace_terms(GridState(u), basis, p);
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

/// Nonlinear tendency of a base flow (member 0) together with its
/// linearizations (members 1..m) about the same stage state.
struct TangentAdvection {
  double* max_speed = nullptr;

  void operator()(std::span<const SpectralField> in, std::span<SpectralField> out) {
    const GridState g(in[0]);
    if (max_speed) {
      *max_speed = g.value.max_magnitude();
      max_speed = nullptr;
    }
    out[0] = minus_self_advection(g);
    for (std::size_t j = 1; j < in.size(); ++j) out[j] = minus_linearized_advection(g, in[j]);
  }
};

/// m co-evolving tangent vectors with their bookkeeping.
struct TangentEnsemble {
  std::size_t m = 0;
  std::vector<SpectralField> vectors;
  long ortho_every = 10;
  long steps = 0;
  double elapsed = 0.0;
  std::vector<double> trace_integral;  // int q_j(t) dt for j = 1..m (cumulative in j)
  std::vector<double> log_stretch;     // sum of log R_jj per vector

  TangentEnsemble(std::vector<SpectralField> initial, long ortho)
      : m(initial.size()), vectors(std::move(initial)), ortho_every(ortho), trace_integral(m, 0.0), log_stretch(m, 0.0) {
    if (m == 0) throw ContractError("TangentEnsemble: m must be >= 1");
    if (ortho_every < 1) throw ContractError("TangentEnsemble: ortho_every must be >= 1");
    modified_gram_schmidt(vectors);
  }

  void orthonormalize() {
    const auto r = modified_gram_schmidt(vectors);
    for (std::size_t j = 0; j < m; ++j) log_stretch[j] += std::log(r[j]);
  }

  /// Cumulative trace sums q_1..q_m of the span of the current vectors.
  std::vector<double> instantaneous_traces(const SpectralField& base, const PhysicalParams& p) const {
    std::vector<SpectralField> basis(vectors);
    modified_gram_schmidt(basis);
    auto terms = detail::trace_terms(GridState(base), basis, p);
    for (std::size_t j = 1; j < terms.size(); ++j) terms[j] += terms[j - 1];
    return terms;
  }
};

/// Estimated trace sums and the attractor-dimension bounds they imply.
struct DimensionReport {
  std::vector<double> q;               // q_1..q_m
  std::vector<double> q_standard_error;
  std::vector<double> lyapunov_sum;    // sum of log R_jj / window, cumulative in j
  std::optional<std::size_t> m_star;   // first m with q_m < 0
  double dim_h_bound = std::numeric_limits<double>::quiet_NaN();
  double dim_f_bound = std::numeric_limits<double>::quiet_NaN();
  double burn_in = 0.0;
  double window = 0.0;
  long ortho_every = 0;
  std::size_t samples = 0;
  double mean_enstrophy = 0.0;
  double grashof = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::string note;
};

/// m (1 + max_{j < m} (q_j)_+ / |q_m|) at m = m_star; the j = m term is
/// omitted since q_m < 0 there.
inline void fill_dimension_bounds(DimensionReport& r) {
  r.m_star.reset();
  for (std::size_t j = 0; j < r.q.size(); ++j) {
    if (r.q[j] < 0.0) {
      r.m_star = j + 1;
      break;
    }
  }
  if (!r.m_star) return;
  const std::size_t m = *r.m_star;
  double top = 0.0;
  for (std::size_t j = 0; j + 1 < m; ++j) top = std::max(top, r.q[j]);
  r.dim_h_bound = static_cast<double>(m);
  r.dim_f_bound = static_cast<double>(m) * (1.0 + top / std::abs(r.q[m - 1]));
}

struct EnsembleOptions {
  std::size_t m = 1;
  double window = 1.0;      // averaging time T_avg
  long ortho_every = 10;
  double burn_in = -1.0;    // < 0: 3 / (nu lambda_1)
};

/// Spin the base flow up for `burn_in`, then co-evolve it with m tangent
/// vectors (started on the first m Stokes eigenmodes) for `window`, averaging
/// the trace sums of the evolving subspace. Tangent blow-up ends the window
/// early; the report then covers the valid part and is flagged.
inline DimensionReport evolve_ensemble(const SimConfig& base, const EnsembleOptions& opt) {
  validate(base);
  const BoxSpec& box = base.u0.box();
  const std::size_t dof = solenoidal_dof(box);
  if (opt.m < 1) throw ContractError("evolve_ensemble: m must be >= 1");
  if (opt.m > dof / 4) {
    throw ContractError("evolve_ensemble: m = " + std::to_string(opt.m) + " exceeds a quarter of the " +
                        std::to_string(dof) + " resolved degrees of freedom");
  }
  if (!(opt.window > 0.0)) throw ContractError("evolve_ensemble: averaging window must be positive");

  DimensionReport rep;
  rep.burn_in = opt.burn_in >= 0.0 ? opt.burn_in : burn_in_time(base.params, box);
  rep.ortho_every = opt.ortho_every;
  rep.grashof = grashof(base.params, box);
  if (base.params.l != 2.0) rep.note = "trace formula applied with general hyperviscosity order l";

  const double requested = base.dt > 0.0 ? base.dt : default_dt(base.u0);
  SpectralField u = dealias(base.u0);
  if (rep.burn_in > 0.0) {
    SimConfig spin = base;
    spin.dt = requested;
    spin.t_end = rep.burn_in;
    spin.output_every = std::numeric_limits<long>::max();
    u = simulate(spin, [](const DiagnosticsRecord&) {}).final_state.u;
  }

  const double dt = effective_dt(requested, opt.window);
  const long total = step_count(dt, opt.window);
  const ExponentialStepper stepper(box, base.params, dt, base.scheme);
  TangentEnsemble ens(solenoidal_eigenmodes(box, opt.m), opt.ortho_every);

  std::vector<SpectralField> members;
  members.push_back(u);
  for (auto& v : ens.vectors) members.push_back(v);

  std::vector<std::vector<double>> series(opt.m);
  std::vector<double> enstrophy;
  auto sample = [&]() {
    ens.vectors.assign(members.begin() + 1, members.end());
    const auto q = ens.instantaneous_traces(members[0], base.params);
    for (std::size_t j = 0; j < opt.m; ++j) series[j].push_back(q[j]);
    enstrophy.push_back(sobolev_norm_squared(members[0], 1.0));
  };
  sample();

  long done = 0;
  try {
    while (done < total) {
      stepper.advance(members, &base.params.forcing, TangentAdvection{});
      ++done;
      check_finite(members[0], done, "base flow");
      for (std::size_t j = 1; j < members.size(); ++j) check_finite(members[j], done, "tangent vector");
      if (done % opt.ortho_every == 0) {
        ens.vectors.assign(members.begin() + 1, members.end());
        ens.orthonormalize();
        std::copy(ens.vectors.begin(), ens.vectors.end(), members.begin() + 1);
      }
      sample();
    }
  } catch (const BlowUpError& e) {
    rep.aborted = true;
    rep.abort_reason = e.what();
  }

  ens.steps = done;
  ens.elapsed = dt * static_cast<double>(done);
  rep.window = ens.elapsed;
  rep.samples = series[0].size();
  if (done == 0) throw BlowUpError("evolve_ensemble: no valid averaging window", 0, 0.0);
  for (std::size_t j = 0; j < opt.m; ++j) {
    ens.trace_integral[j] = integrate_uniform(dt, series[j]);
    rep.q.push_back(ens.trace_integral[j] / ens.elapsed);
    rep.q_standard_error.push_back(batch_means(series[j]).standard_error);
  }
  // the last partial interval since the final re-orthonormalization
  if (done % opt.ortho_every != 0) {
    ens.vectors.assign(members.begin() + 1, members.end());
    ens.orthonormalize();
  }
  double cum = 0.0;
  for (std::size_t j = 0; j < opt.m; ++j) {
    cum += ens.log_stretch[j];
    rep.lyapunov_sum.push_back(cum / ens.elapsed);
  }
  rep.mean_enstrophy = integrate_uniform(dt, enstrophy) / ens.elapsed;
  fill_dimension_bounds(rep);
  return rep;
}

/// Base flow u(T) and tangent U(T) started from xi, advanced together.
struct TangentRun {
  SpectralField u;
  SpectralField U;
};

inline TangentRun evolve_tangent(const SimConfig& base, const SpectralField& xi) {
  validate(base);
  require_same_box(base.u0.box(), xi.box(), "evolve_tangent");
  const double requested = base.dt > 0.0 ? base.dt : default_dt(base.u0);
  const double dt = effective_dt(requested, base.t_end);
  const long total = step_count(dt, base.t_end);
  const ExponentialStepper stepper(base.u0.box(), base.params, dt, base.scheme);
  std::vector<SpectralField> members{dealias(base.u0), dealias(xi)};
  for (long s = 1; s <= total; ++s) {
    stepper.advance(members, &base.params.forcing, TangentAdvection{});
    check_finite(members[0], s, "base flow");
    check_finite(members[1], s, "tangent vector");
  }
  return {std::move(members[0]), std::move(members[1])};
}

struct FrechetReport {
  std::vector<double> amplitudes;
  std::vector<double> remainder;  // ||eta(T)|| per amplitude
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double rms_residual = std::numeric_limits<double>::quiet_NaN();
  bool identically_zero = false;  // every remainder is exactly zero
};

/// For each amplitude a: eta(T) = v(T) - u(T) - U(T) with v started from
/// u0 + a d and U the tangent started from a d (d the unit-norm direction);
/// fits log ||eta|| against log a.
inline FrechetReport frechet_check(const SimConfig& base, const SpectralField& direction,
                                   std::span<const double> amplitudes) {
  if (amplitudes.size() < 3) throw ContractError("frechet_check: at least 3 amplitudes are required");
  for (double a : amplitudes) {
    if (!(a > 0.0)) throw ContractError("frechet_check: amplitudes must be positive");
  }
  SpectralField dir = leray_project(dealias(direction));
  const double n = sobolev_norm(dir, 0.0);
  if (n == 0.0) throw ContractError("frechet_check: direction has no resolved solenoidal part");
  dir *= 1.0 / n;

  SimConfig fixed = base;
  if (!(fixed.dt > 0.0)) fixed.dt = default_dt(base.u0);  // same step for every run

  FrechetReport rep;
  std::vector<double> lx, ly;
  bool all_zero = true;
  for (double a : amplitudes) {
    const TangentRun lin = evolve_tangent(fixed, a * dir);
    SimConfig pert = fixed;
    pert.u0 = fixed.u0 + a * dir;
    pert.output_every = std::numeric_limits<long>::max();
    const SpectralField v = simulate(pert, [](const DiagnosticsRecord&) {}).final_state.u;
    const double eta = sobolev_norm(v - lin.u - lin.U, 0.0);
    rep.amplitudes.push_back(a);
    rep.remainder.push_back(eta);
    if (eta > 0.0) {
      all_zero = false;
      lx.push_back(std::log(a));
      ly.push_back(std::log(eta));
    }
  }
  rep.identically_zero = all_zero;
  if (lx.size() >= 2) {
    const auto fit = fit_line(lx, ly);
    rep.slope = fit.slope;
    rep.intercept = fit.intercept;
    rep.rms_residual = fit.rms_residual;
  }
  return rep;
}

}  // namespace hvns
