#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hvns/nonlinear.hpp"
#include "hvns/params.hpp"
#include "hvns/record.hpp"

namespace hvns {

enum class Scheme { IfRk2, Etdrk4 };

inline const char* scheme_name(Scheme s) { return s == Scheme::IfRk2 ? "IF-RK2" : "ETDRK4"; }

/// Scheme order used by the budget convergence checks.
inline int scheme_order(Scheme s) { return s == Scheme::IfRk2 ? 2 : 4; }

struct SimConfig {
  PhysicalParams params;
  SpectralField u0;
  double dt = 0.0;  // <= 0 selects default_dt
  double t_end = 0.0;
  long output_every = 1;
  Scheme scheme = Scheme::IfRk2;
};

struct SimState {
  double t = 0.0;
  SpectralField u;
  long step_index = 0;
};

/// 0.5 / (k_max * max(1, ||u0||_inf)).
inline double default_dt(const SpectralField& u0) {
  const double umax = to_physical(u0).max_magnitude();
  return 0.5 / (u0.box().k_max() * std::max(1.0, umax));
}

/// Step size actually used: no larger than requested, landing exactly on t_end.
inline double effective_dt(double requested, double t_end) {
  if (t_end <= 0.0) return requested;
  const auto steps = static_cast<long>(std::ceil(t_end / requested - 1e-9));
  return t_end / static_cast<double>(std::max(1L, steps));
}

inline long step_count(double dt, double t_end) {
  if (t_end <= 0.0) return 0;
  return std::max(1L, static_cast<long>(std::llround(t_end / dt)));
}

inline void validate(const SimConfig& cfg) {
  const BoxSpec& box = cfg.u0.box();
  if (!box.valid()) throw ContractError("SimConfig.u0 has no box");
  cfg.params.validate(box);
  if (!(cfg.dt >= 0.0) || !std::isfinite(cfg.dt)) throw ContractError("time.dt must be positive");
  if (!(cfg.t_end >= 0.0)) throw ContractError("time.t_end must be non-negative");
  if (cfg.output_every < 1) throw ContractError("time.output_every must be >= 1");
  if (mean_magnitude(cfg.u0) != 0.0) throw ContractError("initial field must have zero mean");
  if (divergence_defect(cfg.u0) > 1e-10) throw ContractError("initial field must be solenoidal");
}

/// f - eps A^l u - nu A u - B(u, u).
inline SpectralField rhs(const SpectralField& u, const PhysicalParams& p) {
  require_same_box(u.box(), p.forcing.box(), "rhs");
  SpectralField out = minus_self_advection(GridState(u));
  const auto& lat = u.box().lattice();
  for (int c = 0; c < u.components(); ++c) {
    for (std::size_t m = 0; m < lat.modes; ++m) {
      out.at(c, m) += p.forcing.at(c, m) - p.decay_rate(lat.k2[m]) * u.at(c, m);
    }
  }
  return out;
}

namespace detail {

struct Phi {
  double p1, p2, p3;
};

/// phi_k(z) = sum_j z^j / (j+k)!, the exponential-integrator weight functions.
inline Phi phi_functions(double z) {
  if (std::abs(z) < 1.0) {
    double t1 = 1.0, t2 = 0.5, t3 = 1.0 / 6.0;
    Phi r{0.0, 0.0, 0.0};
    for (int j = 0; j < 30; ++j) {
      r.p1 += t1;
      r.p2 += t2;
      r.p3 += t3;
      t1 *= z / (j + 2);
      t2 *= z / (j + 3);
      t3 *= z / (j + 4);
    }
    return r;
  }
  const double e = std::exp(z);
  return {(e - 1.0) / z, (e - 1.0 - z) / (z * z), (e - 1.0 - z - 0.5 * z * z) / (z * z * z)};
}

}  // namespace detail

/// Fixed-step exponential integrator for a coupled family of fields that all
/// share the diagonal linear operator  -(nu |k|^2 + eps |k|^2l).
///
/// The linear part and a constant forcing on member 0 are integrated exactly;
/// the nonlinear callback supplies the remaining terms for every member at
/// once, so tangent members see the base member's stage values.
class ExponentialStepper {
 public:
  ExponentialStepper(const BoxSpec& box, const PhysicalParams& params, double dt, Scheme scheme)
      : box_(box), dt_(dt), scheme_(scheme) {
    const auto& lat = box.lattice();
    const std::size_t M = lat.modes;
    e_.resize(M);
    forcing_weight_.resize(M);
    if (scheme == Scheme::Etdrk4) {
      e2_.resize(M);
      q_.resize(M);
      wa_.resize(M);
      wb_.resize(M);
      wc_.resize(M);
    }
    for (std::size_t m = 0; m < M; ++m) {
      const double z = -params.decay_rate(lat.k2[m]) * dt;
      const auto full = detail::phi_functions(z);
      e_[m] = std::exp(z);
      forcing_weight_[m] = dt * full.p1;
      if (scheme == Scheme::Etdrk4) {
        const auto halfp = detail::phi_functions(0.5 * z);
        e2_[m] = std::exp(0.5 * z);
        q_[m] = 0.5 * dt * halfp.p1;
        wa_[m] = dt * (full.p1 - 3.0 * full.p2 + 4.0 * full.p3);
        wb_[m] = 2.0 * dt * (full.p2 - 2.0 * full.p3);
        wc_[m] = dt * (-full.p2 + 4.0 * full.p3);
      }
    }
  }

  double dt() const { return dt_; }
  Scheme scheme() const { return scheme_; }
  const BoxSpec& box() const { return box_; }

  /// Advance every member by one step. `nonlinear(in, out)` must write the
  /// non-forcing, non-linear-decay tendency of each member of `in` to `out`.
  template <class Nonlinear>
  void advance(std::vector<SpectralField>& state, const SpectralField* forcing, Nonlinear&& nonlinear) const {
    if (scheme_ == Scheme::IfRk2) {
      advance_ifrk2(state, forcing, nonlinear);
    } else {
      advance_etdrk4(state, forcing, nonlinear);
    }
  }

 private:
  // visits every (member, component, mode) triple
  template <class F>
  void for_each_coeff(std::size_t members, F&& f) const {
    const std::size_t M = box_.modes();
    const int d = box_.dim();
    for (std::size_t s = 0; s < members; ++s)
      for (int c = 0; c < d; ++c)
        for (std::size_t m = 0; m < M; ++m) f(s, c, m);
  }

  template <class Nonlinear>
  void advance_ifrk2(std::vector<SpectralField>& u, const SpectralField* f, Nonlinear& nonlinear) const {
    const std::size_t S = u.size();
    std::vector<SpectralField> n0(S, SpectralField(box_)), n1(S, SpectralField(box_));
    nonlinear(std::span<const SpectralField>(u), std::span<SpectralField>(n0));
    std::vector<SpectralField> star(u);
    const double h = dt_;
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      Complex v = e_[m] * (u[s].at(c, m) + h * n0[s].at(c, m));
      if (s == 0 && f) v += forcing_weight_[m] * f->at(c, m);
      star[s].at(c, m) = v;
    });
    nonlinear(std::span<const SpectralField>(star), std::span<SpectralField>(n1));
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      Complex v = e_[m] * u[s].at(c, m) + 0.5 * h * (e_[m] * n0[s].at(c, m) + n1[s].at(c, m));
      if (s == 0 && f) v += forcing_weight_[m] * f->at(c, m);
      u[s].at(c, m) = v;
    });
  }

  template <class Nonlinear>
  void advance_etdrk4(std::vector<SpectralField>& u, const SpectralField* f, Nonlinear& nonlinear) const {
    const std::size_t S = u.size();
    auto eval = [&](const std::vector<SpectralField>& x, std::vector<SpectralField>& out) {
      nonlinear(std::span<const SpectralField>(x), std::span<SpectralField>(out));
      if (f) out[0] += *f;
    };
    std::vector<SpectralField> nu(S, SpectralField(box_)), na(nu), nb(nu), nc(nu);
    eval(u, nu);
    std::vector<SpectralField> a(u);
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      a[s].at(c, m) = e2_[m] * u[s].at(c, m) + q_[m] * nu[s].at(c, m);
    });
    eval(a, na);
    std::vector<SpectralField> b(u);
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      b[s].at(c, m) = e2_[m] * u[s].at(c, m) + q_[m] * na[s].at(c, m);
    });
    eval(b, nb);
    std::vector<SpectralField> cc(u);
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      cc[s].at(c, m) = e2_[m] * a[s].at(c, m) + q_[m] * (2.0 * nb[s].at(c, m) - nu[s].at(c, m));
    });
    eval(cc, nc);
    for_each_coeff(S, [&](std::size_t s, int c, std::size_t m) {
      u[s].at(c, m) = e_[m] * u[s].at(c, m) + wa_[m] * nu[s].at(c, m) +
                      wb_[m] * (na[s].at(c, m) + nb[s].at(c, m)) + wc_[m] * nc[s].at(c, m);
    });
  }

  BoxSpec box_;
  double dt_;
  Scheme scheme_;
  std::vector<double> e_, forcing_weight_;
  std::vector<double> e2_, q_, wa_, wb_, wc_;
};

/// Nonlinear tendency of the plain Navier-Stokes member: -B(u, u).
struct SelfAdvection {
  double* max_speed = nullptr;  // optional: grid max |u| of the first stage input

  void operator()(std::span<const SpectralField> in, std::span<SpectralField> out) {
    const GridState g(in[0]);
    if (max_speed) {
      *max_speed = g.value.max_magnitude();
      max_speed = nullptr;
    }
    out[0] = minus_self_advection(g);
  }
};

inline constexpr double kBlowUpThreshold = 1e12;

/// Throws BlowUpError on non-finite or runaway coefficients.
inline void check_finite(const SpectralField& u, long step, const char* what) {
  const auto peak = coefficient_peak(u);
  if (!peak.finite || peak.magnitude > kBlowUpThreshold) {
    throw BlowUpError(std::string(what) + " blew up at step " + std::to_string(step) + " (coefficient " +
                          (peak.finite ? std::to_string(peak.magnitude) : std::string("non-finite")) +
                          " at |k| = " + std::to_string(peak.k) + ")",
                      step, peak.k);
  }
}

/// Re-assert the solenoidal, zero-mean state invariant.
inline void check_admissible(const SpectralField& u, long step) {
  if (mean_magnitude(u) != 0.0) {
    throw ContractError("state lost zero mean at step " + std::to_string(step));
  }
  const double div = divergence_defect(u);
  if (div > 1e-9) {
    throw ContractError("state lost solenoidality at step " + std::to_string(step) + " (defect " +
                        std::to_string(div) + ")");
  }
}

/// Advance one step with the configured scheme.
inline SimState step(const SimState& state, const SimConfig& cfg) {
  const double dt = cfg.dt > 0.0 ? cfg.dt : default_dt(cfg.u0);
  const ExponentialStepper stepper(state.u.box(), cfg.params, dt, cfg.scheme);
  std::vector<SpectralField> members{state.u};
  stepper.advance(members, &cfg.params.forcing, SelfAdvection{});
  SimState next{state.t + dt, std::move(members[0]), state.step_index + 1};
  check_finite(next.u, next.step_index, "velocity");
  check_admissible(next.u, next.step_index);
  return next;
}

/// Quadratic functionals of a state, evaluated in one pass over the modes.
struct EnergyTerms {
  double energy = 0.0;
  double enstrophy = 0.0;
  double hyper = 0.0;
  double injection = 0.0;
};

class EnergyMeter {
 public:
  EnergyMeter(const BoxSpec& box, const PhysicalParams& params) : params_(params) {
    const auto& lat = box.lattice();
    k2l_.resize(lat.modes);
    for (std::size_t m = 0; m < lat.modes; ++m) k2l_[m] = lat.k2[m] == 0.0 ? 0.0 : std::pow(lat.k2[m], params.l);
  }

  EnergyTerms measure(const SpectralField& u) const {
    const auto& lat = u.box().lattice();
    EnergyTerms t;
    for (int c = 0; c < u.components(); ++c) {
      const auto a = u.component(c);
      const auto f = params_.forcing.component(c);
      for (std::size_t m = 0; m < lat.modes; ++m) {
        const double w = lat.weight[m];
        const double amp = std::norm(a[m]);
        t.energy += w * amp;
        t.enstrophy += w * lat.k2[m] * amp;
        t.hyper += w * k2l_[m] * amp;
        t.injection += w * (f[m].real() * a[m].real() + f[m].imag() * a[m].imag());
      }
    }
    const double vol = u.box().volume();
    t.energy *= vol;
    t.enstrophy *= vol;
    t.hyper *= vol;
    t.injection *= vol;
    return t;
  }

  /// Dissipation minus injection: 2 eps ||A^(l/2)u||^2 + 2 nu ||u||_1^2 - 2 (f, u).
  double net_dissipation(const EnergyTerms& t) const {
    return 2.0 * params_.eps * t.hyper + 2.0 * params_.nu * t.enstrophy - 2.0 * t.injection;
  }

  /// d/dt of net_dissipation along the exact flow through u.
  double net_dissipation_rate(const SpectralField& u) const {
    const SpectralField du = rhs(u, params_);
    const auto& lat = u.box().lattice();
    double sl = 0.0, s1 = 0.0, sf = 0.0;
    for (int c = 0; c < u.components(); ++c) {
      const auto a = u.component(c);
      const auto b = du.component(c);
      const auto f = params_.forcing.component(c);
      for (std::size_t m = 0; m < lat.modes; ++m) {
        const double w = lat.weight[m];
        const double ab = a[m].real() * b[m].real() + a[m].imag() * b[m].imag();
        sl += w * k2l_[m] * ab;
        s1 += w * lat.k2[m] * ab;
        sf += w * (f[m].real() * b[m].real() + f[m].imag() * b[m].imag());
      }
    }
    const double vol = u.box().volume();
    return vol * (4.0 * params_.eps * sl + 4.0 * params_.nu * s1 - 2.0 * sf);
  }

 private:
  PhysicalParams params_;
  std::vector<double> k2l_;
};

namespace detail {

// Sinks may take just the record, or the record and the sampled field.
template <class Sink>
void emit(Sink& sink, const DiagnosticsRecord& r, const SpectralField& u) {
  if constexpr (std::is_invocable_v<Sink&, const DiagnosticsRecord&, const SpectralField&>) {
    sink(r, u);
  } else {
    sink(r);
  }
}

}  // namespace detail

struct SimulationSummary {
  SimState final_state;
  long cfl_violations = 0;
  double max_cfl = 0.0;
  std::size_t records = 0;
};

/// Integrate from t = 0 (or from `resume`) to t_end, calling
/// `sink(record)` or `sink(record, u)` every output_every steps and at the end.
///
/// The budget residual of each record is  ||u||^2(t_i) - ||u||^2(t_{i-1}) +
/// int (2 eps ||A^(l/2)u||^2 + 2 nu ||u||_1^2 - 2 (f,u)) dt  over the interval,
/// with the integral taken by the step-resolution trapezoid rule plus
/// Euler-Maclaurin end corrections (fourth order in dt).
template <class Sink>
SimulationSummary simulate(const SimConfig& cfg, Sink&& sink, const std::optional<SimState>& resume = std::nullopt) {
  validate(cfg);
  const BoxSpec& box = cfg.u0.box();
  const double requested = cfg.dt > 0.0 ? cfg.dt : default_dt(cfg.u0);
  const double dt = effective_dt(requested, cfg.t_end);
  const long total = step_count(dt, cfg.t_end);

  SimState state;
  if (resume) {
    require_same_box(box, resume->u.box(), "simulate(resume)");
    state = *resume;
    if (state.step_index > total) throw ContractError("resume state lies beyond t_end");
  } else {
    state = SimState{0.0, dealias(cfg.u0), 0};
  }

  const ExponentialStepper stepper(box, cfg.params, dt, cfg.scheme);
  const EnergyMeter meter(box, cfg.params);
  const double kmax = box.k_max();

  SimulationSummary summary;
  EnergyTerms last = meter.measure(state.u);
  double last_rate = meter.net_dissipation_rate(state.u);
  double prev_net = meter.net_dissipation(last);
  double trapezoid = 0.0;
  if (!resume) {
    detail::emit(sink, DiagnosticsRecord{state.t, last.energy, last.enstrophy, last.hyper, last.injection, 0.0},
                 state.u);
    ++summary.records;
  }

  std::vector<SpectralField> members{state.u};
  while (state.step_index < total) {
    double umax = 0.0;
    stepper.advance(members, &cfg.params.forcing, SelfAdvection{&umax});
    ++state.step_index;
    state.t = dt * static_cast<double>(state.step_index);
    check_finite(members[0], state.step_index, "velocity");
    check_admissible(members[0], state.step_index);

    const double cfl = dt * umax * kmax;
    summary.max_cfl = std::max(summary.max_cfl, cfl);
    if (cfl > 1.0) {
      if (summary.cfl_violations == 0) {
        std::clog << "warning: CFL number " << cfl << " > 1 at step " << state.step_index << '\n';
      }
      ++summary.cfl_violations;
    }

    const EnergyTerms now = meter.measure(members[0]);
    const double net = meter.net_dissipation(now);
    trapezoid += 0.5 * dt * (prev_net + net);
    prev_net = net;

    if (state.step_index % cfg.output_every == 0 || state.step_index == total) {
      const double rate = meter.net_dissipation_rate(members[0]);
      const double integral = trapezoid - dt * dt / 12.0 * (rate - last_rate);
      const double residual = now.energy - last.energy + integral;
      detail::emit(sink, DiagnosticsRecord{state.t, now.energy, now.enstrophy, now.hyper, now.injection, residual},
                   members[0]);
      ++summary.records;
      last = now;
      last_rate = rate;
      trapezoid = 0.0;
    }
  }
  state.u = std::move(members[0]);
  summary.final_state = std::move(state);
  return summary;
}

}  // namespace hvns
