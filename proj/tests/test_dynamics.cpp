#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "hvns/dynamics.hpp"
#include "fixtures.hpp"

using namespace hvns;
using fixtures::max_abs_diff;
using fixtures::run;
using fixtures::single_mode;

namespace {

constexpr double kPi = std::numbers::pi;

SimConfig forced_config(Scheme scheme, double dt) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = make_params(box, 0.05, 1e-4, 2.0);
  cfg.params.forcing = kolmogorov_forcing(box, 4, 1.0);
  cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 4.0, 1.0}, 17));
  cfg.dt = dt;
  cfg.t_end = 1.0;
  cfg.scheme = scheme;
  cfg.output_every = static_cast<long>(std::llround(0.25 / dt));
  return cfg;
}

double residual_size(const std::vector<DiagnosticsRecord>& rs) {
  double s = 0.0;
  for (const auto& r : rs) s = std::max(s, std::abs(r.budget_residual));
  return s;
}

}  // namespace

TEST(Rhs, SimpleCases) {
  const BoxSpec box(2, 2 * kPi, 16);
  PhysicalParams p = make_params(box, 0.3, 0.01, 2.0);
  const SpectralField zero(box);
  EXPECT_EQ(sobolev_norm(rhs(zero, p), 0.0), 0.0);

  const SpectralField u = single_mode(box, {2, 1, 0}, 1.0);
  const double k2 = 5.0;
  const SpectralField expect = -(0.3 * k2 + 0.01 * k2 * k2) * u;
  EXPECT_LT(max_abs_diff(rhs(u, p), expect), 1e-14);

  p.forcing = kolmogorov_forcing(box, 4, 2.0);
  EXPECT_LT(max_abs_diff(rhs(zero, p), p.forcing), 1e-15);

  const BoxSpec other(2, 2 * kPi, 32);
  EXPECT_THROW(rhs(SpectralField(other), p), StructuralError);
}

TEST(Step, SingleModeDecayIsExact) {
  const BoxSpec box(2, 2 * kPi, 32);
  for (Scheme s : {Scheme::IfRk2, Scheme::Etdrk4}) {
    for (double eps : {0.0, 1e-3}) {
      SimConfig cfg;
      cfg.params = make_params(box, 0.1, eps, 2.0);
      cfg.u0 = single_mode(box, {3, -2, 0}, 1.3);
      cfg.dt = 0.01;
      cfg.t_end = 2.0;
      cfg.scheme = s;
      const double rate = 0.1 * 13.0 + eps * 169.0;
      const double e0 = sobolev_norm(cfg.u0, 0.0);
      double worst = 0.0;
      simulate(cfg, [&](const DiagnosticsRecord& r) {
        const double exact = std::exp(-rate * r.t) * e0;
        worst = std::max(worst, std::abs(std::sqrt(r.energy) - exact) / exact);
      });
      EXPECT_LT(worst, 1e-12) << scheme_name(s) << " eps=" << eps;
    }
  }
}

TEST(Simulate, SingleModeBudgetResidualIsTiny) {
  // the in-run quadrature is fourth order in dt, so this needs a modest step
  const BoxSpec box(2, 2 * kPi, 32);
  for (Scheme s : {Scheme::IfRk2, Scheme::Etdrk4}) {
    SimConfig cfg;
    cfg.params = make_params(box, 0.1, 1e-3, 2.0);
    cfg.u0 = single_mode(box, {3, -2, 0}, 1.3);
    cfg.dt = 0.002;
    cfg.t_end = 0.5;
    cfg.output_every = 50;
    cfg.scheme = s;
    for (const auto& r : run(cfg)) EXPECT_LE(std::abs(r.budget_residual), 1e-10) << r.t;
  }
}

TEST(Step, ZeroStaysZero) {
  const BoxSpec box(3, 2 * kPi, 16);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 0.0, 2.0);
  cfg.u0 = SpectralField(box);
  cfg.dt = 0.05;
  SimState s{0.0, cfg.u0, 0};
  for (int i = 0; i < 5; ++i) s = step(s, cfg);
  EXPECT_EQ(sobolev_norm(s.u, 0.0), 0.0);
  EXPECT_EQ(s.step_index, 5);
}

TEST(Step, ForcedSingleModeIsFixedPoint) {
  const BoxSpec box(2, 2 * kPi, 32);
  for (Scheme sch : {Scheme::IfRk2, Scheme::Etdrk4}) {
    SimConfig cfg;
    cfg.params = make_params(box, 0.07, 2e-3, 2.0);
    cfg.params.forcing = single_mode(box, {1, 2, 0}, 0.8);
    const double rate = cfg.params.decay_rate(5.0);
    cfg.u0 = (1.0 / rate) * cfg.params.forcing;
    cfg.dt = 0.03;
    cfg.scheme = sch;
    SimState s{0.0, cfg.u0, 0};
    const double scale = sobolev_norm(cfg.u0, 0.0);
    for (int i = 0; i < 20; ++i) {
      const SimState next = step(s, cfg);
      EXPECT_LT(sobolev_norm(next.u - s.u, 0.0), 1e-12 * scale);
      s = next;
    }
  }
}

TEST(Simulate, ZeroDurationEmitsOneRecord) {
  const BoxSpec box(2, 2 * kPi, 16);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 0.0, 2.0);
  cfg.u0 = single_mode(box, {1, 0, 0}, 1.0);
  cfg.t_end = 0.0;
  const auto rs = run(cfg);
  ASSERT_EQ(rs.size(), 1u);
  EXPECT_EQ(rs[0].t, 0.0);
  EXPECT_NEAR(rs[0].energy, sobolev_norm_squared(cfg.u0, 0.0), 1e-15);
}

TEST(Simulate, UnforcedEnergyStaysInsideEnvelope) {
  for (int d : {2, 3}) {
    const BoxSpec box(d, 2 * kPi, d == 2 ? 32 : 16);
    SimConfig cfg;
    cfg.params = make_params(box, 0.05, 0.0, 2.0);
    cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 3.0, 2.0}, 99));
    cfg.t_end = 2.0;
    cfg.dt = 0.01;
    cfg.output_every = 5;
    const double e0 = sobolev_norm_squared(cfg.u0, 0.0);
    for (const auto& r : run(cfg)) {
      EXPECT_LE(r.energy, e0 * std::exp(-0.05 * box.lambda1() * r.t) * (1.0 + 1e-12)) << "t=" << r.t;
    }
  }
}

TEST(Simulate, TinyEpsIsContinuous) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig a;
  a.params = make_params(box, 0.05, 0.0, 2.0);
  a.params.forcing = kolmogorov_forcing(box, 4, 0.5);
  a.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 4.0, 1.0}, 5));
  a.dt = 0.01;
  a.t_end = 1.0;
  SimConfig b = a;
  b.params.eps = 1e-12;
  const auto ua = simulate(a, [](const DiagnosticsRecord&) {}).final_state.u;
  const auto ub = simulate(b, [](const DiagnosticsRecord&) {}).final_state.u;
  EXPECT_LT(sobolev_norm(ua - ub, 0.0), 1e-9);
}

TEST(Simulate, ExtraDecayIsMonotoneInEps) {
  const BoxSpec box(2, 2 * kPi, 32);
  double previous = std::numeric_limits<double>::infinity();
  for (double eps : {0.0, 1e-4, 1e-3, 1e-2}) {
    SimConfig cfg;
    cfg.params = make_params(box, 0.05, eps, 2.0);
    cfg.u0 = single_mode(box, {2, 2, 0}, 1.0);
    cfg.dt = 0.02;
    cfg.t_end = 1.0;
    const double e = sobolev_norm(simulate(cfg, [](const DiagnosticsRecord&) {}).final_state.u, 0.0);
    EXPECT_LE(e, previous);
    previous = e;
  }
}

TEST(Simulate, BudgetResidualConvergesAtSchemeOrder) {
  for (Scheme s : {Scheme::IfRk2, Scheme::Etdrk4}) {
    std::vector<double> res;
    for (double dt : {0.02, 0.01, 0.005}) res.push_back(residual_size(run(forced_config(s, dt))));
    const double r1 = res[0] / res[1], r2 = res[1] / res[2];
    if (s == Scheme::IfRk2) {
      EXPECT_GE(r2, 3.5) << r1;
      EXPECT_LE(r2, 4.5) << r1;
    } else {
      EXPECT_GE(r2, 12.0) << r1;
      EXPECT_LE(r2, 20.0) << r1;
    }
  }
}

TEST(Simulate, OutputCadenceAndDeterminism) {
  SimConfig cfg = forced_config(Scheme::IfRk2, 0.01);
  cfg.output_every = 7;
  const auto a = run(cfg);
  const auto b = run(cfg);
  ASSERT_EQ(a.size(), b.size());
  EXPECT_EQ(a.size(), 1u + 14u + 1u);  // t=0, every 7 of 100 steps, the final step
  EXPECT_DOUBLE_EQ(a.back().t, 1.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].energy, b[i].energy);
    EXPECT_EQ(a[i].budget_residual, b[i].budget_residual);
  }
}

TEST(Simulate, ResumeReproducesUninterruptedRun) {
  SimConfig cfg = forced_config(Scheme::Etdrk4, 0.01);
  cfg.output_every = 10;
  std::vector<DiagnosticsRecord> full;
  const auto whole = simulate(cfg, [&](const DiagnosticsRecord& r) { full.push_back(r); });

  SimConfig first = cfg;
  first.t_end = 0.5;
  const auto half = simulate(first, [](const DiagnosticsRecord&) {});
  std::vector<DiagnosticsRecord> tail;
  const auto rest = simulate(cfg, [&](const DiagnosticsRecord& r) { tail.push_back(r); }, half.final_state);
  EXPECT_EQ(max_abs_diff(whole.final_state.u, rest.final_state.u), 0.0);
  ASSERT_EQ(tail.size(), 5u);
  for (std::size_t i = 0; i < tail.size(); ++i) EXPECT_EQ(tail[i].energy, full[full.size() - 5 + i].energy);
}

TEST(Step, BlowUpIsReported) {
  const BoxSpec box(2, 2 * kPi, 16);
  SpectralField u = single_mode(box, {1, 1, 0}, 1.0);
  u.at(0, 3) = Complex(std::nan(""), 0.0);
  try {
    check_finite(u, 42, "velocity");
    FAIL() << "expected BlowUpError";
  } catch (const BlowUpError& e) {
    EXPECT_EQ(e.step(), 42);
    EXPECT_GT(e.k_magnitude(), 0.0);
  }
}

TEST(Stepper, PhiFunctionsAreContinuousAtTheSwitch) {
  for (double z : {-0.999999, -1.000001, 0.5, -3.0}) {
    const auto p = detail::phi_functions(z);
    const double e = std::exp(z);
    EXPECT_NEAR(p.p1, (e - 1) / z, 1e-12);
    EXPECT_NEAR(p.p2, (e - 1 - z) / (z * z), 1e-11);
    EXPECT_NEAR(p.p3, (e - 1 - z - z * z / 2) / (z * z * z), 1e-10);
  }
  const auto zero = detail::phi_functions(0.0);
  EXPECT_DOUBLE_EQ(zero.p1, 1.0);
  EXPECT_DOUBLE_EQ(zero.p2, 0.5);
  EXPECT_DOUBLE_EQ(zero.p3, 1.0 / 6.0);
}
