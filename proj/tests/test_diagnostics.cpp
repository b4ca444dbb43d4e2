#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "hvns/diagnostics.hpp"

using namespace hvns;
using fixtures::run;
using fixtures::single_mode;

namespace {

constexpr double kPi = std::numbers::pi;

// Kolmogorov forcing scaled to a prescribed L2 norm.
PhysicalParams kolmogorov(const BoxSpec& box, double nu, double norm) {
  PhysicalParams p = make_params(box, nu, 0.0, 2.0);
  p.forcing = kolmogorov_forcing(box, 4, 1.0);
  p.forcing *= norm / forcing_norm(p);
  return p;
}

std::vector<DiagnosticsRecord> constant_records(double energy, double enstrophy, std::size_t n) {
  std::vector<DiagnosticsRecord> rs;
  for (std::size_t i = 0; i < n; ++i) rs.push_back({static_cast<double>(i), energy, enstrophy, 0.0, 0.0, 0.0});
  return rs;
}

}  // namespace

TEST(Quadrature, GregoryIsExactForCubicsAndFourthOrder) {
  for (std::size_t n : {2u, 3u, 4u, 5u, 6u, 7u, 12u}) {
    const double h = 1.0 / static_cast<double>(n - 1);
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) {
      const double t = h * static_cast<double>(i);
      y.push_back(n == 2 ? 2 * t + 1 : 4 * t * t * t - 3 * t * t + 2 * t + 1);
    }
    const double exact = n == 2 ? 2.0 : 1.0 - 1.0 + 1.0 + 1.0;
    EXPECT_NEAR(integrate_uniform(h, y), exact, 1e-14) << n;
  }
  auto err = [](std::size_t n) {
    const double h = 2.0 / static_cast<double>(n - 1);
    std::vector<double> y;
    for (std::size_t i = 0; i < n; ++i) y.push_back(std::exp(-1.7 * h * static_cast<double>(i)));
    return std::abs(integrate_uniform(h, y) - (1.0 - std::exp(-3.4)) / 1.7);
  };
  const double ratio = err(41) / err(81);
  EXPECT_GT(ratio, 14.0);
  EXPECT_LT(ratio, 18.0);
}

TEST(Quadrature, LocalCubicAndLineFit) {
  const std::vector<double> t{0.0, 0.3, 0.5, 1.1, 1.4};
  std::vector<double> y;
  for (double x : t) y.push_back(x * x * x - x + 2.0);
  auto F = [](double x) { return x * x * x * x / 4 - x * x / 2 + 2 * x; };
  for (std::size_t i = 1; i < t.size(); ++i) EXPECT_NEAR(local_cubic_integral(t, y, i), F(t[i]) - F(t[i - 1]), 1e-14);
  const std::vector<double> x{1, 2, 3, 4}, z{3, 5, 7, 9};
  const auto f = fit_line(x, z);
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_THROW(fit_line(std::vector<double>{1.0}, std::vector<double>{1.0}), ContractError);
}

TEST(Grashof, UnitPointAndHomogeneity) {
  const BoxSpec box(2, 2 * kPi, 32);
  EXPECT_EQ(grashof(make_params(box, 1.0, 0.0, 2.0), box), 0.0);
  const PhysicalParams unit = kolmogorov(box, 1.0, 1.0);
  EXPECT_NEAR(grashof(unit, box), 1.0, 1e-14);
  PhysicalParams twice = unit;
  twice.forcing *= 2.0;
  EXPECT_NEAR(grashof(twice, box), 2.0 * grashof(unit, box), 1e-14);
  PhysicalParams viscous = unit;
  viscous.nu = 2.0;
  EXPECT_NEAR(grashof(viscous, box), grashof(unit, box) / 4.0, 1e-14);
  const BoxSpec small(3, 1.0, 16);  // lambda_1 = 4 pi^2
  const PhysicalParams p = kolmogorov(small, 0.5, 3.0);
  EXPECT_NEAR(grashof(p, small), 3.0 / (0.25 * std::pow(4 * kPi * kPi, 0.75)), 1e-12);
}

TEST(Absorbing, UnforcedEnvelopeAndEmptyStream) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = make_params(box, 0.05, 0.0, 2.0);
  cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 3.0, 2.0}, 4));
  cfg.dt = 0.02;
  cfg.t_end = 3.0;
  cfg.output_every = 5;
  const auto rs = run(cfg);
  const auto rep = absorbing_check(rs, cfg.params);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_EQ(rep.rho0, 0.0);
  EXPECT_THROW(absorbing_check(std::vector<DiagnosticsRecord>{}, cfg.params), ContractError);
}

TEST(Absorbing, SteadyStateSitsInsideTheBall) {
  const BoxSpec box(2, 2 * kPi, 32);
  PhysicalParams p = make_params(box, 0.1, 1e-3, 2.0);
  p.forcing = single_mode(box, {2, 1, 0}, 1.0);
  const double rate = p.decay_rate(5.0);
  const SpectralField ustar = (1.0 / rate) * p.forcing;
  EXPECT_LE(sobolev_norm(ustar, 0.0), absorbing_radius(p, box));
  EXPECT_NEAR(sobolev_norm(ustar, 0.0), forcing_norm(p) / rate, 1e-14);

  // a run started inside the ball never leaves it
  SimConfig cfg;
  cfg.params = p;
  cfg.u0 = 0.5 * ustar;
  cfg.dt = 0.02;
  cfg.t_end = 40.0;
  cfg.output_every = 10;
  const auto rs = run(cfg);
  const auto rep = absorbing_check(rs, p);
  EXPECT_EQ(rep.violations, 0u);
  EXPECT_TRUE(rep.tail_ok);
  for (const auto& r : rs) EXPECT_LE(std::sqrt(r.energy), rep.rho0);
}

TEST(Dissipation, ZeroAndSteadyState) {
  const BoxSpec box(2, 2 * kPi, 32);
  PhysicalParams p = make_params(box, 0.1, 0.0, 2.0);
  p.forcing = single_mode(box, {2, 1, 0}, 1.0);
  const auto zero = dissipation_rate(constant_records(0.0, 0.0, 50), box, p, 0.0);
  EXPECT_EQ(zero.value, 0.0);

  const double rate = p.decay_rate(5.0);
  const SpectralField ustar = (1.0 / rate) * p.forcing;
  const double e = sobolev_norm_squared(ustar, 0.0);
  const auto steady = dissipation_rate(constant_records(e, 5.0 * e, 50), box, p, 0.0);
  EXPECT_NEAR(steady.value, std::pow(box.lambda1(), 1.5) * p.nu * 5.0 * e, 1e-14 * steady.value);
  EXPECT_TRUE(steady.flux_ok);
  EXPECT_TRUE(steady.grashof_ok);
  EXPECT_TRUE(steady.enstrophy_ok);
  // the two bounds coincide in this normalization
  EXPECT_NEAR(steady.bound_flux, steady.bound_grashof, 1e-12 * steady.bound_flux);
  EXPECT_THROW(dissipation_rate(constant_records(e, e, 9), box, p, 0.0), ContractError);
}

TEST(Bounds, UnitPointAndExponents) {
  const BoxSpec box(2, 2 * kPi, 32);
  const PhysicalParams unit = kolmogorov(box, 1.0, 1.0);
  const auto r = dof_bounds(1.0, unit, box);
  EXPECT_DOUBLE_EQ(r.l_eps, 1.0);
  EXPECT_DOUBLE_EQ(r.l0, 1.0);
  EXPECT_DOUBLE_EQ(r.dof_landau, 1.0);
  EXPECT_DOUBLE_EQ(r.dof_paper, 1.0);
  EXPECT_NEAR(r.dof_grashof, 1.0, 1e-14);
  EXPECT_EQ(r.constant_flag, "normalized-constant");

  for (double eps : {0.37, 5.0, 123.0}) {
    const auto b = dof_bounds(eps, unit, box);
    const double ratio = b.l0 / b.l_eps;
    EXPECT_NEAR(std::log(b.dof_paper) / std::log(ratio), 2.1, 1e-12);
    if (ratio > 1.0) {
      EXPECT_LT(b.dof_paper, b.dof_landau);
    }
  }
  const PhysicalParams strong = kolmogorov(box, 0.1, 0.5);
  const auto s = dof_bounds(1.0, strong, box);
  EXPECT_NEAR(s.dof_grashof, std::pow(s.G, 1.05), 1e-12 * s.dof_grashof);

  const auto lam = dof_bounds(0.0, strong, box);
  EXPECT_TRUE(lam.laminar);
  EXPECT_THROW(dof_bounds(-1.0, strong, box), ContractError);
}

TEST(Budget, SingleModeDecayAndSteadyBalance) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 1e-3, 2.0);
  cfg.u0 = single_mode(box, {3, -2, 0}, 1.3);
  cfg.dt = 0.002;
  cfg.t_end = 1.0;
  cfg.output_every = 1;  // the record-level quadrature is a local cubic, fifth order per interval
  const auto res = energy_budget(run(cfg), cfg.params);
  for (double r : res) EXPECT_LE(std::abs(r), 1e-10);

  PhysicalParams p = make_params(box, 0.07, 2e-3, 2.0);
  p.forcing = single_mode(box, {1, 2, 0}, 0.8);
  SimConfig steady;
  steady.params = p;
  steady.u0 = (1.0 / p.decay_rate(5.0)) * p.forcing;
  steady.dt = 0.05;
  steady.t_end = 1.0;
  const auto rs = run(steady);
  for (const auto& r : rs) {
    EXPECT_NEAR(2 * p.nu * r.enstrophy + 2 * p.eps * r.hyper, 2 * r.injection, 1e-10);
  }
  for (double r : energy_budget(rs, p)) EXPECT_LE(std::abs(r), 1e-10);

  for (double r : energy_budget(constant_records(0.0, 0.0, 5), p)) EXPECT_EQ(r, 0.0);
}

TEST(Budget, EnstrophyAverageRespectsItsBound) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = kolmogorov(box, 0.1, 0.5);
  cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 4.0, 4.0}, 8));
  cfg.dt = 0.05;
  cfg.t_end = 60.0;
  cfg.output_every = 4;
  const auto rs = run(cfg);
  const auto d = dissipation_rate(rs, box, cfg.params);
  EXPECT_TRUE(d.enstrophy_ok);
  EXPECT_TRUE(d.flux_ok);
  EXPECT_NEAR(d.burn_in, 30.0, 1e-12);
  EXPECT_GT(d.enstrophy.samples, 100u);
}
