#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "fixtures.hpp"
#include "hvns/tangent.hpp"
#include "oracles.hpp"

using namespace hvns;
using fixtures::max_abs_diff;
using fixtures::random_field;
using fixtures::single_mode;

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<SpectralField> random_orthonormal(const BoxSpec& box, std::size_t m, std::uint64_t seed) {
  std::vector<SpectralField> v;
  for (std::size_t j = 0; j < m; ++j) v.push_back(random_field(box, seed + j));
  modified_gram_schmidt(v);
  return v;
}

SimConfig forced_flow(double t_end) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = make_params(box, 0.05, 1e-4, 2.0);
  cfg.params.forcing = kolmogorov_forcing(box, 4, 1.0);
  cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 4.0, 2.0}, 12));
  cfg.dt = 0.01;
  cfg.t_end = t_end;
  return cfg;
}

}  // namespace

TEST(Linearized, ZeroBaseAndBilinearity) {
  const BoxSpec box(2, 2 * kPi, 32);
  const PhysicalParams p = make_params(box, 0.2, 1e-3, 2.0);
  const SpectralField U = random_field(box, 1), u = random_field(box, 2);
  const SpectralField lin0 = linearized_rhs(U, SpectralField(box), p);
  const SpectralField expect = -1.0 * (p.eps * apply_stokes_power(U, 2.0) + p.nu * apply_stokes_power(U, 1.0));
  EXPECT_LT(sobolev_norm(lin0 - expect, 0.0), 1e-13 * sobolev_norm(expect, 0.0));

  // U = u: B(u,U) + B(U,u) = 2 B(u,u)
  const SpectralField self = linearized_rhs(u, u, p) - linearized_rhs(u, SpectralField(box), p);
  const SpectralField twice = -2.0 * nonlinear_B(u, u);
  EXPECT_LT(sobolev_norm(self - twice, 0.0), 1e-12 * sobolev_norm(twice, 0.0));
  EXPECT_LT(divergence_defect(linearized_rhs(U, u, p)), 1e-13);
}

TEST(Linearized, SingleModesMatchConvolutionOracle) {
  const BoxSpec box(2, 2 * kPi, 16);
  const SpectralField u = single_mode(box, {1, 2, 0}, 1.0), U = single_mode(box, {2, -1, 0}, 0.7);
  // zero viscosity isolates the advection terms; the decay part is checked above
  const PhysicalParams inviscid = make_params(box, 0.0, 0.0, 2.0);
  const SpectralField lin = linearized_rhs(U, u, inviscid);
  auto ref = oracle::projected_advection(u, U);
  for (const auto& [k, v] : oracle::projected_advection(U, u))
    for (int c = 0; c < 2; ++c) ref[k][c] += v[c];
  for (auto& [k, v] : ref)
    for (int c = 0; c < 2; ++c) v[c] = -v[c];
  EXPECT_LT(oracle::max_difference(ref, oracle::full_modes(lin), 2), 1e-14);
}

TEST(Trace, ZeroBaseFlowGivesLinearSpectrum) {
  const BoxSpec box(2, 2 * kPi, 32);
  const PhysicalParams p = make_params(box, 0.3, 2e-3, 2.0);
  const auto e = solenoidal_eigenmodes(box, 8);
  const auto lam = stokes_eigenvalues(box, 8);
  double expect = 0.0;
  for (std::size_t j = 0; j < 8; ++j) expect -= p.nu * lam[j] + p.eps * lam[j] * lam[j];
  EXPECT_NEAR(trace_increment(SpectralField(box), e, p), expect, 1e-13);

  const PhysicalParams unit = make_params(box, 1.0, 0.0, 2.0);
  EXPECT_NEAR(trace_increment(SpectralField(box), std::span(e).first(1), unit), -1.0, 1e-14);
}

TEST(Trace, AdvectionTermMatchesTrilinearForm) {
  for (int d : {2, 3}) {
    const BoxSpec box(d, 2.0, d == 2 ? 32 : 12);
    const PhysicalParams p = make_params(box, 0.1, 1e-3, 2.0);
    const SpectralField u = random_field(box, 40);
    const auto basis = random_orthonormal(box, 5, 50);
    double expect = 0.0;
    for (const auto& phi : basis) {
      expect -= p.nu * sobolev_norm_squared(phi, 1.0) + p.eps * sobolev_norm_squared(phi, 2.0);
      expect -= trilinear_b(phi, u, phi);
    }
    EXPECT_NEAR(trace_increment(u, basis, p), expect, 1e-10 * std::abs(expect));
  }
}

TEST(Trace, BasisInvarianceAndOrthonormalityGuard) {
  const BoxSpec box(2, 2 * kPi, 32);
  const PhysicalParams p = make_params(box, 0.1, 1e-3, 2.0);
  const SpectralField u = random_field(box, 7);
  const auto basis = random_orthonormal(box, 4, 70);
  // rotate within the span by a fixed orthogonal 4x4 matrix (a Householder reflection)
  const double w[4] = {0.5, -0.5, 0.5, 0.5};
  std::vector<SpectralField> rotated(4, SpectralField(box));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) rotated[i].axpy((i == j ? 1.0 : 0.0) - 2.0 * w[i] * w[j], basis[j]);
  const double a = trace_increment(u, basis, p), b = trace_increment(u, rotated, p);
  EXPECT_NEAR(a, b, 1e-9 * std::abs(a));

  auto skewed = basis;
  skewed[1].axpy(1e-3, skewed[0]);
  EXPECT_THROW(trace_increment(u, skewed, p), ContractError);
}

TEST(Tangent, LinearityInTheInitialPerturbation) {
  const SimConfig cfg = forced_flow(1.0);
  const SpectralField xi = random_field(cfg.u0.box(), 90);
  const auto one = evolve_tangent(cfg, xi);
  const auto two = evolve_tangent(cfg, 2.0 * xi);
  EXPECT_LT(sobolev_norm(two.U - 2.0 * one.U, 0.0), 1e-10 * sobolev_norm(two.U, 0.0));
  EXPECT_EQ(max_abs_diff(one.u, two.u), 0.0);
}

TEST(Ensemble, RejectsOversizedEnsembles) {
  const BoxSpec box(2, 2 * kPi, 8);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 0.0, 2.0);
  cfg.u0 = SpectralField(box);
  cfg.dt = 0.1;
  const std::size_t dof = solenoidal_dof(box);
  EXPECT_THROW(evolve_ensemble(cfg, {dof / 4 + 1, 1.0, 10, 0.0}), ContractError);
  EXPECT_THROW(evolve_ensemble(cfg, {0, 1.0, 10, 0.0}), ContractError);
}

TEST(Ensemble, DecayedFlowRecoversLinearSpectrum) {
  const BoxSpec box(2, 2 * kPi, 16);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 1e-3, 2.0);
  cfg.u0 = dealias(random_solenoidal(box, RandomSpectrum{1.0, 3.0, 1.0}, 3));
  cfg.dt = 0.05;
  const auto rep = evolve_ensemble(cfg, {8, 5.0, 10, 150.0});
  const auto lam = stokes_eigenvalues(box, 8);
  double expect = 0.0;
  for (std::size_t j = 0; j < 8; ++j) {
    expect -= cfg.params.nu * lam[j] + cfg.params.eps * lam[j] * lam[j];
    EXPECT_NEAR(rep.q[j], expect, 1e-4 * std::abs(expect)) << j;
    EXPECT_NEAR(rep.lyapunov_sum[j], expect, 1e-4 * std::abs(expect)) << j;
  }
  ASSERT_TRUE(rep.m_star.has_value());
  EXPECT_EQ(*rep.m_star, 1u);
  EXPECT_DOUBLE_EQ(rep.dim_f_bound, 1.0);
}

TEST(Ensemble, MoreHyperviscosityMeansMoreContraction) {
  const BoxSpec box(2, 2 * kPi, 16);
  std::vector<double> prev;
  for (double eps : {0.0, 1e-3, 1e-2}) {
    SimConfig cfg;
    cfg.params = make_params(box, 0.1, eps, 2.0);
    cfg.u0 = SpectralField(box);
    cfg.dt = 0.05;
    const auto rep = evolve_ensemble(cfg, {6, 1.0, 10, 0.0});
    if (!prev.empty()) {
      for (std::size_t j = 0; j < 6; ++j) EXPECT_LT(rep.q[j], prev[j]);
    }
    prev = rep.q;
  }
}

TEST(Ensemble, OrthonormalizationPeriodDoesNotMatter) {
  SimConfig cfg = forced_flow(0.0);
  const auto a = evolve_ensemble(cfg, {4, 5.0, 10, 5.0});
  const auto b = evolve_ensemble(cfg, {4, 5.0, 5, 5.0});
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_LT(std::abs(a.q[j] - b.q[j]), std::max(a.q_standard_error[j], 1e-9)) << j;
  }
}

TEST(DimensionBounds, FromTraceArray) {
  DimensionReport r;
  r.q = {0.8, 0.5, -0.4, -2.0};
  fill_dimension_bounds(r);
  ASSERT_TRUE(r.m_star.has_value());
  EXPECT_EQ(*r.m_star, 3u);
  EXPECT_DOUBLE_EQ(r.dim_h_bound, 3.0);
  EXPECT_DOUBLE_EQ(r.dim_f_bound, 3.0 * (1.0 + 0.8 / 0.4));
  r.q = {0.1, 0.2};
  fill_dimension_bounds(r);
  EXPECT_FALSE(r.m_star.has_value());
}

TEST(Frechet, LinearDynamicsAtTheOrigin) {
  const BoxSpec box(2, 2 * kPi, 32);
  SimConfig cfg;
  cfg.params = make_params(box, 0.1, 0.0, 2.0);
  cfg.u0 = SpectralField(box);
  cfg.dt = 0.02;
  cfg.t_end = 1.0;
  const std::vector<double> amps{1e-2, 1e-3, 1e-4};
  const auto rep = frechet_check(cfg, single_mode(box, {1, 1, 0}, 1.0), amps);
  for (std::size_t i = 0; i < amps.size(); ++i) EXPECT_LE(rep.remainder[i], 1e-15 * amps[i]);
  EXPECT_THROW(frechet_check(cfg, single_mode(box, {1, 1, 0}, 1.0), std::vector<double>{1e-2, 1e-3}), ContractError);
}

TEST(Frechet, SecondOrderRemainderOnForcedFlow) {
  const std::vector<double> amps{1e-2, 1e-3, 1e-4, 1e-5};
  for (double T : {1.0, 2.0}) {
    const SimConfig cfg = forced_flow(T);
    const auto rep = frechet_check(cfg, random_field(cfg.u0.box(), 77), amps);
    EXPECT_GE(rep.slope, 1.9) << T;
    EXPECT_LE(rep.slope, 2.1) << T;
  }
}
