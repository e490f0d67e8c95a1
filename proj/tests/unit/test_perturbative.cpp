#include <gtest/gtest.h>

#include "ebs/perturbative.hpp"
#include "ebs/sebs.hpp"
#include "oracles.hpp"

using namespace ebs;

namespace {
SpectralContext closed() { return SpectralContext::automatic(tight_binding_1d()); }
double eps1d(double k) { return 2.0 - 2.0 * std::cos(k); }

// Printed projected matrix, every integral done by the trapezoid rule.
std::array<double, 4> printed_matrix(const ImpuritySpec& imp, double e, int pts) {
  const double half = 0.5 * imp.omega * imp.omega, d = imp.delta;
  auto w1 = [&](double z) { return half * oracle::bz_average([&](double k) { return 1.0 / (z - eps1d(k)); }, pts); };
  const double dw1 = -half * oracle::bz_average([&](double k) { return std::pow(d - eps1d(k), -2); }, pts);
  const double diag = 1.0 + (w1(e) - w1(d)) / std::abs(d - e);
  const double m21 = -(w1(e) - w1(d)) / ((d - e) * (d - e)) - dw1 / (d - e);
  return {diag, -w1(e), m21, diag};
}
}  // namespace

TEST(Perturbative, KernelExamples) {
  auto c = closed();
  auto k0 = effective_hamiltonian_kernel(c, {-1.0, 0.0});
  EXPECT_EQ(k0.lamb_shift, 0.0);
  EXPECT_EQ(k0.potential({0.3, 0, 0}, {1.1, 0, 0}), cplx(0.0));

  ImpuritySpec imp{-1.0, 0.1};
  auto k1 = effective_hamiltonian_kernel(c, imp);
  EXPECT_NEAR(k1.lamb_shift, -0.01 / std::sqrt(5.0), 1e-15);
  for (double k : {0.0, 0.7, 2.5}) {
    Momentum q{k, 0, 0};
    EXPECT_NEAR(std::real(k1.potential(q, q)), 0.01 / (imp.delta - eps1d(k)), 1e-15);
  }
  auto a = k1.potential({0.2, 0, 0}, {1.9, 0, 0}), b = k1.potential({1.9, 0, 0}, {0.2, 0, 0});
  EXPECT_NEAR(std::abs(a - std::conj(b)), 0.0, 1e-16);
}

TEST(Perturbative, ExistenceOneDimensionAndDecoupled) {
  auto c = closed();
  for (double d : {-2.0, -0.2, 5.0, 8.0}) {
    EXPECT_TRUE(mebs_exists_perturbative(c, {d, 0.05}));
    EXPECT_FALSE(mebs_exists_perturbative(c, {d, 0.0}));
    EXPECT_EQ(mebs_existence_function(c, {d, 0.0}), 1.0);
  }
  try {
    mebs_existence_function(c, {0.0, 0.1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::regime_undefined);
  }
}

TEST(Perturbative, ExistenceThreeDimensionsRecorded) {
  SpectralContext c3(tight_binding(3));
  ImpuritySpec imp{-1.0, 0.2};
  const double f = mebs_existence_function(c3, imp);
  // recorded value; independent check from w1, w2, I0
  const double w1 = w_alpha(c3, imp, -1.0, 1), w2 = w_alpha(c3, imp, -1.0, 2), i0 = c3.capital_i0();
  EXPECT_NEAR(f, std::pow(1.0 - w1, 2) - (2.0 + w2) * 0.04 * i0 / 2.0, 1e-14);
  EXPECT_NEAR(f, 0.99670998, 1e-7);
  // F is det M continued to the band edge
  EXPECT_NEAR(projected_det(c3, imp, Sector::e, -2e-6), f, 1e-5);
  EXPECT_FALSE(mebs_exists_perturbative(c3, imp));
  // the projected determinant keeps its sign down to the quadrature floor
  for (double e : {-1e-5, -1e-3, -0.1, -0.5, -2.0, -20.0}) EXPECT_GT(projected_det(c3, imp, Sector::e, e), 0.0) << e;
  EXPECT_THROW(solve_projected_mode(c3, imp, Sector::e), Error);
}

TEST(Perturbative, DeterminantTendsToOne) {
  auto c = closed();
  for (auto [imp, s] : {std::pair{ImpuritySpec{-0.2, 0.05}, Sector::e}, std::pair{ImpuritySpec{6.0, 0.3}, Sector::g}})
    for (double e : {-1e3, -1e5, -1e7}) EXPECT_NEAR(projected_det(c, imp, s, e), 1.0, 10.0 / std::abs(e));
}

TEST(Perturbative, MatrixMatchesPrintedForm) {
  auto c = closed();
  for (auto [imp, s] : {std::pair{ImpuritySpec{-0.2, 0.05}, Sector::e}, std::pair{ImpuritySpec{-1.0, 0.3}, Sector::e},
                        std::pair{ImpuritySpec{6.0, 0.3}, Sector::g}})
    for (double e : {-0.01, -0.1, -0.5, -3.0}) {
      if (s == Sector::e && e < imp.delta) continue;
      auto m = projected_matrix(c, imp, s, e);
      auto p = printed_matrix(imp, e, 1 << 14);
      for (int i = 0; i < 4; ++i) EXPECT_NEAR(m[i], p[i], 1e-11 * std::max(1.0, std::abs(p[i]))) << e << " " << i;
    }
}

TEST(Perturbative, ProjectedRootAndNullVector) {
  auto c = closed();
  ImpuritySpec imp{-0.2, 0.05};
  auto sol = solve_projected_mode(c, imp, Sector::e);
  EXPECT_LT(sol.E1s, 0.0);
  EXPECT_GT(sol.E1s, imp.delta);
  EXPECT_LE(sol.det_residual, 1e-10);
  EXPECT_LE(sol.null_residual, 1e-10);

  // refine det on a grid around the root: a single sign change at E1s
  const double h = 1e-3 * std::abs(sol.E1s);
  EXPECT_LT(projected_det(c, imp, Sector::e, sol.E1s - h) * projected_det(c, imp, Sector::e, sol.E1s + h), 0.0);
  // and no shallower root
  for (int i = 1; i < 400; ++i) {
    double e = sol.E1s * std::pow(1e-6, i / 400.0);
    EXPECT_GT(projected_det(c, imp, Sector::e, e) * projected_det(c, imp, Sector::e, sol.E1s + 2 * h), 0.0) << e;
  }
}

TEST(Perturbative, ModeNormalizedInMomentumAndRealSpace) {
  auto c = closed();
  for (auto [imp, s] : {std::pair{ImpuritySpec{-0.2, 0.05}, Sector::e}, std::pair{ImpuritySpec{-0.5, 0.2}, Sector::e},
                        std::pair{ImpuritySpec{6.0, 0.5}, Sector::g}}) {
    auto sol = solve_projected_mode(c, imp, s);
    const int pts = 1 << 20;
    const double n2 = oracle::bz_average(
        [&](double k) { return std::pow(sol.phi_A_momentum(c.bath(), Momentum{k, 0, 0}), 2); }, pts);
    EXPECT_NEAR(n2, 1.0, 1e-9);
    EXPECT_NEAR(sol.phi_A.norm2(), 1.0, 1e-9);
    // printed amplitude with the null vector
    const double k = 0.37, ek = eps1d(k);
    const double printed =
        imp.omega * imp.omega / (2.0 * (sol.E1s - ek)) * (sol.C[1] - sol.C[0] / std::abs(imp.delta - ek));
    EXPECT_NEAR(sol.phi_A_momentum(c.bath(), Momentum{k, 0, 0}), printed, 1e-10 * std::abs(printed));
  }
}

TEST(Perturbative, WeakCouplingDelocalizes) {
  auto c = closed();
  double prev = -inf;
  for (double o : {0.2, 0.1, 0.05}) {
    auto sol = solve_projected_mode(c, {-0.2, o}, Sector::e);
    EXPECT_GT(sol.E1s, prev);
    prev = sol.E1s;
  }
  EXPECT_GT(prev, -1e-3);
}

TEST(Perturbative, EnergyLinearityInN) {
  auto c = closed();
  ImpuritySpec pg{-0.2, 0.02}, pe{6.0, 0.2};
  auto pg1 = perturbative_bound_state(c, pg, 1, Regime::PG);
  for (int n = 2; n <= 5; ++n) {
    auto a = perturbative_bound_state(c, pg, n, Regime::PG);
    auto b = perturbative_bound_state(c, pg, n - 1, Regime::PG);
    EXPECT_NEAR(a.EN - b.EN, a.mode->E1s, 4e-16 * std::abs(a.EN));
  }
  auto pg3 = perturbative_bound_state(c, pg, 3, Regime::PG);
  EXPECT_DOUBLE_EQ(pg3.EN, pg1.EN + 2.0 * pg3.mode->E1s);
  for (int n = 1; n <= 5; ++n) {
    auto s = perturbative_bound_state(c, pe, n, Regime::PE);
    EXPECT_DOUBLE_EQ(s.EN / n, s.mode->E1s);
  }
  EXPECT_THROW(perturbative_bound_state(c, pg, 2, Regime::PE), Error);
  EXPECT_THROW(perturbative_bound_state(c, {2.0, 0.1}, 2, Regime::PE), Error);
}

TEST(Perturbative, SingleExcitationMatchesSebs) {
  auto c = closed();
  for (auto imp : {ImpuritySpec{-0.2, 0.01}, ImpuritySpec{-0.2, 0.02}, ImpuritySpec{-1.0, 0.05}}) {
    auto p = perturbative_bound_state(c, imp, 1, Regime::PG);
    auto s = solve_sebs(c, imp, false);
    EXPECT_LE(std::abs(p.EN - s.E1), 10.0 * std::pow(imp.omega, 4) / std::pow(std::abs(imp.delta), 3));
    // correction operator: Omega R(Delta, j), norm Omega^2 N(Delta, Delta)
    EXPECT_NEAR(p.C_e.norm2(), imp.omega * imp.omega * c.n_mu_nu(imp.delta, imp.delta), 1e-12);
  }
}

TEST(Perturbative, DgMatchesDirectSum) {
  auto c = closed();
  ImpuritySpec imp{6.0, 0.4};
  auto p = perturbative_bound_state(c, imp, 3, Regime::PE);
  const double direct = imp.omega * std::sqrt(3.0) * oracle::bz_average([&](double k) {
                          return p.mode->phi_A_momentum(c.bath(), Momentum{k, 0, 0}) / (imp.delta - eps1d(k));
                        }, 1 << 16);
  EXPECT_NEAR(p.D_g, direct, 1e-10 * std::abs(direct));
}

TEST(Perturbative, JaynesCummingsExamples) {
  EXPECT_DOUBLE_EQ(jc_limit({0.0, 1.3}, 1).EN, -1.3);
  EXPECT_DOUBLE_EQ(jc_limit({0.0, 1.3}, 4).EN, -2.6);
  EXPECT_DOUBLE_EQ(jc_limit({-0.7, 0.0}, 3).EN, -0.7);
  for (int n = 1; n <= 4; ++n) {
    auto s = jc_limit({0.4, 0.9}, n);
    EXPECT_NEAR(s.jc_e * s.jc_e + s.jc_g * s.jc_g, 1.0, 1e-15);
    // eigenvector of [[Delta, sqrt(N) Omega], [sqrt(N) Omega, 0]]; shift by (N-1) cancels
    const double g = std::sqrt(n) * 0.9;
    EXPECT_NEAR(0.4 * s.jc_e + g * s.jc_g, s.EN * s.jc_e, 1e-14);
    EXPECT_NEAR(g * s.jc_e, s.EN * s.jc_g, 1e-14);
  }
}
