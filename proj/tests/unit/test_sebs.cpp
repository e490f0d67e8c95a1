#include <gtest/gtest.h>

#include <random>

#include "ebs/sebs.hpp"
#include "oracles.hpp"

using namespace ebs;

namespace {
SpectralContext closed(double J = 1.0) { return SpectralContext::automatic(tight_binding_1d(J)); }
}  // namespace

TEST(Sebs, DecoupledImpurity) {
  auto s = solve_sebs(closed(), {-0.5, 0.0});
  EXPECT_EQ(s.E1, -0.5);
  EXPECT_EQ(s.u_B, 1.0);
  EXPECT_EQ(s.f_B.norm2(), 0.0);
}

TEST(Sebs, QuarticRootAtZeroDetuning) {
  auto s = solve_sebs(closed(), {0.0, 1.0});
  // x^4 + 4x^3 - 1 = 0 with E1 = -x
  auto p = [](double x) { return x * x * x * x + 4 * x * x * x - 1.0; };
  double x = oracle::bisect(p, 0.0, 1.0);
  EXPECT_NEAR(s.E1, -x, 1e-13);
  EXPECT_NEAR(s.E1, -0.6012, 1e-4);
  EXPECT_LE(s.residual, 1e-12);
}

TEST(Sebs, AgreesWithPolynomialOracleOnGrid) {
  auto c = closed();
  for (double d : {-1.0, -0.5, -0.2, 0.0, 0.2})
    for (double o : {0.05, 0.1, 0.2, 0.4, 0.7, 1.0, 1.5, 2.0}) {
      auto s = solve_sebs(c, {d, o}, false);
      EXPECT_NEAR(s.E1, oracle::sebs_energy_1d(d, o), 1e-10) << d << " " << o;
      EXPECT_LE(s.residual, 1e-12 * std::max({1.0, std::abs(d), o}));
    }
}

TEST(Sebs, QuadratureModeAgreesWithIndependentBisection) {
  SpectralContext q(tight_binding_1d(), Quadrature{});
  ImpuritySpec imp{0.0, 1.0};
  auto s = solve_sebs(q, imp, false);
  double ref = oracle::bisect([&](double e) { return e - imp.delta - q.self_energy(e); }, -3.0, -0.01);
  EXPECT_NEAR(s.E1, ref, 1e-11);
}

TEST(Sebs, JaynesCummingsNarrowBand) {
  auto s = solve_sebs(closed(1e-6), {0.0, 1.0}, false);
  EXPECT_NEAR(s.E1, -1.0, 1e-5);
}

TEST(Sebs, ExistenceThreeDimensions) {
  SpectralContext c3(tight_binding(3));
  EXPECT_FALSE(sebs_exists(c3, {1.0, 1.0}));
  EXPECT_TRUE(sebs_exists(c3, {0.1, 1.0}));
  try {
    solve_sebs(c3, {1.0, 1.0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_bound_state);
  }
  auto s = solve_sebs(c3, {0.1, 1.0});
  EXPECT_LT(s.E1, 0.0);
  EXPECT_LE(std::abs(sebs_secular(c3, {0.1, 1.0}, s.E1)), 1e-10);
}

TEST(Sebs, AlwaysExistsInOneDimension) {
  auto c = closed();
  for (double d : {-3.0, 0.0, 0.5, 3.9, 10.0})
    for (double o : {0.01, 1.0}) EXPECT_TRUE(sebs_exists(c, {d, o}));
}

TEST(Sebs, SingleSignChange) {
  auto c = closed();
  for (auto imp : {ImpuritySpec{-0.5, 0.3}, ImpuritySpec{0.0, 1.0}, ImpuritySpec{0.2, 2.0}}) {
    const double lo = -10.0 * std::max({1.0, std::abs(imp.delta), imp.omega});
    int changes = 0;
    double prev = sebs_secular(c, imp, lo);
    for (int i = 1; i < 1000; ++i) {
      double e = lo + (0.0 - lo) * i / 1000.0;
      double f = sebs_secular(c, imp, e);
      if ((f < 0) != (prev < 0)) ++changes;
      prev = f;
    }
    EXPECT_EQ(changes, 1);
  }
}

TEST(Sebs, PerturbativeLambShift) {
  auto c = closed();
  for (double o : {1e-3, 3e-3, 1e-2}) {
    auto s = solve_sebs(c, {-0.2, o}, false);
    double pert = -0.2 + o * o * c.self_energy(-0.2);
    EXPECT_LE(std::abs(s.E1 - pert), 10.0 * std::pow(o, 4));
  }
}

TEST(Sebs, NormalizationAndEnvelope) {
  auto c = closed();
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> ud(-1.0, 0.3), uo(0.05, 2.0);
  for (int i = 0; i < 30; ++i) {
    ImpuritySpec imp{ud(rng), uo(rng)};
    auto s = solve_sebs(c, imp);
    EXPECT_NEAR(s.u_B * s.u_B + s.f_B.norm2(), 1.0, 1e-10);
    EXPECT_GT(s.u_B, 0.0);
    EXPECT_LE(s.u_B, 1.0);
    // strictly decreasing |f_B| away from the impurity
    std::map<long, double> m;
    for (std::size_t k = 0; k < s.f_B.site.size(); ++k) m[s.f_B.site[k]] = std::abs(s.f_B.value[k]);
    for (long j = 0; j < 20; ++j) {
      EXPECT_GT(m[j], m[j + 1]);
      EXPECT_GT(m[-j], m[-j - 1]);
    }
  }
}

TEST(Sebs, LocalizationLengthGeometricOracle) {
  auto c = closed();
  for (auto imp : {ImpuritySpec{0.0, 1.0}, ImpuritySpec{-0.2, 0.1}, ImpuritySpec{0.2, 0.3}}) {
    auto s = solve_sebs(c, imp);
    double x = tb1d::decay_factor(s.E1, 1.0);
    // x + 1/x = 2 - E1/J
    EXPECT_NEAR(x + 1.0 / x, 2.0 - s.E1, 1e-12);
    EXPECT_NEAR(sebs_localization_length(s), oracle::geometric_xi(x), 1e-8 * std::max(1.0, oracle::geometric_xi(x)));
  }
  auto deep = solve_sebs(c, {-1e4, 1.0});
  EXPECT_LT(sebs_localization_length(deep), 1e-3);
  SebsSolution onsite;
  onsite.f_B = SiteProfile{{0}, {0.3}};
  EXPECT_EQ(sebs_localization_length(onsite), 0.0);
  onsite.tail = 1e-3;
  EXPECT_THROW(sebs_localization_length(onsite), Error);
}

TEST(Sebs, MomentumClosureMatchesRealSpace) {
  auto c = closed();
  ImpuritySpec imp{0.0, 0.8};
  auto s = solve_sebs(c, imp);
  for (long j : {0L, 2L, 5L}) {
    double ft = oracle::bz_average([&](double k) { return std::cos(k * j) * s.f_B_momentum(c.bath(), Momentum{k, 0, 0}); },
                                   1 << 14);
    auto it = std::find(s.f_B.site.begin(), s.f_B.site.end(), j);
    EXPECT_NEAR(s.f_B.value[it - s.f_B.site.begin()], ft, 1e-12);
  }
}

TEST(Sebs, LatticeSumRootBelowZero) {
  SpectralContext ls(tight_binding_1d(), LatticeSum{LatticeGrid{1, 41, Boundary::periodic}});
  auto s = solve_sebs(ls, {0.2, 0.05});
  EXPECT_LT(s.E1, 0.0);
  EXPECT_NEAR(s.u_B * s.u_B + s.f_B.norm2(), 1.0, 1e-12);
  EXPECT_EQ(s.f_B.site.size(), 41u);
}
