#include <gtest/gtest.h>

#include <random>

#include "ebs/spectral.hpp"
#include "oracles.hpp"

using namespace ebs;

namespace {

SpectralContext closed() { return SpectralContext::automatic(tight_binding_1d()); }
SpectralContext quad1d() { return SpectralContext(tight_binding_1d(), Quadrature{}); }

double trap_sigma(double e, double J = 1.0) {
  return oracle::bz_average([&](double k) { return 1.0 / (e - 2.0 * J * (1.0 - std::cos(k))); }, 1 << 14);
}

}  // namespace

TEST(SelfEnergy, ClosedFormAtMinusOne) {
  const double expect = -1.0 / std::sqrt(5.0);
  EXPECT_NEAR(closed().self_energy(-1.0), expect, 1e-15);
  EXPECT_NEAR(quad1d().self_energy(-1.0), expect, 1e-12);
  EXPECT_NEAR(trap_sigma(-1.0), expect, 1e-13);
}

TEST(SelfEnergy, VanishesFarBelowBand) {
  auto c = closed();
  double prev = c.self_energy(-1e2);
  for (double e : {-1e4, -1e6, -1e9}) {
    double s = c.self_energy(e);
    EXPECT_LT(s, 0.0);
    EXPECT_GT(s, prev);
    prev = s;
  }
  EXPECT_GT(prev, -2e-9);
}

TEST(SelfEnergy, AboveBandPositive) {
  auto c = closed();
  EXPECT_NEAR(c.self_energy(5.0), 1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(c.self_energy(5.0), trap_sigma(5.0), 1e-12);
}

TEST(SelfEnergy, ClosedMatchesQuadratureRandom) {
  auto c = closed();
  auto q = quad1d();
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(std::log(1e-3), std::log(10.0));
  for (int i = 0; i < 100; ++i) {
    double e = -std::exp(u(rng));
    EXPECT_NEAR(c.self_energy(e), q.self_energy(e), 1e-10) << "E = " << e;
  }
}

// Sigma itself falls as E rises towards the band; -Sigma, and with it F1, rises.
TEST(SelfEnergy, MonotoneBelowBand) {
  for (auto ctx : {closed(), quad1d(), SpectralContext(tight_binding(3))}) {
    double prev = 0.0;
    for (int i = 0; i <= 200; ++i) {
      double e = -10.0 * std::pow(10.0, -4.0 * i / 200.0);
      double s = ctx.self_energy(e);
      EXPECT_LT(s, prev);
      prev = s;
    }
  }
}

TEST(SelfEnergy, InBandRefused) {
  for (auto ctx : {closed(), quad1d()}) {
    try {
      ctx.self_energy(1.0);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::in_band);
    }
  }
  EXPECT_THROW(quad1d().self_energy(-1e-8), Error);
}

TEST(SelfEnergy, LatticeSumConvergesToContinuum) {
  auto c = closed();
  const double E = -0.3;
  double prev_err = inf;
  for (int L : {11, 21, 41, 81, 161}) {
    SpectralContext ls(tight_binding_1d(), LatticeSum{LatticeGrid{1, L, Boundary::periodic}});
    double err = std::abs(ls.self_energy(E) - c.self_energy(E));
    EXPECT_LE(err, 5.0 / L);
    if (prev_err > 1e-14) {
      EXPECT_LT(err, prev_err);
    }
    prev_err = err;
    double direct = 0.0;
    for (int n = 0; n < L; ++n) direct += 1.0 / (E - 2.0 * (1.0 - std::cos(2 * pi * n / L)));
    EXPECT_NEAR(ls.self_energy(E), direct / L, 1e-13);
  }
}

TEST(SelfEnergy, ThreeDimensionalBandEdge) {
  SpectralContext c3(tight_binding(3), Quadrature{});
  EXPECT_NEAR(c3.self_energy(-1e-5), -0.253, 1e-3);
  // A direct 3D trapezoid of the 1D closed form along the first axis.
  const int M = 128;
  double s = 0.0;
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b) {
      double er = 2.0 * (2.0 - std::cos(2 * pi * (a + 0.5) / M) - std::cos(2 * pi * (b + 0.5) / M));
      double e = -1.0 - er;
      s += -1.0 / std::sqrt(e * (e - 4.0));
    }
  EXPECT_NEAR(c3.self_energy(-1.0), s / (M * M), 1e-9);
}

TEST(CapitalI0, DivergenceAndWatsonIntegral) {
  EXPECT_TRUE(std::isinf(closed().capital_i0()));
  EXPECT_TRUE(std::isinf(SpectralContext(tight_binding(2)).capital_i0()));
  double i0 = SpectralContext(tight_binding(3)).capital_i0();
  EXPECT_NEAR(i0, 0.253, 1e-3);
  EXPECT_NEAR(i0, oracle::watson_i0(), 1e-8);
  double i0_half = SpectralContext(tight_binding(3, 0.5)).capital_i0();
  EXPECT_NEAR(i0_half, 2.0 * i0, 1e-8);
}

TEST(CapitalI0, QuadraticAndTabulated) {
  EXPECT_TRUE(std::isinf(SpectralContext(BathSpec{1, Quadratic{}, PointCoupling{}}).capital_i0()));
  EXPECT_TRUE(std::isinf(SpectralContext(BathSpec{2, Quadratic{}, PointCoupling{}}).capital_i0()));
  EXPECT_TRUE(std::isinf(SpectralContext(BathSpec{3, Quadratic{}, PointCoupling{}}).capital_i0()));
  double i0 = SpectralContext(BathSpec{3, Quadratic{2.0, 3.0}, PointCoupling{}}).capital_i0();
  EXPECT_NEAR(i0, 3.0 / (2.0 * pi * pi * 2.0), 1e-14);

  TabulatedDispersion flat{4, {0.0, 0.0, 1.0, 1.0}};
  try {
    SpectralContext(BathSpec{1, flat, PointCoupling{}}).capital_i0();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ill_posed_bath);
  }
  TabulatedDispersion ok{4, {0.0, 1.0, 2.0, 1.0}};
  EXPECT_NEAR(SpectralContext(BathSpec{1, ok, PointCoupling{}}).capital_i0(), (1.0 + 0.5 + 1.0) / 4.0, 1e-15);
}

TEST(Quadratic, SelfEnergyClosedForms) {
  const double c = 1.3;
  SpectralContext q1(BathSpec{1, Quadratic{c, std::nullopt}, PointCoupling{}});
  for (double e : {-0.01, -0.5, -4.0}) EXPECT_NEAR(q1.self_energy(e), -1.0 / (2.0 * std::sqrt(c * -e)), 1e-9);
  const double lam = 2.5;
  SpectralContext q3(BathSpec{3, Quadratic{c, lam}, PointCoupling{}});
  for (double e : {-0.01, -0.5, -4.0}) {
    double a = std::sqrt(-e / c);
    double expect = -(lam - a * std::atan(lam / a)) / (2.0 * pi * pi * c);
    EXPECT_NEAR(q3.self_energy(e), expect, 1e-10);
  }
}

TEST(WAlpha, Identities) {
  auto c = closed();
  ImpuritySpec imp{0.3, 1.0};
  for (double e : {-0.1, -1.0, -7.0}) EXPECT_DOUBLE_EQ(w_alpha(c, imp, e, 1), 0.5 * c.self_energy(e));
  EXPECT_NEAR(w_alpha(c, imp, -1.0, 1), -1.0 / (2.0 * std::sqrt(5.0)), 1e-15);
  EXPECT_EQ(w_alpha(c, ImpuritySpec{0.3, 0.0}, -1.0, 2), 0.0);
  // w2 against a trapezoid of eps / (E - eps)^2.
  double ref = oracle::bz_average([](double k) {
    double eps = 2.0 * (1.0 - std::cos(k));
    return eps / ((-1.0 - eps) * (-1.0 - eps));
  });
  EXPECT_NEAR(w_alpha(c, imp, -1.0, 2), 0.5 * ref, 1e-13);
}

TEST(NMuNu, CoincidentPoleAtMinusOne) {
  // d/dE of -Sigma at E = -1 equals (2J - E) / s^3 = 3 / (5 sqrt 5).
  const double expect = 3.0 / (5.0 * std::sqrt(5.0));
  EXPECT_NEAR(closed().n_mu_nu(-1.0, -1.0), expect, 1e-15);
  EXPECT_NEAR(quad1d().n_mu_nu(-1.0, -1.0), expect, 1e-11);
  double h = 1e-4;
  auto c = closed();
  double fd = -(c.self_energy(-1.0 + h) - c.self_energy(-1.0 - h)) / (2 * h);
  EXPECT_NEAR(c.n_mu_nu(-1.0, -1.0), fd, 1e-8);
}

TEST(NMuNu, PartialFractionsAndSymmetry) {
  auto c = closed();
  auto q = quad1d();
  double pf = (c.self_energy(-1.0) - c.self_energy(-2.0)) / (-2.0 - -1.0);
  EXPECT_NEAR(c.n_mu_nu(-1.0, -2.0), pf, 1e-15);
  EXPECT_NEAR(q.n_mu_nu(-1.0, -2.0), pf, 1e-10);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-6.0, -1e-3);
  for (int i = 0; i < 50; ++i) {
    double a = u(rng), b = u(rng);
    EXPECT_EQ(c.n_mu_nu(a, b), c.n_mu_nu(b, a));
    EXPECT_EQ(q.n_mu_nu(a, b), q.n_mu_nu(b, a));
    EXPECT_GT(c.n_mu_nu(a, b), 0.0);
    double ref = oracle::bz_average(
        [&](double k) {
          double eps = 2.0 * (1.0 - std::cos(k));
          return 1.0 / ((a - eps) * (b - eps));
        },
        1 << 16);
    EXPECT_NEAR(c.n_mu_nu(a, b), ref, 1e-9 * std::max(1.0, ref));
  }
  // Opposite sides of the band.
  EXPECT_NEAR(c.n_mu_nu(-1.0, 6.0), q.n_mu_nu(-1.0, 6.0), 1e-12);
}

TEST(EpsWeighted, ReductionIdentity) {
  auto c = closed();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-5.0, -0.01);
  for (int i = 0; i < 40; ++i) {
    double a = u(rng), b = u(rng);
    EXPECT_NEAR(c.eps_weighted(a, b), a * c.n_mu_nu(a, b) - c.self_energy(b), 1e-12);
  }
  for (double a : {4.5, 7.0})
    EXPECT_NEAR(c.eps_weighted(a, a + 1.0), a * c.n_mu_nu(a, a + 1.0) - c.self_energy(a + 1.0), 1e-12);
  SpectralContext c2(tight_binding(2));
  EXPECT_NEAR(c2.eps_weighted(-0.5, -1.5), -0.5 * c2.n_mu_nu(-0.5, -1.5) - c2.self_energy(-1.5), 1e-9);
}

TEST(Resolvent, SiteFormsAgree) {
  auto c = closed();
  auto q = quad1d();
  for (double z : {-0.05, -1.0, 5.0})
    for (long r : {0L, 1L, 4L, -3L}) {
      double ref = oracle::bz_average([&](double k) { return std::cos(k * r) / (z - 2.0 * (1.0 - std::cos(k))); },
                                      1 << 14);
      EXPECT_NEAR(c.resolvent_site(z, r), ref, 1e-12);
      EXPECT_NEAR(q.resolvent_site(z, r), ref, 1e-10);
    }
  // sum_j R(z, j)^2 = N(z, z)
  const double z = -0.4;
  double s = 0.0;
  for (long j = -400; j <= 400; ++j) s += std::pow(c.resolvent_site(z, j), 2);
  EXPECT_NEAR(s, c.n_mu_nu(z, z), 1e-13);
}

TEST(Resolvent, ProfileTailCriterion) {
  auto c = closed();
  const double z = -0.01;
  auto rp = resolvent_profile(c, {{z, 1.0}}, c.n_mu_nu(z, z), 1e-10);
  EXPECT_LE(rp.tail, 1e-10);
  EXPECT_NEAR(rp.profile.norm2(), c.n_mu_nu(z, z), 1e-9 * c.n_mu_nu(z, z));
}

TEST(Context, ModeValidation) {
  EXPECT_THROW(SpectralContext(tight_binding(2), ClosedForm{}), Error);
  EXPECT_THROW(SpectralContext(tight_binding_1d(), Quadrature{0.0, 1e-8}), Error);
  EXPECT_THROW(SpectralContext(tight_binding_1d(), LatticeSum{LatticeGrid{1, 9, Boundary::open}}), Error);
}

TEST(Context, TabulatedMatchesLatticeSum) {
  const int P = 16;
  TabulatedDispersion tab{P, {}};
  for (int n = 0; n < P; ++n) tab.values.push_back(2.0 * (1.0 - std::cos(2 * pi * n / P)));
  tab.values[0] = 0.0;
  SpectralContext t(BathSpec{1, tab, PointCoupling{}});
  SpectralContext ls(tight_binding_1d(), LatticeSum{LatticeGrid{1, P, Boundary::periodic}});
  for (double e : {-0.2, -2.0}) {
    EXPECT_NEAR(t.self_energy(e), ls.self_energy(e), 1e-14);
    EXPECT_NEAR(t.n_mu_nu(e, 2 * e), ls.n_mu_nu(e, 2 * e), 1e-14);
  }
}
