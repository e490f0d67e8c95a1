#include <gtest/gtest.h>

#include <random>

#include "ebs/ed_oracle.hpp"
#include "ebs/exact_fewbody.hpp"
#include "ebs/variational.hpp"
#include "oracles.hpp"

using namespace ebs;

namespace {
SpectralContext ctx1d() { return SpectralContext::automatic(tight_binding_1d()); }
LatticeGrid ring(int L) { return LatticeGrid{1, L, Boundary::periodic}; }

std::vector<int> occupations(const SectorBasis& b, std::size_t i, int& excited) {
  bool e;
  int n;
  SectorBasis::Positions p;
  b.unrank(i, e, p, n);
  std::vector<int> occ(b.sites(), 0);
  for (int a = 0; a < n; ++a) occ[p[a]] += 1;
  excited = e;
  return occ;
}
}  // namespace

TEST(SectorBasis, DimensionsAndRankRoundTrip) {
  SectorBasis b(3, 7, Boundary::periodic);
  // C(L+N-1, N) + C(L+N-2, N-1)
  EXPECT_EQ(b.g_dimension(), 84u);
  EXPECT_EQ(b.dimension(), 84u + 28u);
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    bool e;
    int n;
    SectorBasis::Positions p;
    b.unrank(i, e, p, n);
    EXPECT_EQ(n, e ? 2 : 3);
    for (int a = 1; a < n; ++a) EXPECT_LE(p[a - 1], p[a]);
    EXPECT_EQ(b.rank(e, p, n), i);
  }
  EXPECT_THROW(SectorBasis(0, 7, Boundary::periodic), Error);
  EXPECT_THROW(SectorBasis(9, 7, Boundary::periodic), Error);
}

TEST(SectorHamiltonian, SymmetricAndMatchesDenseOracle) {
  const int L = 7, N = 3;
  const ImpuritySpec imp{0.3, 0.7};
  SectorBasis b(N, L, Boundary::periodic);
  auto H = build_sector_hamiltonian(b, tight_binding_1d(), ring(L), imp).dense();
  EXPECT_LE((H - H.transpose()).norm(), 1e-15);
  auto ref = oracle::ring_ground_state(N, L, imp.delta, imp.omega);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  EXPECT_NEAR(es.eigenvalues()(0), ref.energy, 1e-12);
  // element-wise, through the occupation labels
  auto rec = ground_state(ctx1d(), imp, ring(L), N);
  double ov = 0.0;
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    int e;
    auto occ = occupations(b, i, e);
    ov += rec.state(i) * ref.amplitude(e, occ);
  }
  EXPECT_NEAR(std::abs(ov), 1.0, 1e-10);
}

TEST(GroundState, SingleExcitationIsTheArrowhead) {
  for (auto [d, o] : {std::pair{-0.2, 0.3}, std::pair{0.0, 1.0}, std::pair{0.5, 0.2}}) {
    auto m = diagonalize_single(ctx1d(), {d, o}, ring(31));
    auto rec = ground_state(ctx1d(), {d, o}, ring(31), 1);
    EXPECT_NEAR(rec.energy, m.E[0], 1e-12);
    EXPECT_NEAR(rec.population_e, m.u[0] * m.u[0], 1e-10);
  }
}

TEST(GroundState, DecoupledEnergies) {
  EXPECT_NEAR(ground_state(ctx1d(), {0.4, 0.0}, ring(11), 3).energy, 0.0, 1e-12);
  EXPECT_NEAR(ground_state(ctx1d(), {-0.4, 0.0}, ring(11), 3).energy, -0.4, 1e-12);
}

TEST(GroundState, TwoBodyExactSolution) {
  const int L = 41;
  for (auto [d, o] : {std::pair{0.0, 1.0}, std::pair{-0.2, 0.5}, std::pair{0.2, 0.2}}) {
    auto two = solve_two_body(diagonalize_single(ctx1d(), {d, o}, ring(L)));
    auto rec = ground_state(ctx1d(), {d, o}, ring(L), 2);
    EXPECT_NEAR(rec.energy, two.E2, 1e-10);
    EXPECT_LE(rec.residual, 1e-10);
  }
}

TEST(GroundState, SolversAndParityAgree) {
  const ImpuritySpec imp{0.1, 0.4};
  const auto g = ring(31);
  EdOptions a, b, c;
  b.solver = EdSolver::arpack;
  c.parity = false;
  auto ra = ground_state(ctx1d(), imp, g, 3, a);
  auto rb = ground_state(ctx1d(), imp, g, 3, b);
  auto rc = ground_state(ctx1d(), imp, g, 3, c);
  EXPECT_NEAR(ra.energy, rb.energy, 1e-11);
  EXPECT_NEAR(ra.energy, rc.energy, 1e-11);
  EXPECT_NEAR(std::abs(ra.state.dot(rb.state)), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(ra.state.dot(rc.state)), 1.0, 1e-9);
  EXPECT_GT(ra.matvecs, 0u);
}

TEST(GroundState, DensitiesSymmetricAndNormalized) {
  for (auto bc : {Boundary::periodic, Boundary::open}) {
    LatticeGrid g{1, 25, bc};
    EdOptions opt;
    opt.correlation = true;
    auto rec = ground_state(ctx1d(), {0.0, 0.6}, g, 3, opt);
    double ng = 0.0, ne = 0.0;
    std::map<long, double> byx;
    for (std::size_t i = 0; i < rec.density_g.site.size(); ++i) {
      ng += rec.density_g.value[i];
      ne += rec.density_e.value[i];
      byx[rec.density_g.site[i]] = rec.density_g.value[i];
    }
    EXPECT_NEAR(ng + ne + rec.population_e, 3.0, 1e-10);
    EXPECT_NEAR(ne, 2.0 * rec.population_e, 1e-10);
    for (auto [x, v] : byx)
      if (byx.count(-x)) {
        EXPECT_NEAR(v, byx[-x], 1e-10) << x;
      }
    EXPECT_NEAR(rec.G.trace(), 3.0, 1e-10);
    EXPECT_LE((rec.G - rec.G.transpose()).norm(), 1e-12);
    EXPECT_NEAR(rec.G(0, 0), rec.population_e, 1e-12);
  }
}

TEST(GroundState, OpenAndPeriodicAgreeWhenLocalized) {
  // the boundary correction shrinks with L
  auto gap = [](int L) {
    auto p = ground_state(ctx1d(), {0.0, 1.0}, ring(L), 2);
    auto o = ground_state(ctx1d(), {0.0, 1.0}, LatticeGrid{1, L, Boundary::open}, 2);
    EXPECT_GE(o.energy, p.energy - 1e-12);
    return std::pair{o.energy - p.energy, std::abs(o.xi_g - p.xi_g)};
  };
  auto [e21, x21] = gap(21);
  auto [e41, x41] = gap(41);
  EXPECT_LT(e41, 0.1 * e21);
  EXPECT_LT(x41, 0.1 * x21);
  EXPECT_LT(e41, 1e-5);
}

TEST(Correlation, SingleParticleIsPure) {
  EdOptions opt;
  opt.correlation = true;
  auto ev = correlation_spectrum(ground_state(ctx1d(), {0.0, 0.5}, ring(21), 1, opt));
  EXPECT_NEAR(ev[0], 1.0, 1e-12);
  for (std::size_t i = 1; i < ev.size(); ++i) EXPECT_NEAR(ev[i], 0.0, 1e-12);
  EXPECT_THROW(correlation_spectrum(ground_state(ctx1d(), {0.0, 0.5}, ring(21), 1)), Error);
}

TEST(Correlation, MatchesOccupationBasisOracle) {
  // mode 0 is the impurity, 1 + j the bath site j
  for (auto [N, L] : {std::pair{1, 7}, std::pair{2, 7}, std::pair{3, 7}}) {
    const ImpuritySpec imp{0.2, 0.8};
    auto ref = oracle::ring_ground_state(N, L, imp.delta, imp.omega);
    std::map<std::pair<int, std::vector<int>>, double> c;
    for (std::size_t i = 0; i < ref.basis.size(); ++i) c[ref.basis[i]] = ref.state(i);
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(L + 1, L + 1);
    for (const auto& [key, amp] : c) {
      const auto& [e, occ] = key;
      if (e) G(0, 0) += amp * amp;
      for (int m = 0; m < L; ++m) {
        if (occ[m] == 0) continue;
        for (int j = 0; j < L; ++j) {
          auto o = occ;
          o[m] -= 1;
          o[j] += 1;
          G(1 + j, 1 + m) += c.at({e, o}) * amp * std::sqrt(double(occ[m]) * o[j]);
        }
        if (!e) {
          auto o = occ;
          o[m] -= 1;
          const double v = c.at({1, o}) * amp * std::sqrt(double(occ[m]));
          G(0, 1 + m) += v;
          G(1 + m, 0) += v;
        }
      }
    }
    EdOptions opt;
    opt.correlation = true;
    auto rec = ground_state(ctx1d(), imp, ring(L), N, opt);
    EXPECT_LE((rec.G - G).cwiseAbs().maxCoeff(), 1e-12) << N;
  }
}

TEST(Correlation, TwoDominantEigenvalues) {
  EdOptions opt;
  opt.correlation = true;
  for (int N : {2, 4}) {
    auto ev = correlation_spectrum(ground_state(ctx1d(), {0.0, 0.5}, ring(41), N, opt));
    EXPECT_GE(ev[0] + ev[1], 0.99 * N) << N;
    double s = 0.0;
    for (double v : ev) {
      EXPECT_GT(v, -1e-12);
      s += v;
    }
    EXPECT_NEAR(s, N, 1e-10);
  }
}

TEST(GroundState, VariationalIsAnUpperBound) {
  const auto g = ring(41);
  SpectralContext ls(tight_binding_1d(), LatticeSum{g});
  VariationalOptions vo;
  vo.with_profiles = false;
  for (auto [d, o] : {std::pair{-0.2, 0.3}, std::pair{0.0, 0.5}, std::pair{0.2, 1.0}})
    for (int N : {2, 3}) {
      auto rec = ground_state(ctx1d(), {d, o}, g, N);
      auto v = optimize(ls, {d, o}, N, vo);
      EXPECT_GE(v.EN, rec.energy - 1e-10) << d << " " << o << " " << N;
      EXPECT_LE(v.EN - rec.energy, 0.02 * std::abs(rec.energy));
    }
}

TEST(GroundState, Errors) {
  EdOptions cap;
  cap.nnz_cap = 1000;
  try {
    ground_state(ctx1d(), {0.0, 0.5}, ring(41), 3, cap);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::dimension_cap);
  }
  SpectralContext c2(tight_binding(2));
  EXPECT_THROW(ground_state(c2, {0.0, 0.5}, LatticeGrid{2, 5, Boundary::periodic}, 2), Error);
  BathSpec quad{1, Quadratic{}, PointCoupling{}};
  EXPECT_THROW(ground_state(SpectralContext(quad, LatticeSum{ring(11)}), {0.0, 0.5}, ring(11), 2), Error);
}

TEST(GroundState, ExtendedCouplingProfile) {
  // symmetric three-site coupling: compare against a direct dense build
  BathSpec bath{1, TightBinding{1.0}, TabulatedCoupling{{{{-1, 0, 0}, 0.5}, {{0, 0, 0}, std::sqrt(0.5)}, {{1, 0, 0}, 0.5}}}};
  const auto g = ring(9);
  SectorBasis b(2, 9, Boundary::periodic);
  auto H = build_sector_hamiltonian(b, bath, g, {0.0, 0.5}).dense();
  EXPECT_LE((H - H.transpose()).norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  auto rec = ground_state(SpectralContext(bath, LatticeSum{g}), {0.0, 0.5}, g, 2);
  EXPECT_NEAR(rec.energy, es.eigenvalues()(0), 1e-12);
  // the single-excitation block equals the arrowhead with eta_k
  auto m = diagonalize_single(SpectralContext(bath, LatticeSum{g}), {0.0, 0.5}, g);
  EXPECT_NEAR(ground_state(SpectralContext(bath, LatticeSum{g}), {0.0, 0.5}, g, 1).energy, m.E[0], 1e-12);
}
