#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <vector>

#include "ebs/detail/roots.hpp"
#include "ebs/error.hpp"
#include "ebs/model.hpp"
#include "ebs/spectral.hpp"

namespace ebs {

// Single-excitation eigenmodes of the (L+1)x(L+1) arrowhead matrix on a
// periodic ring; index 0 of the matrix is the impurity.
struct SingleParticleModes {
  int L{0};
  ImpuritySpec imp{};
  double J{1.0};
  std::vector<double> k{}, eps{}, eta{};  // k_n = 2 pi n / L
  std::vector<double> E{};                // ascending, L+1 values
  std::vector<double> u{};                // impurity components, u >= 0
  Eigen::MatrixXd f{};                    // f(lambda, n)
  double secular_residual{0.0};
  // modes with u^2 > 0, used by every Green-function sum
  std::vector<double> Ew{}, w{};
};

inline SingleParticleModes diagonalize_single(const SpectralContext& ctx, const ImpuritySpec& imp,
                                              const LatticeGrid& grid) {
  validate(imp);
  validate(grid);
  const auto& bath = ctx.bath();
  if (bath.dimension != 1 || grid.dimension != 1) fail(ErrorCode::unsupported, "exact solutions are 1D only");
  if (grid.boundary != Boundary::periodic) fail(ErrorCode::unsupported, "exact solutions need momentum labels");
  SingleParticleModes m;
  m.L = grid.sites;
  m.imp = imp;
  m.J = ctx.scale();
  const int L = m.L;
  const double sv = std::sqrt(static_cast<double>(L));
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(L + 1, L + 1);
  H(0, 0) = imp.delta;
  for (int n = 0; n < L; ++n) {
    const double k = 2.0 * pi * n / L;
    const cplx eta = coupling_fourier(bath, grid, Momentum{k, 0, 0});
    if (std::abs(eta.imag()) > 1e-12 * (1.0 + std::abs(eta))) fail(ErrorCode::unsupported, "complex eta_k");
    m.k.push_back(k);
    m.eps.push_back(dispersion_eval(bath, k));
    m.eta.push_back(eta.real());
    H(n + 1, n + 1) = m.eps.back();
    H(0, n + 1) = H(n + 1, 0) = imp.omega * eta.real() / sv;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  const auto& V = es.eigenvectors();
  m.f.resize(L + 1, L);
  const double hn = std::max(H.norm(), 1e-300);
  for (int l = 0; l <= L; ++l) {
    double sgn = V(0, l) < 0.0 ? -1.0 : 1.0;
    m.E.push_back(es.eigenvalues()(l));
    m.u.push_back(sgn * V(0, l));
    for (int n = 0; n < L; ++n) m.f(l, n) = sgn * V(n + 1, l);
    m.secular_residual =
        std::max(m.secular_residual, (H * V.col(l) - es.eigenvalues()(l) * V.col(l)).norm() / hn);
    const double w = m.u.back() * m.u.back();
    if (w > 1e-24) {
      m.Ew.push_back(m.E.back());
      m.w.push_back(w);
    }
  }
  return m;
}

// Lehmann form sum_l u_l^2 / (omega - E_l).
inline double g_b0(const SingleParticleModes& m, double omega) {
  double s = 0.0;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    const double d = omega - m.Ew[l];
    if (std::abs(d) < 1e-12 * m.J) fail(ErrorCode::pole_hit, "G_b0 evaluated on a pole");
    s += m.w[l] / d;
  }
  return s;
}

inline double g_b0_derivative(const SingleParticleModes& m, double omega) {
  double s = 0.0;
  for (std::size_t l = 0; l < m.w.size(); ++l) {
    const double d = omega - m.Ew[l];
    if (std::abs(d) < 1e-12 * m.J) fail(ErrorCode::pole_hit, "G_b0 evaluated on a pole");
    s -= m.w[l] / (d * d);
  }
  return s;
}

// Pair bubble sum_{l l'} u_l^2 u_l'^2 / (omega - E_l - E_l').
inline double pi_bb(const SingleParticleModes& m, double omega) {
  double s = 0.0;
  for (std::size_t l = 0; l < m.w.size(); ++l) s += m.w[l] * g_b0(m, omega - m.Ew[l]);
  return s;
}

inline double pi_bb_derivative(const SingleParticleModes& m, double omega) {
  double s = 0.0;
  for (std::size_t l = 0; l < m.w.size(); ++l) s += m.w[l] * g_b0_derivative(m, omega - m.Ew[l]);
  return s;
}

// Hard-core pair T matrix; zero on the pair poles.
inline double t2(const SingleParticleModes& m, double omega) {
  double p;
  try {
    p = pi_bb(m, omega);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::pole_hit) return 0.0;
    throw;
  }
  return -1.0 / p;
}

struct TwoBodySolution {
  std::shared_ptr<const SingleParticleModes> modes{};
  double E2{0.0};
  double Z2B{0.0};
  double u_B2{0.0};
  double pi_residual{0.0};
  std::vector<double> f1k{};  // f_1B(k_n)
  Eigen::MatrixXd f2k{};      // f_2B(k_n1, k_n2)

  double f1_real(long j) const {
    const auto& m = *modes;
    double s = 0.0;
    for (int n = 0; n < m.L; ++n) s += f1k[n] * std::cos(m.k[n] * j);
    return s / std::sqrt(double(m.L));
  }
  double f2_real(long j1, long j2) const {
    const auto& m = *modes;
    double s = 0.0;
    for (int a = 0; a < m.L; ++a) {
      double r = 0.0;
      for (int b = 0; b < m.L; ++b) r += f2k(a, b) * std::cos(m.k[b] * j2);
      s += r * std::cos(m.k[a] * j1);
    }
    return s / m.L;
  }
  // sum_k |f1|^2 + 2 sum_{k1 k2} |f2|^2
  double norm2() const {
    double s = 0.0;
    for (double x : f1k) s += x * x;
    return s + 2.0 * f2k.squaredNorm();
  }
};

inline TwoBodySolution solve_two_body(const SingleParticleModes& modes) {
  if (modes.L > 401) fail(ErrorCode::config, "two-body solver allows L <= 401");
  TwoBodySolution sol;
  sol.modes = std::make_shared<const SingleParticleModes>(modes);
  const auto& m = *sol.modes;
  if (m.w.size() < 2) fail(ErrorCode::no_root, "no pair continuum above the lowest pair state");
  // Pi_bb decreases between consecutive pair poles; the ground state lies
  // between 2 E_0 and E_0 + E_1.
  const double s0 = 2.0 * m.Ew[0], s1 = m.Ew[0] + m.Ew[1];
  const double gap = s1 - s0;
  if (!(gap > 1e-12 * m.J)) fail(ErrorCode::no_root, "lowest pair poles coincide");
  auto f = [&](double e) { return pi_bb(m, e); };
  double lo = s0 + 1e-8 * gap, hi = s1 - 1e-8 * gap;
  if (!(f(lo) > 0.0) || !(f(hi) < 0.0)) fail(ErrorCode::no_root, "Pi_bb has no sign change above 2 E_0");
  sol.E2 = detail::bracketed_root(f, lo, hi);
  sol.pi_residual = std::abs(pi_bb(m, sol.E2));
  sol.Z2B = -1.0 / pi_bb_derivative(m, sol.E2);
  sol.u_B2 = std::sqrt(sol.Z2B / 2.0) * pi_bb(m, sol.E2);
  // Q(x) = sum_l u_l^2 G_b0(E2 - E_l) / (E2 - x - E_l); the bubble numerator
  // (2w - e1 - e2 - E - E') splits into the two single-denominator pieces.
  std::vector<double> gl(m.w.size());
  for (std::size_t l = 0; l < m.w.size(); ++l) gl[l] = g_b0(m, sol.E2 - m.Ew[l]);
  auto Q = [&](double x) {
    double s = 0.0;
    for (std::size_t l = 0; l < m.w.size(); ++l) s += m.w[l] * gl[l] / (sol.E2 - x - m.Ew[l]);
    return s;
  };
  const int L = m.L;
  const double om = m.imp.omega, sv = std::sqrt(double(L));
  std::vector<double> q(L);
  for (int n = 0; n < L; ++n) q[n] = Q(m.eps[n]);
  sol.f1k.resize(L);
  sol.f2k.resize(L, L);
  for (int a = 0; a < L; ++a) {
    sol.f1k[a] = std::sqrt(2.0 * sol.Z2B) * om * m.eta[a] / sv * q[a];
    for (int b = 0; b < L; ++b)
      sol.f2k(a, b) = std::sqrt(sol.Z2B / 2.0) * om * om / L * m.eta[a] * m.eta[b] * (q[a] + q[b]) /
                      (sol.E2 - m.eps[a] - m.eps[b]);
  }
  return sol;
}

namespace detail {

// Projected three-body matrix on the weighted modes at energy E.
inline Eigen::MatrixXd three_body_matrix(const SingleParticleModes& m, double E) {
  const std::size_t P = m.w.size();
  Eigen::MatrixXd M(P, P);
  std::vector<double> t(P);
  for (std::size_t b = 0; b < P; ++b) t[b] = t2(m, E - m.Ew[b]);
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = 0; b < P; ++b) {
      M(a, b) = 2.0 * m.w[b] * g_b0(m, E - m.Ew[a] - m.Ew[b]) * t[b] - (a == b ? 1.0 : 0.0);
    }
  return M;
}

}  // namespace detail

// det M with the sign kept; throws pole_hit on a G_b0 pole.
inline double three_body_det(const SingleParticleModes& m, double E) {
  return Eigen::PartialPivLU<Eigen::MatrixXd>(detail::three_body_matrix(m, E)).determinant();
}

struct ThreeBodySolution {
  std::shared_ptr<const SingleParticleModes> modes{};
  double E3{0.0};
  double det_residual{0.0};   // |det M(E3)| over the product of column norms
  double null_residual{0.0};  // |M F| / |F|
  double sigma_ratio{0.0};    // smallest / second smallest singular value
  std::vector<double> F_on_shell{};  // F(E_l) on the weighted modes
  double u_B3{0.0}, f1_B3{0.0};      // vanish in the hard-core limit
  double scale{1.0};                 // normalizes 2 sum|f2|^2 + 6 sum|f3|^2 to one
  int spurious_roots{0};             // roots skipped below E3

  // caches at E3
  std::vector<double> tf_l{};    // T2(E3 - E_l) F(E_l)
  std::vector<double> tf_k{};    // T2(E3 - eps_n) F(eps_n)
  std::vector<double> gk{};      // G_b0(eps_n)
  Eigen::MatrixXd Gm{};          // G_b0(E3 - E_l - E_l')
  Eigen::MatrixXd Ge{};          // G_b0(E3 - eps_n - E_l), n x l
  Eigen::MatrixXd R{}, S{};      // see f3_raw
  std::vector<double> f3k{};     // normalized f_3B table, L^3

  double F(double omega) const {
    const auto& m = *modes;
    double s = 0.0;
    for (std::size_t l = 0; l < m.w.size(); ++l) s += 2.0 * m.w[l] * g_b0(m, E3 - omega - m.Ew[l]) * tf_l[l];
    return s;
  }

  // Printed f_2B with the lambda_3 and lambda_1 sums done through G_b0.
  double f2_raw(int n1, int n2) const {
    const auto& m = *modes;
    auto X = [&](int a, int b) {
      const double e1 = m.eps[a], e2 = m.eps[b];
      double t1 = 0.0;
      for (std::size_t l = 0; l < m.w.size(); ++l)
        t1 += m.w[l] * (tf_l[l] + 2.0 * tf_k[a]) * Ge(a, l) / (E3 - e1 - e2 - m.Ew[l]);
      t1 *= -0.5 * gk[a];
      double t2s = 0.0;
      for (std::size_t l1 = 0; l1 < m.w.size(); ++l1) {
        double r = 0.0;
        for (std::size_t l2 = 0; l2 < m.w.size(); ++l2)
          r += m.w[l2] * (tf_l[l2] + 2.0 * tf_l[l1]) * Gm(l1, l2) / (E3 - e2 - m.Ew[l1] - m.Ew[l2]);
        t2s += m.w[l1] * r / (2.0 * (e1 - m.Ew[l1]));
      }
      return t1 - t2s;
    };
    const double om = m.imp.omega;
    return -om * om / m.L * m.eta[n1] * m.eta[n2] * (X(n1, n2) + X(n2, n1));
  }

  // Printed f_3B; the two-denominator pieces split through
  // R(n, n') = sum_l w_l G_b0(E3 - eps_n - E_l) / (E3 - eps_n - eps_n' - E_l) and
  // S(l, n) = sum_l' w_l' G_b0(E3 - E_l - E_l') / (E3 - eps_n - E_l - E_l').
  double f3_raw(int n1, int n2, int n3) const {
    const auto& m = *modes;
    auto Y = [&](int a, int b, int c) {
      const double e1 = m.eps[a], e2 = m.eps[b], e3 = m.eps[c];
      double y = -gk[a] * tf_k[a] * (R(a, b) + R(a, c)) / (E3 - e1 - e2 - e3);
      for (std::size_t l = 0; l < m.w.size(); ++l)
        y -= m.w[l] * tf_l[l] * (S(l, b) + S(l, c)) / ((e1 - m.Ew[l]) * (E3 - e2 - e3 - m.Ew[l]));
      return y;
    };
    const double om = m.imp.omega;
    const double pre = -om * om * om / (6.0 * std::pow(double(m.L), 1.5)) * m.eta[n1] * m.eta[n2] * m.eta[n3];
    return pre * (Y(n1, n2, n3) + Y(n1, n3, n2) + Y(n2, n1, n3) + Y(n2, n3, n1) + Y(n3, n1, n2) + Y(n3, n2, n1));
  }

  double f2(int n1, int n2) const { return scale * f2_raw(n1, n2); }
  double f3(int n1, int n2, int n3) const {
    const int L = modes->L;
    return f3k[(static_cast<std::size_t>(n1) * L + n2) * L + n3];
  }

  // <B3|H|B3> / <B3|B3> of the assembled state
  double energy_expectation() const {
    const auto& m = *modes;
    const int L = m.L;
    double diag = 0.0, coup = 0.0, nrm = 0.0;
    for (int a = 0; a < L; ++a)
      for (int b = 0; b < L; ++b) {
        const double x = f2(a, b);
        diag += 2.0 * x * x * (m.imp.delta + m.eps[a] + m.eps[b]);
        nrm += 2.0 * x * x;
        for (int c = 0; c < L; ++c) {
          const double y = f3(a, b, c);
          diag += 6.0 * y * y * (m.eps[a] + m.eps[b] + m.eps[c]);
          nrm += 6.0 * y * y;
          coup += m.eta[c] * x * y;
        }
      }
    coup *= 12.0 * m.imp.omega / std::sqrt(double(L));
    return (diag + coup) / nrm;
  }

  double f2_real(long j1, long j2) const {
    const auto& m = *modes;
    double s = 0.0;
    for (int a = 0; a < m.L; ++a)
      for (int b = 0; b < m.L; ++b) s += f2(a, b) * std::cos(m.k[a] * j1) * std::cos(m.k[b] * j2);
    return s / m.L;
  }
  double f3_real(long j1, long j2, long j3) const {
    const auto& m = *modes;
    const int L = m.L;
    std::vector<double> c1(L), c2(L), c3(L);
    for (int n = 0; n < L; ++n) {
      c1[n] = std::cos(m.k[n] * j1);
      c2[n] = std::cos(m.k[n] * j2);
      c3[n] = std::cos(m.k[n] * j3);
    }
    double s = 0.0;
    for (int a = 0; a < L; ++a) {
      double r2 = 0.0;
      for (int b = 0; b < L; ++b) {
        double r3 = 0.0;
        for (int c = 0; c < L; ++c) r3 += f3(a, b, c) * c3[c];
        r2 += r3 * c2[b];
      }
      s += r2 * c1[a];
    }
    return s / std::pow(double(L), 1.5);
  }
};

namespace detail {

// Null vector and wavefunction caches at a root of det M.
inline ThreeBodySolution assemble_three_body(std::shared_ptr<const SingleParticleModes> modes, double root) {
  ThreeBodySolution sol;
  sol.modes = std::move(modes);
  sol.E3 = root;
  const auto& m = *sol.modes;
  const std::size_t P = m.w.size();
  Eigen::MatrixXd M = three_body_matrix(m, root);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  sol.sigma_ratio = P > 1 ? sv(P - 1) / sv(P - 2) : 0.0;
  if (P > 1 && sv(P - 2) < 1e-6) fail(ErrorCode::degenerate_nullspace, "det M has a degenerate null space");
  Eigen::VectorXd F = svd.matrixV().col(P - 1);
  if (F.sum() < 0.0) F = -F;
  sol.null_residual = (M * F).norm() / F.norm();
  double colprod = 1.0;
  for (std::size_t b = 0; b < P; ++b) colprod *= std::max(M.col(b).norm(), 1e-300);
  sol.det_residual = std::abs(Eigen::PartialPivLU<Eigen::MatrixXd>(M).determinant()) / colprod;
  sol.F_on_shell.assign(F.data(), F.data() + P);

  const int L = m.L;
  const double E3 = sol.E3;
  sol.tf_l.resize(P);
  for (std::size_t l = 0; l < P; ++l) sol.tf_l[l] = t2(m, E3 - m.Ew[l]) * F(l);
  sol.tf_k.resize(L);
  sol.gk.resize(L);
  for (int n = 0; n < L; ++n) {
    sol.tf_k[n] = t2(m, E3 - m.eps[n]) * sol.F(m.eps[n]);
    sol.gk[n] = g_b0(m, m.eps[n]);
  }
  sol.Gm.resize(P, P);
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = 0; b < P; ++b) sol.Gm(a, b) = g_b0(m, E3 - m.Ew[a] - m.Ew[b]);
  sol.Ge.resize(L, P);
  for (int n = 0; n < L; ++n)
    for (std::size_t l = 0; l < P; ++l) sol.Ge(n, l) = g_b0(m, E3 - m.eps[n] - m.Ew[l]);
  sol.R.resize(L, L);
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) {
      double s = 0.0;
      for (std::size_t l = 0; l < P; ++l) s += m.w[l] * sol.Ge(a, l) / (E3 - m.eps[a] - m.eps[b] - m.Ew[l]);
      sol.R(a, b) = s;
    }
  sol.S.resize(P, L);
  for (std::size_t l = 0; l < P; ++l)
    for (int n = 0; n < L; ++n) {
      double s = 0.0;
      for (std::size_t q = 0; q < P; ++q) s += m.w[q] * sol.Gm(l, q) / (E3 - m.eps[n] - m.Ew[l] - m.Ew[q]);
      sol.S(l, n) = s;
    }
  // normalization of the assembled state
  sol.f3k.assign(static_cast<std::size_t>(L) * L * L, 0.0);
  double n3 = 0.0;
  for (int a = 0; a < L; ++a)
    for (int b = a; b < L; ++b)
      for (int c = b; c < L; ++c) {
        const double v = sol.f3_raw(a, b, c);
        const int perm[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
        for (auto& p : perm) sol.f3k[(static_cast<std::size_t>(p[0]) * L + p[1]) * L + p[2]] = v;
      }
  for (double v : sol.f3k) n3 += v * v;
  double n2 = 0.0;
  for (int a = 0; a < L; ++a)
    for (int b = 0; b < L; ++b) n2 += std::pow(sol.f2_raw(a, b), 2);
  const double norm2 = 2.0 * n2 + 6.0 * n3;
  if (!(norm2 > 0.0)) fail(ErrorCode::no_root, "three-body wavefunction vanishes");
  sol.scale = 1.0 / std::sqrt(norm2);
  for (double& v : sol.f3k) v *= sol.scale;
  return sol;
}

}  // namespace detail

// Lowest root of det M whose assembled state is an eigenstate.  det M also
// vanishes where the reconstructed wavefunction is identically zero; those
// roots are skipped by comparing <H> with the root.
inline ThreeBodySolution solve_three_body(const SingleParticleModes& modes, int scan_points = 400) {
  if (modes.L > 41) fail(ErrorCode::config, "three-body solver allows L <= 41");
  auto two = solve_two_body(modes);
  const auto& m = *two.modes;
  // hard-core energies sit above 3 E_0; scan up to the E2 + E_1 threshold
  const double lo = 3.0 * m.Ew[0], hi = two.E2 + m.Ew[1];
  auto det = [&](double e) { return three_body_det(m, e); };
  auto smallest_sv = [&](double e) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(detail::three_body_matrix(m, e));
    return svd.singularValues()(svd.singularValues().size() - 1);
  };
  // Sample points: a uniform grid plus a few points inside every pole-free
  // piece.  Poles of M sit at E_a + E_b + E_c (G_b0) and at pair energies
  // plus E_b (T2); a root next to a pole gives no sign change on a coarse grid.
  std::vector<double> cuts{lo, hi};
  const std::size_t P = m.w.size();
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = a; b < P; ++b)
      for (std::size_t c = b; c < P; ++c) {
        const double e = m.Ew[a] + m.Ew[b] + m.Ew[c];
        if (e > lo && e < hi) cuts.push_back(e);
      }
  std::vector<double> pairs;
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = a; b < P; ++b) pairs.push_back(m.Ew[a] + m.Ew[b]);
  std::sort(pairs.begin(), pairs.end());
  auto pb = [&](double e) { return pi_bb(m, e); };
  for (std::size_t i = 0; i + 1 < pairs.size() && pairs[i] < hi - m.Ew[0]; ++i) {
    const double gap = pairs[i + 1] - pairs[i];
    if (!(gap > 1e-10 * m.J)) continue;
    const double a = pairs[i] + 1e-9 * gap, b = pairs[i + 1] - 1e-9 * gap;
    double p2;
    try {
      if (!(pb(a) > 0.0) || !(pb(b) < 0.0)) continue;
      p2 = detail::bracketed_root(pb, a, b);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::pole_hit) throw;
      continue;
    }
    for (double eb : m.Ew)
      if (p2 + eb > lo && p2 + eb < hi) cuts.push_back(p2 + eb);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  std::vector<double> samples;
  for (int i = 1; i <= scan_points; ++i) samples.push_back(lo + (hi - lo) * i / (scan_points + 1.0));
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (!(b - a > 1e-11 * m.J)) continue;
    for (double t : {1e-7, 0.2, 0.4, 0.6, 0.8, 1.0 - 1e-7}) samples.push_back(a + t * (b - a));
  }
  std::sort(samples.begin(), samples.end());

  int spurious = 0;
  double prev_e = lo, prev_d = std::numeric_limits<double>::quiet_NaN();
  for (const double e : samples) {
    double d;
    try {
      d = det(e);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::pole_hit) throw;
      prev_d = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    if (!std::isnan(prev_d) && std::isfinite(d) && std::isfinite(prev_d) && (d < 0.0) != (prev_d < 0.0)) {
      try {
        const double x = detail::bracketed_root(det, prev_e, e);
        // sign changes across poles fail the singular value test
        if (smallest_sv(x) < 1e-7) {
          auto sol = detail::assemble_three_body(two.modes, x);
          if (std::abs(sol.energy_expectation() - x) <= 1e-8 * std::max(m.J, std::abs(x))) {
            sol.spurious_roots = spurious;
            return sol;
          }
          ++spurious;
        }
      } catch (const Error& err) {
        if (err.code() != ErrorCode::pole_hit && err.code() != ErrorCode::no_root) throw;
      }
    }
    prev_e = e;
    prev_d = d;
  }
  fail(ErrorCode::no_root, "det M has no physical root below E2 + E_1");
}

}  // namespace ebs
