#pragma once

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "ebs/analysis.hpp"
#include "ebs/error.hpp"
#include "ebs/perturbative.hpp"
#include "ebs/sebs.hpp"
#include "ebs/spectral.hpp"

namespace ebs {

// Integrals over the two unnormalized pole functions f_mu = eta_k / (e_mu - eps_k),
// then rescaled to the normalized g_mu = f_mu / sqrt(N_mu_mu).
struct PoleBasis {
  double e1{0.0}, e2{0.0};
  double n11{0.0}, n22{0.0}, n12{0.0};
  double r{0.0};                       // <g1, g2>
  double h11{0.0}, h22{0.0}, h12{0.0};  // <g_mu, eps g_nu>
  double i1{0.0}, i2{0.0};              // int eta g_mu
  // second moments, only needed for the stationarity residual
  double q11{0.0}, q22{0.0}, q12{0.0};  // <g_mu, eps^2 g_nu>
  double t1{0.0}, t2{0.0};              // int eps eta g_mu
};

inline PoleBasis pole_basis(const SpectralContext& ctx, double e1, double e2) {
  PoleBasis p;
  p.e1 = e1;
  p.e2 = e2;
  p.n11 = ctx.n_mu_nu(e1, e1);
  p.n22 = ctx.n_mu_nu(e2, e2);
  p.n12 = ctx.n_mu_nu(e1, e2);
  const double s1 = std::sqrt(p.n11), s2 = std::sqrt(p.n22);
  p.r = std::min(1.0, p.n12 / (s1 * s2));
  const double w11 = ctx.eps_weighted(e1, e1), w22 = ctx.eps_weighted(e2, e2), w12 = ctx.eps_weighted(e1, e2);
  p.h11 = w11 / p.n11;
  p.h22 = w22 / p.n22;
  p.h12 = w12 / (s1 * s2);
  const double sig1 = ctx.self_energy(e1), sig2 = ctx.self_energy(e2);
  p.i1 = sig1 / s1;
  p.i2 = sig2 / s2;
  // eps^2 = (a - eps)(b - eps) + (a + b) eps - a b, and int |eta|^2 = 1
  p.q11 = (1.0 + 2.0 * e1 * w11 - e1 * e1 * p.n11) / p.n11;
  p.q22 = (1.0 + 2.0 * e2 * w22 - e2 * e2 * p.n22) / p.n22;
  p.q12 = (1.0 + (e1 + e2) * w12 - e1 * e2 * p.n12) / (s1 * s2);
  p.t1 = (e1 * sig1 - 1.0) / s1;
  p.t2 = (e2 * sig2 - 1.0) / s2;
  return p;
}

// phi_M = c_M1 g_1 + c_M2 g_2 with c_M2 = t_M c_M1
struct PoleModes {
  PoleBasis basis{};
  double tA{0.0}, tB{0.0};
  std::array<double, 2> cA{1.0, 0.0};
  std::array<double, 2> cB{0.0, 1.0};

  // momentum amplitude with the continuum normalization int dk/(2pi)^d phi^2 = 1
  double phi(const BathSpec& bath, char M, const Momentum& k) const {
    const auto& c = M == 'A' ? cA : cB;
    const double eps = dispersion_eval(bath, k);
    const double eta = std::real(coupling_fourier(bath, k));
    return eta * (c[0] / std::sqrt(basis.n11) / (basis.e1 - eps) + c[1] / std::sqrt(basis.n22) / (basis.e2 - eps));
  }
};

namespace detail {

inline double gram_norm2(const PoleBasis& p, double x1, double x2) { return x1 * x1 + x2 * x2 + 2.0 * p.r * x1 * x2; }

inline double bilinear(double m11, double m12, double m22, const std::array<double, 2>& a,
                       const std::array<double, 2>& b) {
  return a[0] * b[0] * m11 + (a[0] * b[1] + a[1] * b[0]) * m12 + a[1] * b[1] * m22;
}

// A along (cos th, sin th); B is its Gram-orthogonal partner, sign chosen with c_B1 >= 0.
inline PoleModes modes_from_angle(const PoleBasis& p, double th) {
  PoleModes m;
  m.basis = p;
  const double a1 = std::cos(th), a2 = std::sin(th);
  const double na = std::sqrt(gram_norm2(p, a1, a2));
  m.cA = {a1 / na, a2 / na};
  double b1 = a2 + p.r * a1, b2 = -(a1 + p.r * a2);
  if (b1 < 0.0) {
    b1 = -b1;
    b2 = -b2;
  }
  const double nb = std::sqrt(gram_norm2(p, b1, b2));
  m.cB = {b1 / nb, b2 / nb};
  m.tA = a2 / a1;
  m.tB = b2 / b1;
  return m;
}

}  // namespace detail

inline PoleModes build_modes(const SpectralContext& ctx, double e1, double e2, double tA) {
  const double J = ctx.scale();
  if (!(e1 < 0.0) || !(e2 < 0.0)) fail(ErrorCode::config, "pole energies must lie below the band");
  if (std::abs(e1 - e2) < 1e-8 * J) fail(ErrorCode::coincident_poles, "e1 and e2 coincide");
  auto p = pole_basis(ctx, e1, e2);
  if (std::abs(tA + p.r) < 1e-12 * (1.0 + std::abs(tA)))
    fail(ErrorCode::tb_singularity, "t_B denominator vanishes");
  return detail::modes_from_angle(p, std::atan(tA));
}

// Gram-orthogonality and normalization, evaluated independently of the construction.
inline std::array<double, 3> mode_overlaps(const PoleModes& m) {
  const auto& p = m.basis;
  auto ov = [&](const std::array<double, 2>& a, const std::array<double, 2>& b) {
    return detail::bilinear(1.0, p.r, 1.0, a, b);
  };
  return {ov(m.cA, m.cA), ov(m.cB, m.cB), ov(m.cA, m.cB)};
}

struct EnergyEvaluation {
  double E_GS{0.0};
  double lambda0{0.0};
  Eigen::Vector3d v{1.0, 0.0, 0.0};
  Eigen::Matrix3d E0{Eigen::Matrix3d::Zero()};
  double hAA{0.0}, hAB{0.0}, hBB{0.0}, IA{0.0}, IB{0.0};
  double eig_residual{0.0};  // |E0 v - lambda0 v| / |E0|
};

inline EnergyEvaluation evaluate_energy(const PoleModes& m, const ImpuritySpec& imp, int N) {
  const auto& p = m.basis;
  EnergyEvaluation ev;
  ev.hAA = detail::bilinear(p.h11, p.h12, p.h22, m.cA, m.cA);
  ev.hAB = detail::bilinear(p.h11, p.h12, p.h22, m.cA, m.cB);
  ev.hBB = detail::bilinear(p.h11, p.h12, p.h22, m.cB, m.cB);
  ev.IA = m.cA[0] * p.i1 + m.cA[1] * p.i2;
  ev.IB = m.cB[0] * p.i1 + m.cB[1] * p.i2;
  const double sn = std::sqrt(static_cast<double>(N)), om = imp.omega;
  Eigen::Matrix3d E0;
  E0 << imp.delta, sn * om * ev.IA, om * ev.IB,
        sn * om * ev.IA, ev.hAA, sn * ev.hAB,
        om * ev.IB, sn * ev.hAB, ev.hBB;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(E0);
  ev.E0 = E0;
  ev.lambda0 = es.eigenvalues()(0);
  ev.v = es.eigenvectors().col(0);
  if (ev.v(0) < 0.0 || (ev.v(0) == 0.0 && ev.v(1) < 0.0)) ev.v = -ev.v;
  ev.E_GS = (N - 1) * ev.hAA + ev.lambda0;
  const double nrm = E0.norm();
  ev.eig_residual = nrm > 0.0 ? (E0 * ev.v - ev.lambda0 * ev.v).norm() / nrm : 0.0;
  return ev;
}

inline EnergyEvaluation energy_objective(const SpectralContext& ctx, const ImpuritySpec& imp, int N, double e1,
                                         double e2, double tA) {
  if (N < 1) fail(ErrorCode::config, "N must be >= 1");
  validate(imp);
  return evaluate_energy(build_modes(ctx, e1, e2, tA), imp, N);
}

// Norm of the residual of the coupled mode equations at (v, phi_A, phi_B), with
// the multipliers mu_A, mu_B, mu_AB taken as projections.
inline double stationarity_residual(const PoleModes& m, const EnergyEvaluation& ev, const ImpuritySpec& imp, int N) {
  const auto& p = m.basis;
  const double al = ev.v(0), be = ev.v(1), ga = ev.v(2), sn = std::sqrt(static_cast<double>(N));
  const double qAA = detail::bilinear(p.q11, p.q12, p.q22, m.cA, m.cA);
  const double qAB = detail::bilinear(p.q11, p.q12, p.q22, m.cA, m.cB);
  const double qBB = detail::bilinear(p.q11, p.q12, p.q22, m.cB, m.cB);
  const double tA = m.cA[0] * p.t1 + m.cA[1] * p.t2, tB = m.cB[0] * p.t1 + m.cB[1] * p.t2;
  // X = x1 eps phi_A + x2 eps phi_B + x3 eta
  auto res2 = [&](double x1, double x2, double x3, double& onA, double& onB) {
    const double nrm = x1 * x1 * qAA + 2.0 * x1 * x2 * qAB + x2 * x2 * qBB + 2.0 * x1 * x3 * tA + 2.0 * x2 * x3 * tB +
                       x3 * x3;
    onA = x1 * ev.hAA + x2 * ev.hAB + x3 * ev.IA;
    onB = x1 * ev.hAB + x2 * ev.hBB + x3 * ev.IB;
    return nrm - onA * onA - onB * onB;
  };
  double aA, bA, aB, bB;
  const double rA = res2(N - 1 + be * be, sn * be * ga, sn * imp.omega * al * be, aA, bA);
  const double rB = res2(sn * be * ga, ga * ga, imp.omega * al * ga, aB, bB);
  const double asym = bA - aB;
  return std::sqrt(std::max(0.0, rA) + std::max(0.0, rB) + 0.5 * asym * asym);
}

struct LocalMinimum {
  double e1{0.0}, e2{0.0}, tA{0.0};
  double EN{0.0};
  bool converged{false};
  std::size_t evaluations{0};
};

struct VariationalSolution {
  int N{1};
  double e1{0.0}, e2{0.0};
  double tA{0.0}, tB{0.0};
  std::array<double, 2> cA{1.0, 0.0}, cB{0.0, 1.0};
  double alpha{1.0}, beta{0.0}, gamma{0.0};
  double EN{0.0};
  PoleModes modes{};
  SiteProfile phiA{}, phiB{};
  double tail{0.0};
  double xi_g{std::numeric_limits<double>::quiet_NaN()};
  double xi_e{std::numeric_limits<double>::quiet_NaN()};
  double p_plus{0.0}, p_minus{0.0};
  double stationarity{0.0};  // max |dE/dp| / scale over (log|e1|, log gap, theta)
  double gp_residual{0.0};   // mode-equation residual / scale
  double eig_residual{0.0};
  std::vector<LocalMinimum> minima{};
  std::size_t evaluations{0};
};

struct VariationalOptions {
  std::optional<std::array<double, 3>> seed{};  // (e1, e2, tA)
  bool with_profiles{true};
  std::size_t max_evaluations{10000};  // per start
  double simplex_tol{1e-7};            // simplex size in (log|e1|, log gap, theta)
  double gap_floor{1e-5};              // minimum (e1 - e2)/|e1|
};

inline std::pair<double, double> correlation_pair(int N, double beta) {
  const double n = static_cast<double>(N), m = 1.0 - beta * beta;
  const double disc = std::sqrt(std::max(0.0, n * n - 4.0 * (n - 1.0) * m * m));
  return {0.5 * (n + disc), 0.5 * (n - disc)};
}

struct VariationalObservables {
  double xi_g{std::numeric_limits<double>::quiet_NaN()};
  double xi_e{std::numeric_limits<double>::quiet_NaN()};
  double p_plus{0.0}, p_minus{0.0};
  SiteProfile n_g{}, n_e{};
};

// n^e = alpha^2 (N-1) phi_A^2; n^g from beta |N_A> + gamma |(N-1)_A, 1_B>.
inline VariationalObservables variational_observables(const VariationalSolution& sol, double tail_tol = 1e-8) {
  VariationalObservables ob;
  std::tie(ob.p_plus, ob.p_minus) = correlation_pair(sol.N, sol.beta);
  if (sol.phiA.site.empty()) return ob;
  if (sol.tail > tail_tol) fail(ErrorCode::grid_too_small, "mode profiles do not contain the tail weight");
  const double n = static_cast<double>(sol.N), sn = std::sqrt(n);
  ob.n_g.site = ob.n_e.site = sol.phiA.site;
  for (std::size_t i = 0; i < sol.phiA.site.size(); ++i) {
    const double a = sol.phiA.value[i], b = sol.phiB.value[i];
    ob.n_e.value.push_back(sol.alpha * sol.alpha * (n - 1.0) * a * a);
    ob.n_g.value.push_back(sol.beta * sol.beta * n * a * a + sol.gamma * sol.gamma * ((n - 1.0) * a * a + b * b) +
                           2.0 * sol.beta * sol.gamma * sn * a * b);
  }
  ob.xi_g = localization_length(ob.n_g);
  if (sol.N > 1 && std::abs(sol.alpha) > 0.0) {
    SiteProfile dens{sol.phiA.site, {}};
    for (double a : sol.phiA.value) dens.value.push_back(a * a);
    ob.xi_e = localization_length(dens);
  }
  return ob;
}

namespace detail {

struct VarProblem {
  const SpectralContext* ctx;
  ImpuritySpec imp;
  int N;
  double J;
  double gap_floor;
  std::size_t evals{0};

  std::array<double, 3> decode(const double* x) const {
    const double e1 = -J * std::exp(x[0]);
    const double gap = std::max(std::exp(x[1]), gap_floor);
    return {e1, e1 * (1.0 + gap), x[2]};
  }
  std::optional<std::pair<PoleModes, EnergyEvaluation>> eval(const double* x) {
    ++evals;
    auto d = decode(x);
    try {
      auto m = modes_from_angle(pole_basis(*ctx, d[0], d[1]), d[2]);
      auto ev = evaluate_energy(m, imp, N);
      if (!std::isfinite(ev.E_GS)) return std::nullopt;
      return std::make_pair(m, ev);
    } catch (const Error&) {
      return std::nullopt;
    }
  }
  double value(const double* x) {
    auto r = eval(x);
    return r ? r->second.E_GS : std::numeric_limits<double>::max();
  }
};

inline double gsl_objective(const gsl_vector* x, void* params) {
  auto* pr = static_cast<VarProblem*>(params);
  double xs[3] = {gsl_vector_get(x, 0), gsl_vector_get(x, 1), gsl_vector_get(x, 2)};
  return pr->value(xs);
}

inline std::array<double, 3> encode(double e1, double e2, double theta, double J) {
  const double lo = std::min(e1, e2), hi = std::max(e1, e2);
  return {std::log(-hi / J), std::log(std::max((hi - lo) / -hi, 1e-12)), theta};
}

struct SimplexResult {
  std::array<double, 3> x{};
  double f{0.0};
  bool converged{false};
  std::size_t evals{0};
};

inline SimplexResult nelder_mead(VarProblem& pr, std::array<double, 3> x0, std::array<double, 3> step,
                                 std::size_t max_evals, double tol) {
  gsl_set_error_handler_off();
  gsl_multimin_function fn{&gsl_objective, 3, &pr};
  gsl_vector* x = gsl_vector_alloc(3);
  gsl_vector* ss = gsl_vector_alloc(3);
  for (int i = 0; i < 3; ++i) {
    gsl_vector_set(x, i, x0[i]);
    gsl_vector_set(ss, i, step[i]);
  }
  gsl_multimin_fminimizer* s = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  const std::size_t start = pr.evals;
  gsl_multimin_fminimizer_set(s, &fn, x, ss);
  SimplexResult out;
  while (pr.evals - start < max_evals) {
    if (gsl_multimin_fminimizer_iterate(s) != GSL_SUCCESS) break;
    if (gsl_multimin_fminimizer_size(s) < tol) {
      out.converged = true;
      break;
    }
  }
  for (int i = 0; i < 3; ++i) out.x[i] = gsl_vector_get(s->x, i);
  out.f = s->fval;
  out.evals = pr.evals - start;
  gsl_multimin_fminimizer_free(s);
  gsl_vector_free(x);
  gsl_vector_free(ss);
  return out;
}

}  // namespace detail

inline VariationalSolution optimize(const SpectralContext& ctx, const ImpuritySpec& imp, int N,
                                    const VariationalOptions& opt = {}) {
  if (N < 1) fail(ErrorCode::config, "N must be >= 1");
  validate(imp);
  const double J = ctx.scale();
  const double Escale = std::max({J, std::abs(imp.delta), imp.omega});
  if (imp.omega == 0.0) {
    // bosons delocalize (e1 -> 0-); the infimum is the decoupled energy and is not attained
    VariationalSolution sol;
    sol.N = N;
    sol.e1 = sol.e2 = 0.0;
    const bool exc = imp.delta < 0.0;
    sol.alpha = exc ? 1.0 : 0.0;
    sol.beta = exc ? 0.0 : 1.0;
    sol.EN = exc ? imp.delta : 0.0;
    std::tie(sol.p_plus, sol.p_minus) = correlation_pair(N, sol.beta);
    return sol;
  }
  detail::VarProblem pr{&ctx, imp, N, J, opt.gap_floor};

  // Seeds: sEBS pole, PG / PE projected modes, Jaynes-Cummings depth, and a fixed spread.
  double E1 = -J;
  try {
    if (sebs_exists(ctx, imp) && imp.omega > 0.0) E1 = solve_sebs(ctx, imp, false).E1;
  } catch (const Error&) {
  }
  if (!(E1 < 0.0)) E1 = -J;
  std::vector<std::array<double, 3>> seeds;  // (e1, e2, theta)
  seeds.push_back({E1, E1 * 1.01, 0.0});
  bool pg = false, pe = false;
  if (imp.delta < 0.0 && imp.omega > 0.0) {
    try {
      auto pm = solve_projected_mode(ctx, imp, Sector::e);
      if (pm.E1s > imp.delta) {
        const double th = std::atan2(pm.weight_D * std::sqrt(ctx.n_mu_nu(imp.delta, imp.delta)),
                                     pm.weight_E * std::sqrt(ctx.n_mu_nu(pm.E1s, pm.E1s)));
        seeds.push_back({pm.E1s, imp.delta, th});
        pg = true;
      }
    } catch (const Error&) {
    }
  }
  if (imp.delta > ctx.bandwidth() && imp.omega > 0.0) {
    try {
      auto pm = solve_projected_mode(ctx, imp, Sector::g);
      seeds.push_back({pm.E1s, 10.0 * pm.E1s, 0.0});
      pe = true;
    } catch (const Error&) {
    }
  }
  if (!pg) seeds.push_back({0.1 * E1, E1, 0.0});
  if (!pe) seeds.push_back({0.5 * E1, 2.0 * E1, -0.5});
  const double jc = std::min(jc_energy(imp, 1), -1e-3 * J);
  seeds.push_back({jc, 2.0 * jc, 0.0});
  seeds.push_back({0.1 * E1, 10.0 * E1, 0.0});
  seeds.push_back({E1, 100.0 * E1, -0.3});
  seeds.push_back({0.01 * E1, E1, 0.5});
  if (opt.seed) {
    auto [s1, s2, t] = *opt.seed;
    seeds.push_back({s1, s2, std::atan(t)});
  }

  VariationalSolution sol;
  sol.N = N;
  detail::SimplexResult best;
  best.f = std::numeric_limits<double>::max();
  for (const auto& s : seeds) {
    auto x0 = detail::encode(s[0], s[1], s[2], J);
    auto r = detail::nelder_mead(pr, x0, {0.5, 0.5, 0.3}, opt.max_evaluations, opt.simplex_tol);
    auto d = pr.decode(r.x.data());
    sol.minima.push_back({d[0], d[1], std::tan(d[2]), r.f, r.converged, r.evals});
    if (r.converged && r.f < best.f) best = r;
  }
  if (!best.converged) fail(ErrorCode::optimizer_failed, "no multi-start reached the simplex tolerance");
  // Restart from the best vertex with a small simplex.
  auto polish = detail::nelder_mead(pr, best.x, {0.02, 0.02, 0.02}, opt.max_evaluations, opt.simplex_tol);
  if (polish.converged && polish.f <= best.f) best = polish;
  // One excitation: the energy does not depend on the B mode, and the simplex
  // may park e2 next to e1 where the Gram matrix is nearly singular.  The
  // sEBS pole with a distant partner spans the same optimum.
  if (N == 1 && E1 < 0.0) {
    auto xc = detail::encode(E1, 2.0 * E1, 0.0, J);
    const double fc = pr.value(xc.data());
    if (fc <= best.f + 1e-12 * Escale) {
      best.x = xc;
      best.f = fc;
    }
  }

  auto at = pr.eval(best.x.data());
  const auto& [m, ev] = *at;
  const auto& x = best.x;
  sol.evaluations = pr.evals;
  sol.modes = m;
  sol.e1 = m.basis.e1;
  sol.e2 = m.basis.e2;
  sol.tA = m.tA;
  sol.tB = m.tB;
  sol.cA = m.cA;
  sol.cB = m.cB;
  sol.alpha = ev.v(0);
  sol.beta = ev.v(1);
  sol.gamma = ev.v(2);
  sol.EN = ev.E_GS;
  sol.eig_residual = ev.eig_residual;
  sol.gp_residual = stationarity_residual(m, ev, imp, N) / Escale;

  const double h = 1e-4;
  double g = 0.0;
  for (int i = 0; i < 3; ++i) {
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g = std::max(g, std::abs(pr.value(xp.data()) - pr.value(xm.data())) / (2.0 * h));
  }
  sol.stationarity = g / Escale;

  if (opt.with_profiles && ctx.bath().dimension == 1) {
    const double s1 = std::sqrt(m.basis.n11), s2 = std::sqrt(m.basis.n22);
    std::vector<PoleTerm> ta{{sol.e1, m.cA[0] / s1}, {sol.e2, m.cA[1] / s2}};
    std::vector<PoleTerm> tb{{sol.e1, m.cB[0] / s1}, {sol.e2, m.cB[1] / s2}};
    auto pa = resolvent_profile(ctx, ta, 1.0);
    auto pb = resolvent_profile(ctx, tb, 1.0);
    // put both modes on the wider window
    auto& wide = pa.profile.site.size() >= pb.profile.site.size() ? pa : pb;
    const auto& terms = &wide == &pa ? tb : ta;
    SiteProfile other{wide.profile.site, {}};
    double inside = 0.0;
    for (long j : other.site) {
      double v = 0.0;
      for (const auto& t : terms) v += t.weight * ctx.coupled_resolvent(t.z, j);
      other.value.push_back(v);
      inside += v * v;
    }
    sol.tail = std::max(wide.tail, std::max(0.0, 1.0 - inside));
    sol.phiA = &wide == &pa ? pa.profile : other;
    sol.phiB = &wide == &pa ? other : pb.profile;
  }
  std::tie(sol.p_plus, sol.p_minus) = correlation_pair(N, sol.beta);
  try {
    auto ob = variational_observables(sol);
    sol.xi_g = ob.xi_g;
    sol.xi_e = ob.xi_e;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::grid_too_small && e.code() != ErrorCode::empty_density) throw;
  }
  return sol;
}

}  // namespace ebs
