#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ebs/detail/roots.hpp"
#include "ebs/error.hpp"
#include "ebs/model.hpp"
#include "ebs/spectral.hpp"

namespace ebs {

enum class Sector { e, g };
enum class Regime { PG, PE, NP_I, NP_II, JC };

inline std::string to_string(Sector s) { return s == Sector::e ? "e" : "g"; }
inline std::string to_string(Regime r) {
  switch (r) {
    case Regime::PG: return "PG";
    case Regime::PE: return "PE";
    case Regime::NP_I: return "NP_I";
    case Regime::NP_II: return "NP_II";
    case Regime::JC: return "JC";
  }
  return "?";
}

struct EffectiveKernel {
  double lamb_shift{0.0};
  // (Omega^2 / 2) eta_k eta*_k' (1/(Delta - eps_k') + 1/(Delta - eps_k)), per 1/V
  std::function<cplx(const Momentum&, const Momentum&)> potential;
};

inline EffectiveKernel effective_hamiltonian_kernel(const SpectralContext& ctx, const ImpuritySpec& imp) {
  validate(imp);
  EffectiveKernel out;
  const double om2 = imp.omega * imp.omega;
  out.lamb_shift = om2 == 0.0 ? 0.0 : om2 * ctx.self_energy(imp.delta);
  BathSpec bath = ctx.bath();
  const double delta = imp.delta;
  out.potential = [bath, delta, om2](const Momentum& k, const Momentum& kp) -> cplx {
    if (om2 == 0.0) return 0.0;
    const double ek = dispersion_eval(bath, k), ekp = dispersion_eval(bath, kp);
    return 0.5 * om2 * coupling_fourier(bath, k) * std::conj(coupling_fourier(bath, kp)) *
           (1.0 / (delta - ekp) + 1.0 / (delta - ek));
  };
  return out;
}

// F^s_N(0) < 0 decides existence; an infinite I0 forces it.
inline double mebs_existence_function(const SpectralContext& ctx, const ImpuritySpec& imp) {
  validate(imp);
  if (imp.delta == 0.0) fail(ErrorCode::regime_undefined, "Delta = 0 has no perturbative sector");
  if (imp.omega == 0.0) return 1.0;
  const double ad = std::abs(imp.delta);
  const double w1 = w_alpha(ctx, imp, imp.delta, 1);
  const double w2 = w_alpha(ctx, imp, imp.delta, 2);
  const double i0 = ctx.capital_i0();
  if (std::isinf(i0)) return -inf;
  const double a = 1.0 - w1 / ad;
  return a * a - (2.0 + w2 / ad) * imp.omega * imp.omega * i0 / (2.0 * ad);
}

inline bool mebs_exists_perturbative(const SpectralContext& ctx, const ImpuritySpec& imp) {
  return mebs_existence_function(ctx, imp) < 0.0;
}

struct ProjectedModeSolution {
  Sector sector{Sector::e};
  double E1s{0.0};
  std::array<double, 2> C{0.0, 0.0};
  double det_residual{0.0};
  double null_residual{0.0};  // |M C| / |C|
  // phi_A(k) has poles at E1s and Delta: phi_A = eta_k (w_E/(E1s - eps_k) + w_D/(Delta - eps_k))
  double weight_E{0.0};
  double weight_D{0.0};
  double delta{0.0};
  SiteProfile phi_A{};
  double tail{0.0};

  double phi_A_momentum(const BathSpec& bath, const Momentum& k) const {
    const double eps = dispersion_eval(bath, k);
    return std::real(coupling_fourier(bath, k)) * (weight_E / (E1s - eps) + weight_D / (delta - eps));
  }
};

namespace detail {

// +1 above the band (PE sector g), -1 below it (PG sector e): 1/|Delta - eps| = sigma / (Delta - eps).
inline double sector_sign(const SpectralContext& ctx, Sector s, double delta) {
  if (s == Sector::e) {
    if (!(delta < 0.0)) fail(ErrorCode::regime_mismatch, "sector e (PG) needs Delta < 0");
    return -1.0;
  }
  if (!(delta > ctx.bandwidth())) fail(ErrorCode::regime_mismatch, "sector g (PE) needs Delta above the band");
  return 1.0;
}

}  // namespace detail

// M^s(E) with M11 = M22 = 1 + sigma (Omega^2/2) N(E, Delta), M12 = -w1(E),
// M21 = -(Omega^2/2) int |eta|^2 / ((Delta - eps)^2 (E - eps)).
inline std::array<double, 4> projected_matrix(const SpectralContext& ctx, const ImpuritySpec& imp, Sector s, double e) {
  const double sigma = detail::sector_sign(ctx, s, imp.delta);
  const double d = imp.delta;
  const double half = 0.5 * imp.omega * imp.omega;
  const double sig_e = ctx.self_energy(e);
  const double n_ed = ctx.n_mu_nu(e, d);
  const double n_dd = ctx.n_mu_nu(d, d);
  // int 1/((D - eps)^2 (E - eps)) = (N(E,D) - N(D,D)) / (D - E)
  const double kappa = (n_ed - n_dd) / (d - e);
  const double m11 = 1.0 + sigma * half * n_ed;
  return {m11, -half * sig_e, -half * kappa, m11};
}

// Near E = 0 the O(Sigma(E)^2) pieces of M11^2 and M12 M21 cancel exactly; the
// expanded form is linear in Sigma(E), which is what keeps det finite-precision
// meaningful when Sigma(E) diverges at the band edge.
inline double projected_det(const SpectralContext& ctx, const ImpuritySpec& imp, Sector s, double e) {
  const double d = imp.delta;
  if (std::abs(e) < 0.5 * std::abs(d)) {
    const double sigma = detail::sector_sign(ctx, s, d);
    const double half = 0.5 * imp.omega * imp.omega;
    const double u = ctx.self_energy(e), v = ctx.self_energy(d), n = ctx.n_mu_nu(d, d);
    const double D = d - e;
    const double a = 1.0 - sigma * half * v / D;
    return a * a + half * u / D * (2.0 * sigma - half * v / D + half * n);
  }
  auto m = projected_matrix(ctx, imp, s, e);
  return m[0] * m[3] - m[1] * m[2];
}

inline ProjectedModeSolution solve_projected_mode(const SpectralContext& ctx, const ImpuritySpec& imp, Sector s) {
  validate(imp);
  const double sigma = detail::sector_sign(ctx, s, imp.delta);
  if (imp.omega == 0.0) fail(ErrorCode::no_root, "no projected bound mode at Omega = 0");
  const double J = ctx.scale();
  const bool continuum = !ctx.is_lattice_sum() && !std::holds_alternative<ClosedForm>(ctx.mode());
  const double lo_mag = continuum ? 2e-6 * J : 1e-200 * J;
  const double hi_mag = 10.0 * std::max({J, std::abs(imp.delta), imp.omega});
  auto det = [&](double e) { return projected_det(ctx, imp, s, e); };

  // Log-spaced scan from the band edge downwards; the first sign change is the
  // shallowest root.
  const int npts = 200;
  std::optional<std::pair<double, double>> bracket;
  double prev_e = -lo_mag, prev_f = det(prev_e);
  for (int i = 1; i < npts; ++i) {
    const double e = -lo_mag * std::pow(hi_mag / lo_mag, static_cast<double>(i) / (npts - 1));
    if (std::abs(e - imp.delta) < 1e-6 * std::abs(imp.delta)) continue;
    const double f = det(e);
    if ((f < 0.0) != (prev_f < 0.0)) {
      bracket = std::make_pair(e, prev_e);
      break;
    }
    prev_e = e;
    prev_f = f;
  }
  if (!bracket) fail(ErrorCode::no_root, "det M has no sign change below the band");

  ProjectedModeSolution sol;
  sol.sector = s;
  sol.delta = imp.delta;
  sol.E1s = detail::negative_energy_root(det, bracket->first, bracket->second);
  sol.det_residual = std::abs(det(sol.E1s));

  auto m = projected_matrix(ctx, imp, s, sol.E1s);
  const double r1 = std::hypot(m[0], m[1]), r2 = std::hypot(m[2], m[3]);
  if (std::max(r1, r2) < 1e-12) fail(ErrorCode::degenerate_nullspace, "M vanishes identically at the root");
  // Null vector from the row with the larger norm.
  std::array<double, 2> c = r1 >= r2 ? std::array<double, 2>{-m[1], m[0]} : std::array<double, 2>{-m[3], m[2]};

  // phi_A = (Omega^2/2) eta [ (C2 - sigma C1/(D-E)) / (E - eps) + sigma C1 / ((D-E)(D - eps)) ]
  const double half = 0.5 * imp.omega * imp.omega;
  const double e = sol.E1s, d = imp.delta;
  double wE = half * (c[1] - sigma * c[0] / (d - e));
  double wD = half * sigma * c[0] / (d - e);
  const double norm2 = wE * wE * ctx.n_mu_nu(e, e) + 2.0 * wE * wD * ctx.n_mu_nu(e, d) + wD * wD * ctx.n_mu_nu(d, d);
  double scale = 1.0 / std::sqrt(norm2);
  // Overall sign: positive overlap int eta phi_A with the coupling profile.
  const double overlap = wE * ctx.self_energy(e) + wD * ctx.self_energy(d);
  if (overlap < 0.0) scale = -scale;
  c[0] *= scale;
  c[1] *= scale;
  sol.C = c;
  sol.weight_E = wE * scale;
  sol.weight_D = wD * scale;
  const double mc0 = m[0] * c[0] + m[1] * c[1], mc1 = m[2] * c[0] + m[3] * c[1];
  sol.null_residual = std::hypot(mc0, mc1) / std::hypot(c[0], c[1]);
  if (ctx.bath().dimension == 1) {
    auto rp = resolvent_profile(ctx, {{e, sol.weight_E}, {d, sol.weight_D}}, 1.0);
    sol.phi_A = std::move(rp.profile);
    sol.tail = rp.tail;
  }
  return sol;
}

struct PerturbativeBoundState {
  Regime regime{Regime::PG};
  int N{1};
  double EN{0.0};
  double E1{0.0};  // PG: Lamb-shifted impurity level Delta + Omega^2 Sigma(Delta)
  std::optional<ProjectedModeSolution> mode{};
  // PG: real-space coefficients of C_e^dagger, Omega R(Delta, j)
  SiteProfile C_e{};
  // PE: D_g = Omega sqrt(N) int eta phi_A / (Delta - eps)
  double D_g{0.0};
  // JC: normalized weights of |e, N-1> and |g, N> in the collective-mode basis
  double jc_e{0.0};
  double jc_g{0.0};
};

inline PerturbativeBoundState perturbative_bound_state(const SpectralContext& ctx, const ImpuritySpec& imp, int N,
                                                       Regime regime) {
  if (N < 1) fail(ErrorCode::config, "N must be >= 1");
  if (regime != Regime::PG && regime != Regime::PE) fail(ErrorCode::config, "perturbative regime must be PG or PE");
  if (regime == Regime::PG && !(imp.delta < 0.0)) fail(ErrorCode::regime_mismatch, "PG needs Delta < 0");
  if (regime == Regime::PE && !(imp.delta > ctx.bandwidth())) fail(ErrorCode::regime_mismatch, "PE needs Delta > W");
  PerturbativeBoundState out;
  out.regime = regime;
  out.N = N;
  const Sector s = regime == Regime::PG ? Sector::e : Sector::g;
  auto mode = solve_projected_mode(ctx, imp, s);
  if (regime == Regime::PG) {
    out.E1 = imp.delta + imp.omega * imp.omega * ctx.self_energy(imp.delta);
    out.EN = out.E1 + (N - 1) * mode.E1s;
    if (ctx.bath().dimension == 1) {
      auto rp = resolvent_profile(ctx, {{imp.delta, imp.omega}}, imp.omega * imp.omega * ctx.n_mu_nu(imp.delta, imp.delta));
      out.C_e = std::move(rp.profile);
    }
  } else {
    out.EN = N * mode.E1s;
    const double d = imp.delta;
    out.D_g = imp.omega * std::sqrt(static_cast<double>(N)) *
              (mode.weight_E * ctx.n_mu_nu(mode.E1s, d) + mode.weight_D * ctx.n_mu_nu(d, d));
  }
  out.mode = std::move(mode);
  return out;
}

inline double jc_energy(const ImpuritySpec& imp, int N) {
  return 0.5 * (imp.delta - std::sqrt(imp.delta * imp.delta + 4.0 * N * imp.omega * imp.omega));
}

inline PerturbativeBoundState jc_limit(const ImpuritySpec& imp, int N) {
  validate(imp);
  if (N < 1) fail(ErrorCode::config, "N must be >= 1");
  PerturbativeBoundState out;
  out.regime = Regime::JC;
  out.N = N;
  out.EN = jc_energy(imp, N);
  const double gN = std::sqrt(static_cast<double>(N)) * imp.omega;
  const double norm = std::sqrt(out.EN * out.EN + gN * gN);
  if (norm == 0.0) {
    out.jc_g = 1.0;
    return out;
  }
  out.jc_e = std::abs(out.EN) / norm;
  out.jc_g = -gN / norm;
  return out;
}

}  // namespace ebs
