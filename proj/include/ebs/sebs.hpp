#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "ebs/detail/roots.hpp"
#include "ebs/error.hpp"
#include "ebs/model.hpp"
#include "ebs/spectral.hpp"

namespace ebs {

struct SebsSolution {
  double E1{0.0};
  double u_B{1.0};
  double omega{0.0};
  double residual{0.0};  // |F1(E1)|
  SiteProfile f_B{};     // real-space bath amplitudes (1D baths)
  double tail{0.0};
  double xi{std::numeric_limits<double>::quiet_NaN()};

  // f_B(k) per unit sqrt(V): Omega eta_k u_B / (E1 - eps_k)
  double f_B_momentum(const BathSpec& bath, const Momentum& k) const {
    return omega * std::real(coupling_fourier(bath, k)) * u_B / (E1 - dispersion_eval(bath, k));
  }
};

// F1(E) = E - Delta - Omega^2 Sigma(E)
inline double sebs_secular(const SpectralContext& ctx, const ImpuritySpec& imp, double e) {
  return e - imp.delta - imp.omega * imp.omega * ctx.self_energy(e);
}

inline bool sebs_exists(const SpectralContext& ctx, const ImpuritySpec& imp) {
  if (imp.delta < 0.0) return true;
  if (imp.omega == 0.0) return false;
  // On a finite periodic lattice the k = 0 level is a pole of Sigma, so F1 -> +inf at 0-.
  if (ctx.is_lattice_sum()) return true;
  const double i0 = ctx.capital_i0();
  if (std::isinf(i0)) return true;
  return -imp.delta + imp.omega * imp.omega * i0 > 0.0;
}

inline double sebs_localization_length(const SebsSolution& sol, double tail_tol = 1e-8) {
  if (sol.f_B.site.empty()) fail(ErrorCode::unsupported, "no real-space profile available");
  if (sol.tail > tail_tol) fail(ErrorCode::grid_too_small, "bath profile tail exceeds the tolerance");
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < sol.f_B.site.size(); ++i) {
    const double w = sol.f_B.value[i] * sol.f_B.value[i];
    num += static_cast<double>(sol.f_B.site[i]) * static_cast<double>(sol.f_B.site[i]) * w;
    den += w;
  }
  if (den == 0.0) return 0.0;
  return std::sqrt(num / den);
}

// The root E < 0 of F1.  Quadrature contexts cannot approach the band edge
// closer than their refusal distance; closed forms and lattice sums can.
inline double sebs_root(const SpectralContext& ctx, const ImpuritySpec& imp) {
  const double J = ctx.scale();
  const double om2 = imp.omega * imp.omega;
  auto F = [&](double e) { return sebs_secular(ctx, imp, e); };

  const double W = ctx.bandwidth();
  double lo = std::min(imp.delta, 0.0) - om2 * std::max(1.0, std::isfinite(W) ? 1.0 / std::sqrt(W * J) : 1.0);
  lo = std::min(lo, -1e-3 * J);
  for (int i = 0; F(lo) >= 0.0; ++i) {
    lo *= 2.0;
    if (i > 200) fail(ErrorCode::bracketing_failure, "could not bracket the sEBS root from below");
  }

  double hi = 0.0;
  if (imp.delta < 0.0) {
    hi = imp.delta;
    if (F(hi) <= 0.0) fail(ErrorCode::bracketing_failure, "F1(Delta) is not positive");
  } else {
    const bool continuum = !ctx.is_lattice_sum() && !std::holds_alternative<ClosedForm>(ctx.mode());
    const double floor = continuum ? 2e-6 * J : 1e-290 * J;
    hi = -std::min(J, -lo * 0.5);
    while (F(hi) <= 0.0) {
      if (-hi <= floor) fail(ErrorCode::no_bound_state, "no sign change of F1 above the band-edge floor");
      hi *= 1e-2;
      if (-hi < floor) hi = -floor;
    }
  }

  double e = detail::negative_energy_root(F, lo, hi);
  // One Newton step with F1'(E) = 1 + Omega^2 N(E, E), kept only if it helps.
  const double f0 = F(e);
  const double step = f0 / (1.0 + om2 * ctx.n_mu_nu(e, e));
  const double e1 = e - step;
  if (e1 < 0.0 && ctx.outside_band(e1)) {
    const double f1 = F(e1);
    if (std::abs(f1) < std::abs(f0)) e = e1;
  }
  return e;
}

inline SebsSolution solve_sebs(const SpectralContext& ctx, const ImpuritySpec& imp, bool with_profile = true) {
  validate(imp);
  if (!sebs_exists(ctx, imp)) fail(ErrorCode::no_bound_state, "F1(0) <= 0: no single-excitation bound state");
  SebsSolution sol;
  sol.omega = imp.omega;
  if (imp.omega == 0.0) {
    sol.E1 = imp.delta;
    sol.u_B = 1.0;
    sol.f_B = SiteProfile{{0}, {0.0}};
    sol.xi = 0.0;
    return sol;
  }
  sol.E1 = sebs_root(ctx, imp);
  sol.residual = std::abs(sebs_secular(ctx, imp, sol.E1));
  const double bath_weight = imp.omega * imp.omega * ctx.n_mu_nu(sol.E1, sol.E1);
  sol.u_B = 1.0 / std::sqrt(1.0 + bath_weight);
  if (with_profile && ctx.bath().dimension == 1) {
    auto rp = resolvent_profile(ctx, {{sol.E1, imp.omega * sol.u_B}}, bath_weight * sol.u_B * sol.u_B);
    sol.f_B = std::move(rp.profile);
    sol.tail = rp.tail;
    if (sol.tail <= 1e-8) sol.xi = sebs_localization_length(sol);
  }
  return sol;
}

}  // namespace ebs
