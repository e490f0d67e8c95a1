#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "ebs/detail/quadrature.hpp"
#include "ebs/error.hpp"
#include "ebs/model.hpp"

namespace ebs {

struct ClosedForm {};
struct Quadrature {
  double abs_tol{1e-10};
  double rel_tol{1e-8};
};
struct LatticeSum {
  LatticeGrid grid{};
};
using SpectralMode = std::variant<ClosedForm, Quadrature, LatticeSum>;

// Closed forms for the 1D tight-binding bath with point coupling.  All
// functions take energies outside [0, 4J] and use s(E) = sqrt(E (E - 4J)).
namespace tb1d {

inline double s(double e, double J) { return std::sqrt(e * (e - 4.0 * J)); }

inline double self_energy(double e, double J) { return (e < 2.0 * J ? -1.0 : 1.0) / s(e, J); }

inline double n_mu_nu(double a, double b, double J) {
  const bool la = a < 2.0 * J, lb = b < 2.0 * J;
  if (la != lb) return (self_energy(a, J) - self_energy(b, J)) / (b - a);
  const double sa = s(a, J), sb = s(b, J);
  const double num = la ? -(a + b - 4.0 * J) : (a + b - 4.0 * J);
  return num / (sa * sb * (sa + sb));
}

// int eps / ((a - eps)(b - eps)), written without the a N(a,b) - Sigma(b) cancellation.
inline double eps_weighted(double a, double b, double J) {
  const bool la = a < 2.0 * J, lb = b < 2.0 * J;
  if (la != lb) return a * n_mu_nu(a, b, J) - self_energy(b, J);
  const double sa = s(a, J), sb = s(b, J);
  const double pq = std::sqrt((1.0 - 4.0 * J / a) * (1.0 - 4.0 * J / b));
  return 4.0 * J * std::abs(a + b - 4.0 * J) / ((1.0 + pq) * sa * sb * (sa + sb));
}

// Decay factor x in (0, 1) of the site resolvent: x + 1/x = 2 - z/J below the
// band, (z - 2J)/J above it.
inline double decay_factor(double z, double J) {
  const double d = z < 2.0 * J ? -z / J : (z - 4.0 * J) / J;
  return 2.0 / (2.0 + d + std::sqrt(d * (4.0 + d)));
}

// R(z, r) = int dk/2pi exp(ikr) / (z - eps_k)
inline double resolvent(double z, long r, double J) {
  const double x = decay_factor(z, J);
  const double mag = std::pow(x, static_cast<double>(std::labs(r))) / s(z, J);
  if (z < 2.0 * J) return -mag;
  return (r % 2 == 0) ? mag : -mag;
}

}  // namespace tb1d

class SpectralContext {
 public:
  explicit SpectralContext(BathSpec bath, SpectralMode mode = Quadrature{})
      : bath_(std::move(bath)), mode_(std::move(mode)) {
    validate(bath_);
    W_ = ebs::bandwidth(bath_);
    if (auto* tb = std::get_if<TightBinding>(&bath_.dispersion))
      scale_ = tb->hopping;
    else if (auto* q = std::get_if<Quadratic>(&bath_.dispersion))
      scale_ = q->curvature;
    else
      scale_ = W_ > 0.0 ? W_ / (4.0 * bath_.dimension) : 1.0;
    setup();
  }

  // Closed forms where they exist, adaptive quadrature otherwise.
  static SpectralContext automatic(const BathSpec& bath) {
    if (bath.dimension == 1 && bath.is_tight_binding() && bath.is_point()) return SpectralContext(bath, ClosedForm{});
    return SpectralContext(bath, Quadrature{});
  }

  const BathSpec& bath() const { return bath_; }
  const SpectralMode& mode() const { return mode_; }
  double bandwidth() const { return W_; }
  double scale() const { return scale_; }
  bool is_lattice_sum() const { return std::holds_alternative<LatticeSum>(mode_); }
  const LatticeGrid* grid() const {
    auto* ls = std::get_if<LatticeSum>(&mode_);
    return ls ? &ls->grid : nullptr;
  }

  // Sigma(E) = int |eta_k|^2 / (E - eps_k)
  double self_energy(double e) const {
    check_outside(e);
    switch (kind_) {
      case Kind::closed1d: return tb1d::self_energy(e, scale_);
      case Kind::nested_tb: return rest_integral([&](double er) { return tb1d::self_energy(e - er, scale_); });
      default: return integral([&](double eps) { return 1.0 / (e - eps); }, std::abs(e));
    }
  }

  // N(a, b) = int |eta_k|^2 / ((a - eps_k)(b - eps_k))
  double n_mu_nu(double a, double b) const {
    check_outside(a);
    check_outside(b);
    if (b < a) std::swap(a, b);
    switch (kind_) {
      case Kind::closed1d: return tb1d::n_mu_nu(a, b, scale_);
      case Kind::nested_tb:
        return rest_integral([&](double er) { return tb1d::n_mu_nu(a - er, b - er, scale_); });
      default:
        return integral([&](double eps) { return 1.0 / ((a - eps) * (b - eps)); }, std::max(std::abs(a), std::abs(b)));
    }
  }

  // int eps_k |eta_k|^2 / ((a - eps_k)(b - eps_k))
  double eps_weighted(double a, double b) const {
    check_outside(a);
    check_outside(b);
    if (b < a) std::swap(a, b);
    switch (kind_) {
      case Kind::closed1d: return tb1d::eps_weighted(a, b, scale_);
      case Kind::nested_tb:
        return rest_integral([&](double er) {
          return tb1d::eps_weighted(a - er, b - er, scale_) + er * tb1d::n_mu_nu(a - er, b - er, scale_);
        });
      default:
        return integral([&](double eps) { return eps / ((a - eps) * (b - eps)); },
                        std::max(std::abs(a), std::abs(b)));
    }
  }

  // I0 = int |eta_k|^2 / eps_k, or +inf when the integral diverges.
  double capital_i0() const {
    if (kind_ == Kind::grid) {
      if (!tabulated_) {
        if (auto div = analytic_divergence()) return *div;
      }
      std::size_t zeros = 0;
      double sum = 0.0;
      for (std::size_t n = 0; n < eps_.size(); ++n) {
        if (std::abs(eps_[n]) <= 1e-14 * scale_) {
          if (eta2_[n] > 0.0) ++zeros;
          continue;
        }
        sum += eta2_[n] / eps_[n];
      }
      if (zeros > 1) fail(ErrorCode::ill_posed_bath, "dispersion vanishes at more than one coupled grid point");
      return sum / static_cast<double>(eps_.size());
    }
    if (auto div = analytic_divergence()) return *div;
    switch (kind_) {
      case Kind::closed1d: return inf;
      case Kind::nested_tb: return rest_integral([&](double er) { return -tb1d::self_energy(-er, scale_); });
      case Kind::cube_tb: return integral([&](double eps) { return 1.0 / eps; }, 0.0);
      case Kind::quadratic: {
        const auto& q = std::get<Quadratic>(bath_.dispersion);
        return *q.cutoff / (2.0 * pi * pi * q.curvature);
      }
      default: return inf;
    }
  }

  // Brillouin-zone average of g(k, eps_k, |eta_k|^2).  Quadratic baths are
  // treated as isotropic with k = (|k|, 0, 0).
  template <class G>
  double band_average(const G& g) const {
    if (kind_ == Kind::grid) {
      double sum = 0.0;
      for (std::size_t n = 0; n < eps_.size(); ++n) sum += g(ks_[n], eps_[n], eta2_[n]);
      return sum / static_cast<double>(eps_.size());
    }
    if (kind_ == Kind::quadratic) {
      const auto& q = std::get<Quadratic>(bath_.dispersion);
      double lambda = q.cutoff ? *q.cutoff : (bath_.dimension == 1 ? inf : -1.0);
      if (lambda < 0.0) fail(ErrorCode::unsupported, "band average of a quadratic bath in d >= 2 needs an explicit cutoff");
      return detail::integrate(
                 [&](double k) {
                   return radial_weight(k) * g(Momentum{k, 0, 0}, q.curvature * k * k, 1.0);
                 },
                 0.0, lambda, tol_);
    }
    const double norm = std::pow(2.0 * pi, bath_.dimension);
    return detail::integrate_cube(
               [&](const Momentum& k) {
                 return g(k, dispersion_eval(bath_, k), std::norm(coupling_fourier(bath_, k)));
               },
               bath_.dimension, -pi, pi, tol_) /
           norm;
  }

  // R(z, r) = int dk/2pi exp(i k r) / (z - eps_k) on a 1D bath.
  double resolvent_site(double z, long r) const {
    if (bath_.dimension != 1) fail(ErrorCode::unsupported, "site resolvent is implemented for 1D baths");
    check_outside(z);
    switch (kind_) {
      case Kind::closed1d:
      case Kind::nested_tb: return tb1d::resolvent(z, r, scale_);
      case Kind::grid: {
        double sum = 0.0;
        for (std::size_t n = 0; n < eps_.size(); ++n) sum += std::cos(ks_[n][0] * r) / (z - eps_[n]);
        return sum / static_cast<double>(eps_.size());
      }
      case Kind::cube_tb:
        return detail::integrate([&](double k) { return std::cos(k * r) / (z - dispersion_eval(bath_, k)); }, -pi, pi,
                                 tol_) /
               (2.0 * pi);
      default: fail(ErrorCode::unsupported, "site resolvent is not available for quadratic baths");
    }
  }

  // int dk/2pi exp(i k r) eta_k / (z - eps_k) = sum_j eta_j R(z, r - r_j); real profiles only.
  double coupled_resolvent(double z, long r) const {
    if (bath_.is_point()) return resolvent_site(z, r);
    double sum = 0.0;
    for (const auto& s : std::get<TabulatedCoupling>(bath_.coupling).sites) {
      if (std::abs(s.amplitude.imag()) > 1e-14) fail(ErrorCode::unsupported, "complex coupling profiles are not supported");
      sum += s.amplitude.real() * resolvent_site(z, r - s.r[0]);
    }
    return sum;
  }

  // True when E is strictly outside the continuum band (lattice sums: off every level).
  bool outside_band(double e) const {
    if (kind_ == Kind::grid) {
      for (double eps : eps_)
        if (std::abs(e - eps) <= 1e-12 * scale_) return false;
      return true;
    }
    return e < 0.0 || e > W_;
  }

 private:
  enum class Kind { closed1d, nested_tb, cube_tb, quadratic, grid };

  void setup() {
    tabulated_ = std::holds_alternative<TabulatedDispersion>(bath_.dispersion);
    if (auto* q = std::get_if<Quadrature>(&mode_)) {
      if (!(q->abs_tol > 0.0) || !(q->rel_tol > 0.0)) fail(ErrorCode::config, "quadrature tolerances must be positive");
      tol_.abs_tol = q->abs_tol;
      tol_.rel_tol = q->rel_tol;
    }
    if (auto* ls = std::get_if<LatticeSum>(&mode_)) {
      validate(ls->grid);
      if (ls->grid.dimension != bath_.dimension) fail(ErrorCode::config, "lattice-sum grid dimension differs from the bath");
      if (ls->grid.boundary != Boundary::periodic) fail(ErrorCode::config, "lattice sums need a periodic grid");
      kind_ = Kind::grid;
      fill_samples(ls->grid.momenta());
      return;
    }
    if (tabulated_) {
      const auto& tab = std::get<TabulatedDispersion>(bath_.dispersion);
      kind_ = Kind::grid;
      fill_samples(LatticeGrid{bath_.dimension, tab.points_per_axis, Boundary::periodic}.momenta());
      return;
    }
    if (std::holds_alternative<ClosedForm>(mode_)) {
      if (!(bath_.dimension == 1 && bath_.is_tight_binding() && bath_.is_point()))
        fail(ErrorCode::config, "closed forms exist only for the 1D tight-binding bath with point coupling");
      kind_ = Kind::closed1d;
      return;
    }
    if (std::holds_alternative<Quadratic>(bath_.dispersion)) {
      if (!bath_.is_point()) fail(ErrorCode::unsupported, "quadratic baths support point coupling only");
      kind_ = Kind::quadratic;
      return;
    }
    kind_ = (bath_.is_point() && bath_.dimension >= 2) ? Kind::nested_tb : Kind::cube_tb;
  }

  void fill_samples(std::vector<Momentum> ks) {
    ks_ = std::move(ks);
    eps_.resize(ks_.size());
    eta2_.resize(ks_.size());
    for (std::size_t n = 0; n < ks_.size(); ++n) {
      eps_[n] = dispersion_eval(bath_, ks_[n]);
      eta2_[n] = std::norm(coupling_fourier(bath_, ks_[n]));
    }
  }

  void check_outside(double e) const {
    if (!std::isfinite(e)) fail(ErrorCode::in_band, "non-finite energy");
    if (kind_ == Kind::grid) {
      if (!outside_band(e)) fail(ErrorCode::pole_hit, "energy coincides with a lattice level");
      return;
    }
    if (e >= 0.0 && e <= W_) fail(ErrorCode::in_band, "energy " + std::to_string(e) + " lies inside the band");
    if (kind_ != Kind::closed1d) {
      const double edge = 1e-6 * scale_;
      if (std::abs(e) < edge || std::abs(e - W_) < edge)
        fail(ErrorCode::in_band, "energy too close to the band edge for quadrature");
    }
  }

  // +inf when the infrared behaviour at the band bottom makes I0 diverge.
  std::optional<double> analytic_divergence() const {
    if (tabulated_) return std::nullopt;
    if (std::holds_alternative<Quadratic>(bath_.dispersion)) {
      const auto& q = std::get<Quadratic>(bath_.dispersion);
      if (bath_.dimension <= 2 || !q.cutoff) return inf;
      return std::nullopt;
    }
    const double eta0 = std::norm(coupling_fourier(bath_, Momentum{0, 0, 0}));
    if (bath_.dimension <= 2 && eta0 > 1e-14) return inf;
    return std::nullopt;
  }

  double radial_weight(double k) const {
    switch (bath_.dimension) {
      case 1: return 2.0 / (2.0 * pi);
      case 2: return 2.0 * pi * k / (4.0 * pi * pi);
      default: return 4.0 * pi * k * k / (8.0 * pi * pi * pi);
    }
  }

  // int |eta|^2 h(eps) over the zone (or the radial shell for quadratic baths).
  template <class H>
  double integral(const H& h, double energy_scale) const {
    if (kind_ == Kind::grid) {
      double sum = 0.0;
      for (std::size_t n = 0; n < eps_.size(); ++n) sum += eta2_[n] * h(eps_[n]);
      return sum / static_cast<double>(eps_.size());
    }
    if (kind_ == Kind::quadratic) {
      const auto& q = std::get<Quadratic>(bath_.dispersion);
      double lambda = q.cutoff ? *q.cutoff
                               : (bath_.dimension == 1 ? inf : std::sqrt(100.0 * energy_scale / q.curvature));
      return detail::integrate([&](double k) { return radial_weight(k) * h(q.curvature * k * k); }, 0.0, lambda, tol_);
    }
    // 1D point coupling: the integrand is even in k.
    if (bath_.dimension == 1 && bath_.is_point()) {
      const double J = scale_;
      return detail::integrate(
                 [&](double k) {
                   const double sk = std::sin(0.5 * k);
                   return h(4.0 * J * sk * sk);
                 },
                 0.0, pi, tol_) /
             pi;
    }
    const double norm = std::pow(2.0 * pi, bath_.dimension);
    return detail::integrate_cube(
               [&](const Momentum& k) {
                 return std::norm(coupling_fourier(bath_, k)) * h(dispersion_eval(bath_, k));
               },
               bath_.dimension, -pi, pi, tol_) /
           norm;
  }

  // Average over the d-1 trailing momenta of f(eps_rest), used with the 1D closed
  // form along the first axis.  The integrand is even in each momentum; the
  // substitution k = u^2 regularises the 1/|k| behaviour at the band bottom.
  template <class F>
  double rest_integral(const F& f) const {
    const int rest = bath_.dimension - 1;
    const double J = scale_;
    return detail::integrate_cube(
               [&](const Momentum& u) {
                 double er = 0.0, jac = 1.0;
                 for (int i = 0; i < rest; ++i) {
                   const double sk = std::sin(0.5 * u[i] * u[i]);
                   er += 4.0 * J * sk * sk;
                   jac *= 2.0 * u[i];
                 }
                 return jac * f(er);
               },
               rest, 0.0, std::sqrt(pi), tol_) /
           std::pow(pi, rest);
  }

  BathSpec bath_;
  SpectralMode mode_;
  double W_{0.0};
  double scale_{1.0};
  bool tabulated_{false};
  Kind kind_{Kind::cube_tb};
  detail::QuadTol tol_{};
  std::vector<Momentum> ks_{};
  std::vector<double> eps_{};
  std::vector<double> eta2_{};
};

struct PoleTerm {
  double z;
  double weight;
};

struct ResolventProfile {
  SiteProfile profile{};
  double tail{0.0};  // fraction of the expected weight outside the sampled sites
};

// Real-space amplitudes psi_j = sum_t weight_t * coupled_resolvent(z_t, j) on a
// 1D bath.  Lattice sums cover the whole periodic lattice; continuum baths use a
// window -R..R doubled until the weight outside it is below tail_tol of
// expected_norm2 (or until max_radius, leaving the tail as reported).
inline ResolventProfile resolvent_profile(const SpectralContext& ctx, const std::vector<PoleTerm>& terms,
                                          double expected_norm2, double tail_tol = 1e-10,
                                          long max_radius = 1L << 23) {
  ResolventProfile out;
  auto amp = [&](long j) {
    double v = 0.0;
    for (const auto& t : terms) v += t.weight * ctx.coupled_resolvent(t.z, j);
    return v;
  };
  if (const LatticeGrid* g = ctx.grid()) {
    for (std::size_t i = 0; i < g->volume(); ++i) {
      long j = g->coordinate(i)[0];
      out.profile.site.push_back(j);
      out.profile.value.push_back(amp(j));
    }
    out.tail = 0.0;
    return out;
  }
  if (expected_norm2 <= 0.0) {
    out.profile.site = {0};
    out.profile.value = {amp(0)};
    return out;
  }
  long radius = 32;
  double inside = 0.0;
  std::vector<double> right{amp(0)};
  std::vector<double> left{};
  right.reserve(2 * radius);
  for (long j = 1; j <= radius; ++j) {
    right.push_back(amp(j));
    left.push_back(amp(-j));
  }
  for (;;) {
    inside = right[0] * right[0];
    for (std::size_t i = 1; i < right.size(); ++i) inside += right[i] * right[i];
    for (double v : left) inside += v * v;
    out.tail = std::max(0.0, expected_norm2 - inside) / expected_norm2;
    if (out.tail <= tail_tol || radius >= max_radius) break;
    long next = 2 * radius;
    for (long j = radius + 1; j <= next; ++j) {
      right.push_back(amp(j));
      left.push_back(amp(-j));
    }
    radius = next;
  }
  const long n = static_cast<long>(left.size());
  for (long i = n - 1; i >= 0; --i) {
    out.profile.site.push_back(-(i + 1));
    out.profile.value.push_back(left[static_cast<std::size_t>(i)]);
  }
  for (std::size_t i = 0; i < right.size(); ++i) {
    out.profile.site.push_back(static_cast<long>(i));
    out.profile.value.push_back(right[i]);
  }
  return out;
}

inline double self_energy(const SpectralContext& ctx, double e) { return ctx.self_energy(e); }
inline double n_mu_nu(const SpectralContext& ctx, double a, double b) { return ctx.n_mu_nu(a, b); }
inline double capital_i0(const SpectralContext& ctx) { return ctx.capital_i0(); }

// w_alpha(E) = (Omega^2 / 2) int eps^(alpha-1) |eta|^2 / (E - eps)^alpha
inline double w_alpha(const SpectralContext& ctx, const ImpuritySpec& imp, double e, int alpha) {
  const double pref = 0.5 * imp.omega * imp.omega;
  if (alpha == 1) return pref * ctx.self_energy(e);
  if (alpha == 2) return pref * ctx.eps_weighted(e, e);
  fail(ErrorCode::config, "alpha must be 1 or 2");
}

}  // namespace ebs
