#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "ebs/error.hpp"

namespace ebs {

using cplx = std::complex<double>;
using Momentum = std::array<double, 3>;
using Site = std::array<int, 3>;

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// eps_k = 2J sum_i (1 - cos k_i)
struct TightBinding {
  double hopping{1.0};
};

// eps_k = c |k|^2; cutoff is a momentum |k| <= Lambda (unset means the default rule)
struct Quadratic {
  double curvature{1.0};
  std::optional<double> cutoff{};
};

// Samples on the uniform grid k_n = 2 pi n / P per axis, n = 0..P-1, row-major
// with the first axis slowest.
struct TabulatedDispersion {
  int points_per_axis{0};
  std::vector<double> values{};
};

struct PointCoupling {};

struct CouplingSite {
  Site r{0, 0, 0};
  cplx amplitude{1.0};
};

struct TabulatedCoupling {
  std::vector<CouplingSite> sites{};
};

using Dispersion = std::variant<TightBinding, Quadratic, TabulatedDispersion>;
using CouplingProfile = std::variant<PointCoupling, TabulatedCoupling>;

struct BathSpec {
  int dimension{1};
  Dispersion dispersion{TightBinding{}};
  CouplingProfile coupling{PointCoupling{}};

  bool is_tight_binding() const { return std::holds_alternative<TightBinding>(dispersion); }
  bool is_point() const { return std::holds_alternative<PointCoupling>(coupling); }
  double hopping() const {
    if (auto* tb = std::get_if<TightBinding>(&dispersion)) return tb->hopping;
    return 1.0;
  }
};

struct ImpuritySpec {
  double delta{0.0};
  double omega{0.0};
};

enum class Boundary { periodic, open };

inline std::string to_string(Boundary b) { return b == Boundary::periodic ? "periodic" : "open"; }

struct LatticeGrid {
  int dimension{1};
  int sites{3};
  Boundary boundary{Boundary::periodic};

  std::size_t volume() const {
    std::size_t v = 1;
    for (int i = 0; i < dimension; ++i) v *= static_cast<std::size_t>(sites);
    return v;
  }

  // Site index (row-major) to lattice vector.  Periodic lattices use the
  // minimum-image displacement from site 0, open lattices the displacement
  // from the centre site; in both cases the impurity sits at r = 0.
  Site coordinate(std::size_t index) const {
    Site r{0, 0, 0};
    for (int axis = dimension - 1; axis >= 0; --axis) {
      int n = static_cast<int>(index % sites);
      index /= sites;
      if (boundary == Boundary::periodic)
        r[axis] = n <= sites / 2 ? n : n - sites;
      else
        r[axis] = n - sites / 2;
    }
    return r;
  }

  std::size_t coupling_site() const {
    if (boundary == Boundary::periodic) return 0;
    std::size_t idx = 0;
    for (int i = 0; i < dimension; ++i) idx = idx * sites + static_cast<std::size_t>(sites / 2);
    return idx;
  }

  std::vector<Momentum> momenta() const {
    if (boundary != Boundary::periodic) fail(ErrorCode::unsupported, "momenta require a periodic lattice");
    std::vector<Momentum> out;
    out.reserve(volume());
    for (std::size_t idx = 0; idx < volume(); ++idx) {
      Momentum k{0, 0, 0};
      std::size_t rem = idx;
      for (int axis = dimension - 1; axis >= 0; --axis) {
        k[axis] = 2.0 * pi * static_cast<double>(rem % sites) / sites;
        rem /= sites;
      }
      out.push_back(k);
    }
    return out;
  }
};

inline void validate(const LatticeGrid& grid) {
  if (grid.dimension < 1 || grid.dimension > 3) fail(ErrorCode::config, "lattice dimension must be 1, 2 or 3");
  if (grid.sites < 3) fail(ErrorCode::config, "lattice needs at least 3 sites per axis");
}

inline void validate(const ImpuritySpec& imp) {
  if (!(imp.omega >= 0.0) || !std::isfinite(imp.omega)) fail(ErrorCode::config, "omega must be finite and >= 0");
  if (!std::isfinite(imp.delta)) fail(ErrorCode::config, "delta must be finite");
}

inline void validate(const BathSpec& bath) {
  if (bath.dimension < 1 || bath.dimension > 3) fail(ErrorCode::config, "bath dimension must be 1, 2 or 3");
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, TightBinding>) {
          if (!(d.hopping > 0.0)) fail(ErrorCode::config, "hopping must be positive");
        } else if constexpr (std::is_same_v<T, Quadratic>) {
          if (!(d.curvature > 0.0)) fail(ErrorCode::config, "curvature must be positive");
          if (d.cutoff && !(*d.cutoff > 0.0)) fail(ErrorCode::config, "cutoff must be positive");
        } else {
          std::size_t n = 1;
          for (int i = 0; i < bath.dimension; ++i) n *= static_cast<std::size_t>(std::max(d.points_per_axis, 0));
          if (d.points_per_axis < 2 || d.values.size() != n)
            fail(ErrorCode::config, "tabulated dispersion size does not match points_per_axis^dimension");
          double lo = inf;
          for (double v : d.values) lo = std::min(lo, v);
          if (std::abs(lo) > 1e-12) fail(ErrorCode::config, "tabulated dispersion must have minimum 0");
        }
      },
      bath.dispersion);
  if (auto* tab = std::get_if<TabulatedCoupling>(&bath.coupling)) {
    double norm = 0.0;
    for (const auto& s : tab->sites) norm += std::norm(s.amplitude);
    if (tab->sites.empty() || std::abs(norm - 1.0) > 1e-10) fail(ErrorCode::config, "coupling profile must satisfy sum |eta_j|^2 = 1");
    for (const auto& s : tab->sites)
      for (int i = bath.dimension; i < 3; ++i)
        if (s.r[i] != 0) fail(ErrorCode::config, "coupling site outside the bath dimension");
  }
}

inline double bandwidth(const BathSpec& bath) {
  if (auto* tb = std::get_if<TightBinding>(&bath.dispersion)) return 4.0 * bath.dimension * tb->hopping;
  if (std::holds_alternative<Quadratic>(bath.dispersion)) return inf;
  const auto& tab = std::get<TabulatedDispersion>(bath.dispersion);
  double lo = inf, hi = -inf;
  for (double v : tab.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi - lo;
}

// Index of k on the tabulated grid, or nullopt when k is not a grid point.
inline std::optional<std::size_t> tabulated_index(const TabulatedDispersion& tab, int dim, const Momentum& k) {
  const int p = tab.points_per_axis;
  std::size_t idx = 0;
  for (int axis = 0; axis < dim; ++axis) {
    double n = k[axis] * p / (2.0 * pi);
    double rn = std::round(n);
    if (std::abs(n - rn) > 1e-9) return std::nullopt;
    long m = static_cast<long>(rn) % p;
    if (m < 0) m += p;
    idx = idx * p + static_cast<std::size_t>(m);
  }
  return idx;
}

inline double dispersion_eval(const BathSpec& bath, const Momentum& k) {
  if (auto* tb = std::get_if<TightBinding>(&bath.dispersion)) {
    double e = 0.0;
    for (int i = 0; i < bath.dimension; ++i) e += 2.0 * std::pow(std::sin(0.5 * k[i]), 2);
    return 2.0 * tb->hopping * e;
  }
  if (auto* q = std::get_if<Quadratic>(&bath.dispersion)) {
    double k2 = 0.0;
    for (int i = 0; i < bath.dimension; ++i) k2 += k[i] * k[i];
    return q->curvature * k2;
  }
  const auto& tab = std::get<TabulatedDispersion>(bath.dispersion);
  auto idx = tabulated_index(tab, bath.dimension, k);
  if (!idx) fail(ErrorCode::interpolation_not_supported, "tabulated dispersion queried off its momentum grid");
  return tab.values[*idx];
}

inline double dispersion_eval(const BathSpec& bath, double k) { return dispersion_eval(bath, Momentum{k, 0, 0}); }

// eta_k = sum_j eta_j exp(-i k.r_j)
inline cplx coupling_fourier(const BathSpec& bath, const Momentum& k) {
  if (bath.is_point()) return 1.0;
  cplx sum = 0.0;
  for (const auto& s : std::get<TabulatedCoupling>(bath.coupling).sites) {
    double phase = 0.0;
    for (int i = 0; i < bath.dimension; ++i) phase += k[i] * s.r[i];
    sum += s.amplitude * std::polar(1.0, -phase);
  }
  return sum;
}

inline cplx coupling_fourier(const BathSpec& bath, const LatticeGrid& grid, const Momentum& k) {
  if (grid.dimension != bath.dimension) fail(ErrorCode::config, "grid and bath dimensions differ");
  return coupling_fourier(bath, k);
}

// Inverse transform on a periodic grid: eta_j = (1/V) sum_k eta_k exp(i k.r_j).
inline std::vector<cplx> coupling_realspace(const BathSpec& bath, const LatticeGrid& grid) {
  auto ks = grid.momenta();
  std::vector<cplx> out(grid.volume(), 0.0);
  std::vector<cplx> etak(ks.size());
  for (std::size_t n = 0; n < ks.size(); ++n) etak[n] = coupling_fourier(bath, grid, ks[n]);
  for (std::size_t j = 0; j < out.size(); ++j) {
    Site r = grid.coordinate(j);
    cplx s = 0.0;
    for (std::size_t n = 0; n < ks.size(); ++n) {
      double phase = 0.0;
      for (int i = 0; i < grid.dimension; ++i) phase += ks[n][i] * r[i];
      s += etak[n] * std::polar(1.0, phase);
    }
    out[j] = s / static_cast<double>(ks.size());
  }
  return out;
}

// Real-space amplitudes on a list of 1D sites (site index measured from the
// coupled site).
struct SiteProfile {
  std::vector<long> site{};
  std::vector<double> value{};

  double norm2() const {
    double s = 0.0;
    for (double v : value) s += v * v;
    return s;
  }
};

inline BathSpec tight_binding_1d(double hopping = 1.0) { return BathSpec{1, TightBinding{hopping}, PointCoupling{}}; }
inline BathSpec tight_binding(int dimension, double hopping = 1.0) {
  return BathSpec{dimension, TightBinding{hopping}, PointCoupling{}};
}

}  // namespace ebs
