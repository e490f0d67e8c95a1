#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <array>
#include <functional>

namespace ebs::detail {

struct QuadTol {
  double abs_tol{1e-10};
  double rel_tol{1e-8};
  unsigned max_depth{20};
};

// Adaptive Gauss-Kronrod (7/15) on [a, b]; infinite limits are mapped by Boost.
// Boost measures the error against the L1 norm of the integrand, so the
// absolute tolerance is applied in that norm as well.
template <class F>
double integrate(F&& f, double a, double b, const QuadTol& tol) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  double err = 0.0;
  return GK::integrate(f, a, b, tol.max_depth, std::min(tol.rel_tol, tol.abs_tol), &err);
}

// Tensorized integral of f(x) over [a, b]^dim, nesting the 1D rule axis by axis.
template <class F>
double integrate_cube(const F& f, int dim, double a, double b, const QuadTol& tol) {
  std::array<double, 3> x{0.0, 0.0, 0.0};
  std::function<double(int)> level = [&](int axis) -> double {
    if (axis == dim) return f(x);
    return integrate(
        [&, axis](double t) {
          x[axis] = t;
          return level(axis + 1);
        },
        a, b, tol);
  };
  return level(0);
}

}  // namespace ebs::detail
