#pragma once

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <cstdint>
#include <utility>

#include "ebs/error.hpp"

namespace ebs::detail {

// Root of f on [lo, hi] given a sign change; returns the midpoint of the final bracket.
template <class F>
double bracketed_root(F&& f, double lo, double hi, int bits = 52, std::uintmax_t max_iter = 400) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0)) fail(ErrorCode::bracketing_failure, "no sign change on the bracket");
  std::uintmax_t it = max_iter;
  auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(bits), it);
  return 0.5 * (r.first + r.second);
}

// Same, for an energy bracket (lo, hi) with hi < 0, solved in t = log(-E) so
// that roots at the 1e-12 scale and at the 1e2 scale converge equally well.
template <class F>
double negative_energy_root(F&& f, double lo, double hi, int bits = 52) {
  auto g = [&](double t) { return f(-std::exp(t)); };
  // t runs the other way: E = lo  <->  t = log(-lo) (largest t).
  double t = bracketed_root(g, std::log(-hi), std::log(-lo), bits);
  return -std::exp(t);
}

}  // namespace ebs::detail
