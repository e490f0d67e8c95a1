#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "ebs/error.hpp"
#include "ebs/model.hpp"
#include "ebs/perturbative.hpp"

namespace ebs {

// rms distance from the coupled site; density.site holds j relative to site 0.
inline double localization_length(const SiteProfile& density) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < density.site.size(); ++i) {
    const double j = static_cast<double>(density.site[i]);
    num += j * j * density.value[i];
    den += density.value[i];
  }
  if (!(den > 0.0)) fail(ErrorCode::empty_density, "localization length of an empty density");
  return std::sqrt(num / den);
}

// |E_N - H(-Delta) Delta| with H(0) = 0
inline double modified_energy(double en, double delta) { return std::abs(en - (delta < 0.0 ? delta : 0.0)); }

struct ScalingFit {
  double exponent{0.0};
  double stderr_{0.0};
  double prefactor{0.0};
  std::pair<double, double> window{0.0, 0.0};
  double r_squared{0.0};
  std::size_t points{0};
};

inline ScalingFit fit_scaling(const std::vector<std::pair<double, double>>& pts) {
  if (pts.size() < 6) fail(ErrorCode::config, "scaling fits need at least 6 points");
  std::vector<double> x, y;
  for (auto [o, q] : pts) {
    if (!(o > 0.0) || !(q > 0.0)) fail(ErrorCode::nonpositive_data, "scaling fit needs positive data");
    x.push_back(std::log(o));
    y.push_back(std::log(q));
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) fail(ErrorCode::config, "scaling fit needs distinct abscissae");
  ScalingFit f;
  f.exponent = sxy / sxx;
  const double icpt = my - f.exponent * mx;
  f.prefactor = std::exp(icpt);
  double rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - icpt - f.exponent * x[i];
    rss += r * r;
  }
  f.stderr_ = std::sqrt(rss / (n - 2.0) / sxx);
  f.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
  f.points = pts.size();
  f.window = {pts.front().first, pts.front().first};
  for (auto [o, q] : pts) {
    f.window.first = std::min(f.window.first, o);
    f.window.second = std::max(f.window.second, o);
  }
  return f;
}

// Visual guide only; the regions are not phase boundaries.
struct RegimeThresholds {
  double jc_factor{5.0};
  double weak_factor{5.0};
};

inline Regime classify_regime(const ImpuritySpec& imp, const BathSpec& bath, RegimeThresholds th = {}) {
  const double W = bandwidth(bath);
  const double d = imp.delta, o = imp.omega;
  if (std::isfinite(W) && o > th.jc_factor * std::max(std::abs(d), W)) return Regime::JC;
  if (d < 0.0 && o < std::abs(d) / th.weak_factor) return Regime::PG;
  if (d > W && o < (d - W) / th.weak_factor) return Regime::PE;
  if (d > 0.0 && d <= W && o < d / th.weak_factor) return Regime::NP_II;
  return Regime::NP_I;
}

}  // namespace ebs
