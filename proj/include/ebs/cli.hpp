#pragma once

// Batch front-end plumbing: configuration, single points, sweeps, comparisons
// and scaling fits.  The executable in tools/ only parses flags.

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ebs/analysis.hpp"
#include "ebs/ed_oracle.hpp"
#include "ebs/error.hpp"
#include "ebs/exact_fewbody.hpp"
#include "ebs/model.hpp"
#include "ebs/perturbative.hpp"
#include "ebs/sebs.hpp"
#include "ebs/spectral.hpp"
#include "ebs/variational.hpp"

#ifndef EBS_VERSION
#define EBS_VERSION "unversioned"
#endif

namespace ebs::cli {

inline constexpr const char* version() { return EBS_VERSION; }

// ---- configuration -------------------------------------------------------

// Plain key = value text; '#' starts a comment.  Values stay strings until
// the merged map is interpreted, so file and command line share one parser.
using ConfigMap = std::map<std::string, std::string>;

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{"dimension", "dispersion", "hopping", "curvature", "cutoff",
                                             "units",     "delta",      "omega",   "n",         "sites",
                                             "boundary",  "method",     "spectral", "workers",  "nnz_cap",
                                             "seed"};
  return keys;
}

inline std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline ConfigMap parse_config_text(const std::string& text) {
  ConfigMap m;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(ErrorCode::config, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    const auto& keys = config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      fail(ErrorCode::config, "line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    if (val.empty()) fail(ErrorCode::config, "line " + std::to_string(lineno) + ": empty value for '" + key + "'");
    m[key] = val;
  }
  return m;
}

inline ConfigMap read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorCode::config, "cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

// defaults < file < command line
inline ConfigMap merge(ConfigMap base, const ConfigMap& over) {
  for (const auto& [k, v] : over) base[k] = v;
  return base;
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(x)) fail(ErrorCode::config, key + ": not a number: " + v);
  return x;
}

inline long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') fail(ErrorCode::config, key + ": not an integer: " + v);
  return x;
}

struct RunConfig {
  int dimension{1};
  std::string dispersion{"tight-binding"};
  double hopping{1.0};
  double curvature{1.0};
  std::optional<double> cutoff{};
  std::string units{};  // must be declared: "J" or "curvature"
  double delta{0.0};
  double omega{0.0};
  int n{1};
  int sites{41};
  Boundary boundary{Boundary::periodic};
  std::string method{"variational"};
  std::string spectral{"continuum"};  // or "lattice": finite-ring sums on `sites`
  int workers{1};
  std::size_t nnz_cap{50000000};
  long seed{0};

  BathSpec bath() const {
    BathSpec b;
    b.dimension = dimension;
    if (dispersion == "tight-binding")
      b.dispersion = TightBinding{hopping};
    else
      b.dispersion = Quadratic{curvature, cutoff};
    return b;
  }
  ImpuritySpec impurity() const { return {delta, omega}; }
  LatticeGrid grid() const { return {dimension, sites, boundary}; }
  SpectralContext context() const {
    if (spectral == "lattice") return SpectralContext(bath(), LatticeSum{grid()});
    return SpectralContext::automatic(bath());
  }
};

inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> m{"sebs", "perturbative", "variational", "exact2", "exact3", "ed", "jc"};
  return m;
}

inline int default_workers() {
  if (const char* w = std::getenv("EBS_WORKERS")) {
    char* end = nullptr;
    const long n = std::strtol(w, &end, 10);
    if (end != w && *end == '\0' && n >= 1) return static_cast<int>(n);
  }
  return 1;
}

inline RunConfig interpret(const ConfigMap& m) {
  RunConfig c;
  c.workers = default_workers();
  auto get = [&](const char* k) -> const std::string* {
    auto it = m.find(k);
    return it == m.end() ? nullptr : &it->second;
  };
  if (auto v = get("dimension")) c.dimension = static_cast<int>(parse_int("dimension", *v));
  if (auto v = get("dispersion")) c.dispersion = *v;
  if (c.dispersion == "tb") c.dispersion = "tight-binding";
  if (c.dispersion != "tight-binding" && c.dispersion != "quadratic")
    fail(ErrorCode::config, "dispersion must be tight-binding or quadratic");
  if (auto v = get("hopping")) c.hopping = parse_double("hopping", *v);
  if (auto v = get("curvature")) c.curvature = parse_double("curvature", *v);
  if (auto v = get("cutoff")) c.cutoff = parse_double("cutoff", *v);
  if (auto v = get("units")) c.units = *v;
  const std::string want = c.dispersion == "tight-binding" ? "J" : "curvature";
  if (c.units.empty()) fail(ErrorCode::config, "declare the energy unit (units = " + want + ")");
  if (c.units != want) fail(ErrorCode::config, "units '" + c.units + "' do not match the " + c.dispersion + " bath");
  if (auto v = get("delta")) c.delta = parse_double("delta", *v);
  if (auto v = get("omega")) c.omega = parse_double("omega", *v);
  if (auto v = get("n")) c.n = static_cast<int>(parse_int("n", *v));
  if (auto v = get("sites")) c.sites = static_cast<int>(parse_int("sites", *v));
  if (auto v = get("boundary")) {
    if (*v == "periodic")
      c.boundary = Boundary::periodic;
    else if (*v == "open")
      c.boundary = Boundary::open;
    else
      fail(ErrorCode::config, "boundary must be periodic or open");
  }
  if (auto v = get("method")) c.method = *v;
  const auto& ms = method_names();
  if (std::find(ms.begin(), ms.end(), c.method) == ms.end()) fail(ErrorCode::config, "unknown method " + c.method);
  if (auto v = get("spectral")) c.spectral = *v;
  if (c.spectral != "continuum" && c.spectral != "lattice")
    fail(ErrorCode::config, "spectral must be continuum or lattice");
  if (auto v = get("workers")) c.workers = static_cast<int>(parse_int("workers", *v));
  if (auto v = get("nnz_cap")) c.nnz_cap = static_cast<std::size_t>(parse_int("nnz_cap", *v));
  if (auto v = get("seed")) c.seed = parse_int("seed", *v);
  if (c.n < 1) fail(ErrorCode::config, "n must be >= 1");
  if (c.workers < 1) fail(ErrorCode::config, "workers must be >= 1");
  if (c.omega < 0.0) fail(ErrorCode::config, "omega must be >= 0");
  validate(c.bath());
  validate(c.grid());
  return c;
}

// "0.1,0.2", "log:1e-3:1:13" or "lin:0:1:11"
inline std::vector<double> parse_axis(const std::string& spec, const std::string& name) {
  std::vector<double> out;
  if (spec.rfind("log:", 0) == 0 || spec.rfind("lin:", 0) == 0) {
    const bool lg = spec[1] == 'o';
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(4));
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3) fail(ErrorCode::config, name + ": expected " + spec.substr(0, 3) + ":lo:hi:count");
    const double lo = parse_double(name, parts[0]), hi = parse_double(name, parts[1]);
    const long cnt = parse_int(name, parts[2]);
    if (cnt < 1) fail(ErrorCode::config, name + ": empty axis");
    if (lg && !(lo > 0.0 && hi > 0.0)) fail(ErrorCode::config, name + ": log axis needs positive bounds");
    for (long i = 0; i < cnt; ++i) {
      const double t = cnt == 1 ? 0.0 : static_cast<double>(i) / (cnt - 1);
      out.push_back(lg ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t);
    }
    return out;
  }
  std::stringstream ss(spec);
  for (std::string p; std::getline(ss, p, ',');) {
    p = trim(p);
    if (!p.empty()) out.push_back(parse_double(name, p));
  }
  if (out.empty()) fail(ErrorCode::config, name + ": empty axis");
  return out;
}

// ---- records -------------------------------------------------------------

struct SweepRecord {
  double delta{0.0}, omega{0.0};
  int n{1};
  std::string method{};
  std::optional<double> e_n{}, e_tilde{}, xi_g{}, xi_e{}, p_plus{}, p_minus{}, residual{};
  std::string regime{};
  std::string reason{};  // empty: every field present; "partial": method leaves some undefined
  std::optional<double> wall_ms{};
  std::string message{};  // solver message behind `reason`, not serialized
};

inline std::optional<double> finite(double x) {
  if (std::isfinite(x)) return x;
  return std::nullopt;
}

inline std::string num(const std::optional<double>& x) {
  if (!x) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", *x);
  return buf;
}

inline std::string json_num(const std::optional<double>& x) { return x ? num(x) : "null"; }

inline const char* csv_header() {
  return "delta,omega,n,method,e_n,e_tilde,xi_g,xi_e,p_plus,p_minus,regime,residual,reason,wall_ms";
}

// units and conventions; written once per CSV file and into every JSON line
inline std::string provenance(const RunConfig& c) {
  std::ostringstream o;
  o << "ebs " << version() << " units=" << c.units << " dispersion=" << c.dispersion << " dimension=" << c.dimension
    << " sites=" << c.sites << " boundary=" << to_string(c.boundary) << " spectral=" << c.spectral
    << " e_tilde=|E_N-H(-delta)delta|,H(0)=0";
  return o.str();
}

inline std::string to_csv(const SweepRecord& r) {
  std::ostringstream o;
  o << num(r.delta) << ',' << num(r.omega) << ',' << r.n << ',' << r.method << ',' << num(r.e_n) << ','
    << num(r.e_tilde) << ',' << num(r.xi_g) << ',' << num(r.xi_e) << ',' << num(r.p_plus) << ',' << num(r.p_minus)
    << ',' << r.regime << ',' << num(r.residual) << ',' << r.reason << ',' << num(r.wall_ms);
  return o.str();
}

inline std::string to_jsonl(const SweepRecord& r, const RunConfig& c) {
  std::ostringstream o;
  o << "{\"delta\":" << json_num(r.delta) << ",\"omega\":" << json_num(r.omega) << ",\"n\":" << r.n
    << ",\"method\":\"" << r.method << "\",\"e_n\":" << json_num(r.e_n) << ",\"e_tilde\":" << json_num(r.e_tilde)
    << ",\"xi_g\":" << json_num(r.xi_g) << ",\"xi_e\":" << json_num(r.xi_e) << ",\"p_plus\":" << json_num(r.p_plus)
    << ",\"p_minus\":" << json_num(r.p_minus) << ",\"regime\":\"" << r.regime << "\",\"residual\":"
    << json_num(r.residual) << ",\"reason\":\"" << r.reason << "\",\"wall_ms\":" << json_num(r.wall_ms)
    << ",\"provenance\":\"" << provenance(c) << "\"}";
  return o.str();
}

// ---- single point --------------------------------------------------------

inline void require_n(const RunConfig& c, int n, const char* method) {
  if (c.n != n) fail(ErrorCode::config, std::string(method) + " needs n = " + std::to_string(n));
}

inline Regime perturbative_regime(const RunConfig& c, const SpectralContext& ctx) {
  if (c.delta < 0.0) return Regime::PG;
  if (c.delta > ctx.bandwidth()) return Regime::PE;
  fail(ErrorCode::regime_undefined, "perturbative solutions need Delta < 0 or Delta > W");
}

inline EdOptions ed_options(const RunConfig& c) {
  EdOptions o;
  o.nnz_cap = c.nnz_cap;
  o.correlation = true;
  return o;
}

// Extras requested by the single-point subcommands.
struct PointOptions {
  bool emit_profile{false};
  std::optional<std::array<double, 3>> seeds{};  // variational (e1, e2, tA)
  std::optional<Regime> sector{};                // perturbative override
  bool order_check{false};
  std::vector<long> amplitudes{};                 // exact2/exact3 sites
};

using Json = nlohmann::ordered_json;

inline Json json_profile(const SiteProfile& p) { return Json{{"site", p.site}, {"value", p.value}}; }

inline Json json_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

inline void fill_record(SweepRecord& r, const RunConfig& c, const PointOptions& po = {}, Json* detail = nullptr) {
  auto ctx = c.context();
  const auto imp = c.impurity();
  Json d;
  auto set_energy = [&](double e) {
    r.e_n = e;
    r.e_tilde = modified_energy(e, c.delta);
  };
  if (c.method == "sebs") {
    require_n(c, 1, "sebs");
    auto s = solve_sebs(ctx, imp, c.dimension == 1);
    set_energy(s.E1);
    r.xi_g = finite(s.xi);
    r.p_plus = 1.0;
    r.p_minus = 0.0;
    r.residual = s.residual;
    d = Json{{"E1", s.E1}, {"u_B", s.u_B}, {"xi", json_or_null(s.xi)}, {"residual", s.residual}, {"tail", s.tail}};
    if (!s.f_B.site.empty()) d["f_B"] = json_profile(s.f_B);
  } else if (c.method == "perturbative") {
    auto p = perturbative_bound_state(ctx, imp, c.n, po.sector ? *po.sector : perturbative_regime(c, ctx));
    set_energy(p.EN);
    r.residual = p.mode->det_residual;
    SiteProfile dens{p.mode->phi_A.site, {}};
    for (double a : p.mode->phi_A.value) dens.value.push_back(a * a);
    if (!dens.site.empty() && p.mode->tail <= 1e-8)
      (p.regime == Regime::PG ? r.xi_e : r.xi_g) = localization_length(dens);
    d = Json{{"sector", p.regime == Regime::PG ? "e" : "g"},
             {"EN", p.EN},
             {"E1", p.E1},
             {"E1s", p.mode->E1s},
             {"det_residual", p.mode->det_residual},
             {"null_residual", p.mode->null_residual}};
    if (p.regime == Regime::PE) d["D_g"] = p.D_g;
    if (po.emit_profile && !p.mode->phi_A.site.empty()) d["phi_A"] = json_profile(p.mode->phi_A);
    if (po.order_check) {
      // against the single-excitation bound state and the lattice oracle
      Json oc;
      if (c.n == 1) {
        const double e1 = solve_sebs(ctx, imp, false).E1;
        oc["sebs"] = Json{{"E", e1}, {"abs_diff", std::abs(e1 - p.EN)}};
      }
      try {
        const double e = ground_state(ctx, imp, c.grid(), c.n, ed_options(c)).energy;
        oc["ed"] = Json{{"E", e}, {"abs_diff", std::abs(e - p.EN)}, {"sites", c.sites}};
      } catch (const Error& e) {
        oc["ed"] = Json{{"reason", to_string(e.code())}};
      }
      oc["omega4"] = std::pow(c.omega, 4);
      d["order_check"] = oc;
    }
  } else if (c.method == "variational") {
    VariationalOptions vo;
    vo.seed = po.seeds;
    vo.with_profiles = c.dimension == 1;
    auto s = optimize(ctx, imp, c.n, vo);
    set_energy(s.EN);
    r.xi_g = finite(s.xi_g);
    r.xi_e = finite(s.xi_e);
    r.p_plus = s.p_plus;
    r.p_minus = s.p_minus;
    r.residual = s.stationarity;
    d = Json{{"EN", s.EN},         {"e1", s.e1},       {"e2", s.e2},
             {"tA", s.tA},         {"tB", s.tB},       {"alpha", s.alpha},
             {"beta", s.beta},     {"gamma", s.gamma}, {"xi_g", json_or_null(s.xi_g)},
             {"xi_e", json_or_null(s.xi_e)}, {"p_plus", s.p_plus}, {"p_minus", s.p_minus},
             {"stationarity", s.stationarity}, {"gp_residual", s.gp_residual},
             {"local_minima", s.minima.size()}, {"evaluations", s.evaluations}};
    if (po.emit_profile && !s.phiA.site.empty()) {
      d["phi_A"] = json_profile(s.phiA);
      d["phi_B"] = json_profile(s.phiB);
    }
  } else if (c.method == "exact2") {
    require_n(c, 2, "exact2");
    auto t = solve_two_body(diagonalize_single(ctx, imp, c.grid()));
    set_energy(t.E2);
    r.residual = t.pi_residual;
    d = Json{{"E", t.E2}, {"Z2B", t.Z2B}, {"u_B2", t.u_B2}, {"residuals", Json{{"pi", t.pi_residual}}}};
    Json amps = Json::array();
    for (long j : po.amplitudes) amps.push_back(Json{{"j", j}, {"f1", t.f1_real(j)}, {"f2_0j", t.f2_real(0, j)}});
    d["amplitudes"] = amps;
  } else if (c.method == "exact3") {
    require_n(c, 3, "exact3");
    auto t = solve_three_body(diagonalize_single(ctx, imp, c.grid()));
    set_energy(t.E3);
    r.residual = t.null_residual;
    d = Json{{"E", t.E3},
             {"residuals", Json{{"null", t.null_residual}, {"det", t.det_residual}, {"sigma_ratio", t.sigma_ratio}}},
             {"spurious_roots", t.spurious_roots}};
    Json amps = Json::array();
    for (long j : po.amplitudes)
      amps.push_back(Json{{"j", j}, {"f2_0j", t.f2_real(0, j)}, {"f3_00j", t.f3_real(0, 0, j)}});
    d["amplitudes"] = amps;
  } else if (c.method == "ed") {
    auto g = ground_state(ctx, imp, c.grid(), c.n, ed_options(c));
    set_energy(g.energy);
    r.xi_g = finite(g.xi_g);
    r.xi_e = finite(g.xi_e);
    auto ev = correlation_spectrum(g);
    r.p_plus = ev[0];
    r.p_minus = ev.size() > 1 ? ev[1] : 0.0;
    r.residual = g.residual;
    d = Json{{"E_N", g.energy},
             {"residual", g.residual},
             {"matvecs", g.matvecs},
             {"xi_g", json_or_null(g.xi_g)},
             {"xi_e", json_or_null(g.xi_e)},
             {"population_e", g.population_e},
             {"G_eigenvalues", ev},
             {"n_g", json_profile(g.density_g)},
             {"n_e", json_profile(g.density_e)}};
  } else if (c.method == "jc") {
    auto j = jc_limit(imp, c.n);
    set_energy(j.EN);
    d = Json{{"EN", j.EN}, {"weight_e", j.jc_e}, {"weight_g", j.jc_g}};
  } else {
    fail(ErrorCode::config, "unknown method " + c.method);
  }
  if (detail) *detail = std::move(d);
}

// Never throws for solver trouble: failures become reason codes.
inline SweepRecord run_point(const RunConfig& c, bool timing = false, const PointOptions& po = {},
                             Json* detail = nullptr) {
  SweepRecord r;
  r.delta = c.delta;
  r.omega = c.omega;
  r.n = c.n;
  r.method = c.method;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.regime = to_string(classify_regime(c.impurity(), c.bath()));
    fill_record(r, c, po, detail);
    const bool all = r.e_n && r.e_tilde && r.xi_g && r.xi_e && r.p_plus && r.p_minus && r.residual;
    r.reason = all ? "" : "partial";
  } catch (const Error& e) {
    r.e_n = r.e_tilde = r.xi_g = r.xi_e = r.p_plus = r.p_minus = r.residual = std::nullopt;
    r.reason = std::string(to_string(e.code()));
    r.message = e.what();
  } catch (const std::exception& e) {
    r.e_n = r.e_tilde = r.xi_g = r.xi_e = r.p_plus = r.p_minus = r.residual = std::nullopt;
    r.reason = "internal";
    r.message = e.what();
  }
  if (timing)
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

// ---- sweeps --------------------------------------------------------------

struct Axes {
  std::vector<double> delta{}, omega{};
  std::vector<int> n{};
  std::vector<std::string> method{};
};

struct Preset {
  double delta;
  std::vector<double> omega;
  std::vector<int> n;
  std::vector<std::string> method;
};

inline Preset preset(const std::string& name) {
  const auto om = parse_axis("log:1e-3:1:13", "omega");
  if (name == "path-i") return {-0.2, om, {2, 3, 4, 5}, {"variational", "ed"}};
  if (name == "path-ii") return {0.0, om, {2, 3, 4, 5}, {"variational", "ed"}};
  if (name == "path-iii") return {0.2, om, {2, 3, 4, 5}, {"variational", "ed"}};
  fail(ErrorCode::config, "unknown preset " + name);
}

inline std::vector<RunConfig> expand(const RunConfig& base, Axes ax) {
  if (ax.delta.empty() || ax.omega.empty() || ax.n.empty() || ax.method.empty())
    fail(ErrorCode::config, "sweep axes must be nonempty");
  std::sort(ax.delta.begin(), ax.delta.end());
  std::sort(ax.omega.begin(), ax.omega.end());
  std::sort(ax.n.begin(), ax.n.end());
  std::sort(ax.method.begin(), ax.method.end());
  ax.method.erase(std::unique(ax.method.begin(), ax.method.end()), ax.method.end());
  const auto& ms = method_names();
  for (const auto& m : ax.method)
    if (std::find(ms.begin(), ms.end(), m) == ms.end()) fail(ErrorCode::config, "unknown method " + m);
  std::vector<RunConfig> pts;
  for (double d : ax.delta)
    for (double o : ax.omega) {
      if (o < 0.0) fail(ErrorCode::config, "omega must be >= 0");
      for (int n : ax.n) {
        if (n < 1) fail(ErrorCode::config, "n must be >= 1");
        for (const auto& m : ax.method) {
          RunConfig c = base;
          c.delta = d;
          c.omega = o;
          c.n = n;
          c.method = m;
          pts.push_back(c);
        }
      }
    }
  return pts;
}

// Parallel over points; the result vector keeps the sorted point order.
inline std::vector<SweepRecord> run_sweep(const std::vector<RunConfig>& pts, int workers, bool timing = false) {
  std::vector<SweepRecord> out(pts.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < pts.size();) out[i] = run_point(pts[i], timing);
  };
  const int w = std::max(1, std::min<int>(workers, static_cast<int>(pts.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < w; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  return out;
}

// ---- comparisons ---------------------------------------------------------

struct Tolerances {
  double energy_abs{1e-8};                // |dE| in energy units
  std::optional<double> e_tilde_rel{};    // relative deviation of E~ accepted instead
  std::optional<double> xi_rel{};         // relative xi deviation, both sectors
};

struct ComparisonRow {
  double delta{0.0}, omega{0.0};
  int n{1};
  std::string a{}, b{};
  std::optional<double> e_a{}, e_b{}, abs_de{}, rel_de_tilde{}, rel_dxi_g{}, rel_dxi_e{};
  bool pass{false};
  std::string reason{};
};

inline const char* comparison_header() {
  return "delta,omega,n,method_a,method_b,e_a,e_b,abs_de,rel_de_tilde,rel_dxi_g,rel_dxi_e,pass,reason";
}

inline std::string to_csv(const ComparisonRow& r) {
  std::ostringstream o;
  o << num(r.delta) << ',' << num(r.omega) << ',' << r.n << ',' << r.a << ',' << r.b << ',' << num(r.e_a) << ','
    << num(r.e_b) << ',' << num(r.abs_de) << ',' << num(r.rel_de_tilde) << ',' << num(r.rel_dxi_g) << ','
    << num(r.rel_dxi_e) << ',' << (r.pass ? "pass" : "fail") << ',' << r.reason;
  return o.str();
}

inline std::optional<double> rel_dev(const std::optional<double>& x, const std::optional<double>& ref) {
  if (!x || !ref || *ref == 0.0) return std::nullopt;
  return std::abs(*x - *ref) / std::abs(*ref);
}

// b is the reference for relative deviations.
inline ComparisonRow compare_records(const SweepRecord& a, const SweepRecord& b, const Tolerances& tol) {
  ComparisonRow r;
  r.delta = a.delta;
  r.omega = a.omega;
  r.n = a.n;
  r.a = a.method;
  r.b = b.method;
  r.e_a = a.e_n;
  r.e_b = b.e_n;
  if (!a.e_n || !b.e_n) {
    r.reason = "unavailable:" + (a.e_n ? b.reason : a.reason);
    return r;
  }
  r.abs_de = std::abs(*a.e_n - *b.e_n);
  r.rel_de_tilde = rel_dev(a.e_tilde, b.e_tilde);
  r.rel_dxi_g = rel_dev(a.xi_g, b.xi_g);
  r.rel_dxi_e = rel_dev(a.xi_e, b.xi_e);
  bool ok = *r.abs_de <= tol.energy_abs || (tol.e_tilde_rel && r.rel_de_tilde && *r.rel_de_tilde <= *tol.e_tilde_rel);
  if (tol.xi_rel) {
    if (r.rel_dxi_g && *r.rel_dxi_g > *tol.xi_rel) ok = false;
    if (r.rel_dxi_e && *r.rel_dxi_e > *tol.xi_rel) ok = false;
  }
  r.pass = ok;
  return r;
}

// All pairs of methods at every point; the last listed method is the reference.
inline std::vector<ComparisonRow> compare(const RunConfig& base, const Axes& ax, const Tolerances& tol,
                                          int workers) {
  if (ax.method.size() < 2) fail(ErrorCode::config, "compare needs at least two methods");
  Axes one = ax;
  auto pts = expand(base, one);
  auto recs = run_sweep(pts, workers);
  std::map<std::tuple<double, double, int>, std::map<std::string, const SweepRecord*>> at;
  for (const auto& r : recs) at[{r.delta, r.omega, r.n}][r.method] = &r;
  std::vector<ComparisonRow> rows;
  for (const auto& [key, byname] : at)
    for (std::size_t i = 0; i < ax.method.size(); ++i)
      for (std::size_t j = i + 1; j < ax.method.size(); ++j) {
        if (ax.method[i] == ax.method[j]) continue;
        rows.push_back(compare_records(*byname.at(ax.method[i]), *byname.at(ax.method[j]), tol));
      }
  return rows;
}

// ---- scaling fits --------------------------------------------------------

struct ScalingResult {
  int n{1};
  ScalingFit fit{};
  std::vector<std::pair<double, double>> data{};  // (omega, e_tilde)
};

inline ScalingResult scaling_fit(RunConfig c, double omega_min, double omega_max, int points) {
  if (points < 6) fail(ErrorCode::config, "scaling fits need at least 6 points");
  if (!(omega_min > 0.0) || !(omega_max > omega_min)) fail(ErrorCode::config, "need 0 < omega-min < omega-max");
  ScalingResult out;
  out.n = c.n;
  for (int i = 0; i < points; ++i) {
    c.omega = omega_min * std::pow(omega_max / omega_min, static_cast<double>(i) / (points - 1));
    auto r = run_point(c);
    if (!r.e_tilde) fail(ErrorCode::no_bound_state, "point omega=" + num(c.omega) + " failed: " + r.reason);
    out.data.push_back({c.omega, *r.e_tilde});
  }
  out.fit = fit_scaling(out.data);
  return out;
}

// Exit status for a failed solve.
inline int exit_code(const Error& e) { return e.code() == ErrorCode::config ? 2 : 3; }

}  // namespace ebs::cli
