// ebs: command-line front-end.  Exit status 0 ok, 2 configuration, 3 solver,
// 4 comparison outside tolerance.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include "ebs/cli.hpp"

using namespace ebs;
using namespace ebs::cli;

namespace {

struct Flags {
  std::string config, units, dimension, dispersion, hopping, curvature, cutoff;
  std::string delta, omega, n, sites, boundary, method, spectral, workers, nnz_cap, seed;
  std::string preset, out, format, plot_dir;
  bool timing{false};
  // point extras
  bool emit_profile{false}, order_check{false};
  std::string seeds, sector, amplitudes;
  // compare
  double tol_energy{1e-8};
  std::optional<double> tol_e_tilde{}, tol_xi{};
  // scaling-fit
  double omega_min{1e-3}, omega_max{1e-2};
  int points{10};
};

void add_model_flags(CLI::App* a, Flags& f, bool axes) {
  a->add_option("--config", f.config, "key = value configuration file");
  a->add_option("--units", f.units, "energy unit: J (tight-binding) or curvature (quadratic)");
  a->add_option("--dimension", f.dimension);
  a->add_option("--dispersion", f.dispersion, "tight-binding | quadratic");
  a->add_option("--hopping", f.hopping);
  a->add_option("--curvature", f.curvature);
  a->add_option("--cutoff", f.cutoff);
  const char* ax = axes ? " (list, lin:a:b:n or log:a:b:n)" : "";
  a->add_option("--delta", f.delta, std::string("impurity detuning") + ax);
  a->add_option("--omega", f.omega, std::string("coupling") + ax);
  a->add_option("--n", f.n, std::string("number of excitations") + (axes ? " (list)" : ""));
  a->add_option("--sites", f.sites, "lattice sites for exact and ED methods");
  a->add_option("--boundary", f.boundary, "periodic | open");
  a->add_option("--spectral", f.spectral, "continuum | lattice");
  a->add_option("--nnz-cap", f.nnz_cap, "ED sparse matrix cap");
  a->add_option("--seed", f.seed);
  a->add_option("--out", f.out, "output file (default stdout)");
  a->add_flag("--timing", f.timing, "fill wall_ms (breaks byte-identical output)");
}

ConfigMap command_line_map(const Flags& f, bool axes) {
  ConfigMap m;
  auto put = [&](const char* k, const std::string& v) {
    if (!v.empty()) m[k] = v;
  };
  put("units", f.units);
  put("dimension", f.dimension);
  put("dispersion", f.dispersion);
  put("hopping", f.hopping);
  put("curvature", f.curvature);
  put("cutoff", f.cutoff);
  if (!axes) {
    put("delta", f.delta);
    put("omega", f.omega);
    put("n", f.n);
    put("method", f.method);
  }
  put("sites", f.sites);
  put("boundary", f.boundary);
  put("spectral", f.spectral);
  put("workers", f.workers);
  put("nnz_cap", f.nnz_cap);
  put("seed", f.seed);
  return m;
}

ConfigMap file_map(const Flags& f) { return f.config.empty() ? ConfigMap{} : read_config_file(f.config); }

std::ostream& output(const Flags& f, std::unique_ptr<std::ofstream>& file) {
  if (f.out.empty()) return std::cout;
  file = std::make_unique<std::ofstream>(f.out);
  if (!*file) fail(ErrorCode::config, "cannot write " + f.out);
  return *file;
}

std::vector<long> parse_sites(const std::string& s) {
  std::vector<long> out;
  if (s.empty()) return out;
  for (double x : parse_axis(s, "amplitudes")) out.push_back(static_cast<long>(std::llround(x)));
  return out;
}

int run_point_command(const std::string& method, const Flags& f) {
  ConfigMap m = merge(file_map(f), command_line_map(f, false));
  m["method"] = method;
  if (!m.count("n") && (method == "exact2" || method == "exact3")) m["n"] = method == "exact2" ? "2" : "3";
  const RunConfig c = interpret(m);
  PointOptions po;
  po.emit_profile = f.emit_profile;
  po.order_check = f.order_check;
  po.amplitudes = parse_sites(f.amplitudes);
  if (!f.seeds.empty()) {
    auto v = parse_axis(f.seeds, "seeds");
    if (v.size() != 3) fail(ErrorCode::config, "--seeds takes e1,e2,tA");
    po.seeds = std::array<double, 3>{v[0], v[1], v[2]};
  }
  if (!f.sector.empty()) {
    if (f.sector == "e")
      po.sector = Regime::PG;
    else if (f.sector == "g")
      po.sector = Regime::PE;
    else
      fail(ErrorCode::config, "--sector takes e or g");
  }
  Json detail;
  const auto rec = run_point(c, f.timing, po, &detail);
  std::unique_ptr<std::ofstream> file;
  auto& os = output(f, file);
  const std::string fmt = f.format.empty() ? "json" : f.format;
  if (fmt == "csv") {
    os << "# " << provenance(c) << '\n' << csv_header() << '\n' << to_csv(rec) << '\n';
  } else if (fmt == "jsonl") {
    os << to_jsonl(rec, c) << '\n';
  } else if (fmt == "json") {
    Json doc = Json::parse(to_jsonl(rec, c));
    doc["detail"] = rec.e_n ? detail : Json(nullptr);
    os << doc.dump(2) << '\n';
  } else {
    fail(ErrorCode::config, "--format takes json, jsonl or csv");
  }
  if (rec.reason.empty() || rec.reason == "partial") return 0;
  std::cerr << "ebs: " << rec.message << '\n';
  return rec.reason == "config" ? 2 : 3;
}

Axes sweep_axes(const Flags& f, const ConfigMap& file) {
  Axes ax;
  std::optional<Preset> p;
  if (!f.preset.empty()) p = preset(f.preset);
  auto pick = [&](const std::string& flag, const char* key) -> std::optional<std::string> {
    if (!flag.empty()) return flag;
    if (auto it = file.find(key); it != file.end()) return it->second;
    return std::nullopt;
  };
  if (auto s = pick(f.delta, "delta"))
    ax.delta = parse_axis(*s, "delta");
  else if (p)
    ax.delta = {p->delta};
  if (auto s = pick(f.omega, "omega"))
    ax.omega = parse_axis(*s, "omega");
  else if (p)
    ax.omega = p->omega;
  if (auto s = pick(f.n, "n")) {
    for (double x : parse_axis(*s, "n")) {
      if (x != std::floor(x)) fail(ErrorCode::config, "n must be an integer");
      ax.n.push_back(static_cast<int>(x));
    }
  } else if (p) {
    ax.n = p->n;
  } else {
    ax.n = {1};
  }
  if (auto s = pick(f.method, "method")) {
    std::stringstream ss(*s);
    for (std::string t; std::getline(ss, t, ',');)
      if (!trim(t).empty()) ax.method.push_back(trim(t));
  } else if (p) {
    ax.method = p->method;
  }
  if (ax.delta.empty() || ax.omega.empty() || ax.method.empty())
    fail(ErrorCode::config, "sweep needs delta, omega and method axes (or --preset)");
  return ax;
}

RunConfig sweep_base(const Flags& f, const ConfigMap& file) {
  ConfigMap m = merge(file, command_line_map(f, true));
  for (const char* k : {"delta", "omega", "n", "method"}) m.erase(k);
  return interpret(m);
}

// one two-column-plus file per (delta, n, method), x = omega
void write_plot_data(const std::string& dir, const std::vector<SweepRecord>& recs) {
  std::filesystem::create_directories(dir);
  std::map<std::string, std::vector<const SweepRecord*>> groups;
  for (const auto& r : recs) groups["etilde_delta" + num(r.delta) + "_n" + std::to_string(r.n) + "_" + r.method].push_back(&r);
  for (const auto& [name, rs] : groups) {
    std::ofstream o(std::filesystem::path(dir) / (name + ".dat"));
    if (!o) fail(ErrorCode::config, "cannot write plot data in " + dir);
    o << "# omega e_tilde xi_g xi_e p_plus p_minus\n";
    for (const auto* r : rs) {
      if (!r->e_tilde) continue;
      auto cell = [](const std::optional<double>& x) { return x ? num(x) : std::string("nan"); };
      o << num(r->omega) << ' ' << cell(r->e_tilde) << ' ' << cell(r->xi_g) << ' ' << cell(r->xi_e) << ' '
        << cell(r->p_plus) << ' ' << cell(r->p_minus) << '\n';
    }
  }
}

int run_sweep_command(const Flags& f) {
  const auto file = file_map(f);
  const RunConfig base = sweep_base(f, file);
  const auto pts = expand(base, sweep_axes(f, file));
  const auto recs = run_sweep(pts, base.workers, f.timing);
  std::unique_ptr<std::ofstream> fh;
  auto& os = output(f, fh);
  const std::string fmt = f.format.empty() ? "csv" : f.format;
  if (fmt == "csv") {
    os << "# " << provenance(base) << '\n' << csv_header() << '\n';
    for (const auto& r : recs) os << to_csv(r) << '\n';
  } else if (fmt == "jsonl") {
    for (const auto& r : recs) os << to_jsonl(r, base) << '\n';
  } else {
    fail(ErrorCode::config, "--format takes csv or jsonl");
  }
  if (!f.plot_dir.empty()) write_plot_data(f.plot_dir, recs);
  return 0;
}

int run_compare_command(const Flags& f) {
  const auto file = file_map(f);
  const RunConfig base = sweep_base(f, file);
  Axes ax = sweep_axes(f, file);
  Tolerances tol{f.tol_energy, f.tol_e_tilde, f.tol_xi};
  // keep the user's method order: the last one is the reference
  const auto rows = compare(base, ax, tol, base.workers);
  std::unique_ptr<std::ofstream> fh;
  auto& os = output(f, fh);
  os << "# " << provenance(base) << '\n' << comparison_header() << '\n';
  bool tol_fail = false, unavailable = false;
  for (const auto& r : rows) {
    os << to_csv(r) << '\n';
    if (!r.reason.empty())
      unavailable = true;
    else if (!r.pass)
      tol_fail = true;
  }
  return tol_fail ? 4 : unavailable ? 3 : 0;
}

int run_scaling_command(const Flags& f) {
  const auto file = file_map(f);
  ConfigMap m = merge(file, command_line_map(f, true));
  m.erase("n");
  m.erase("omega");
  if (!f.method.empty())
    m["method"] = f.method;
  else if (!m.count("method"))
    m["method"] = "variational";
  std::vector<int> ns{1};
  if (!f.n.empty() || file.count("n")) {
    ns.clear();
    for (double x : parse_axis(!f.n.empty() ? f.n : file.at("n"), "n")) ns.push_back(static_cast<int>(x));
  }
  if (!f.delta.empty()) m["delta"] = f.delta;
  Json out = Json::array();
  RunConfig c0;
  for (int n : ns) {
    m["n"] = std::to_string(n);
    RunConfig c = interpret(m);
    c0 = c;
    auto res = scaling_fit(c, f.omega_min, f.omega_max, f.points);
    Json data = Json::array();
    for (auto [o, e] : res.data) data.push_back({o, e});
    out.push_back(Json{{"n", n},
                       {"method", c.method},
                       {"delta", c.delta},
                       {"exponent", res.fit.exponent},
                       {"stderr", res.fit.stderr_},
                       {"prefactor", res.fit.prefactor},
                       {"window", {res.fit.window.first, res.fit.window.second}},
                       {"r_squared", res.fit.r_squared},
                       {"points", res.fit.points},
                       {"data", data}});
  }
  std::unique_ptr<std::ofstream> fh;
  auto& os = output(f, fh);
  os << Json{{"provenance", provenance(c0)}, {"fits", out}}.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bound states of quantum emitters in bosonic baths"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1);
  Flags f;

  for (const char* name : {"sebs", "perturbative", "variational", "exact2", "exact3", "ed", "jc"}) {
    auto* s = app.add_subcommand(name, std::string("single point: ") + name);
    add_model_flags(s, f, false);
    s->add_option("--format", f.format, "json (default) | jsonl | csv");
    const std::string n = name;
    if (n == "sebs" || n == "variational" || n == "perturbative") s->add_flag("--emit-profile", f.emit_profile);
    if (n == "perturbative") {
      s->add_option("--sector", f.sector, "e (Delta < 0) or g (Delta above the band)");
      s->add_flag("--order-check", f.order_check, "compare with the sEBS and the lattice oracle");
    }
    if (n == "variational") s->add_option("--seeds", f.seeds, "starting point e1,e2,tA");
    if (n == "exact2" || n == "exact3") s->add_option("--amplitudes", f.amplitudes, "sites j for real-space amplitudes");
  }
  auto* sw = app.add_subcommand("sweep", "cartesian sweep over delta, omega, n and methods");
  auto* cmp = app.add_subcommand("compare", "pairwise comparison of methods");
  for (auto* s : {sw, cmp}) {
    add_model_flags(s, f, true);
    s->add_option("--method", f.method, "comma-separated methods");
    s->add_option("--preset", f.preset, "path-i | path-ii | path-iii");
    s->add_option("--workers", f.workers, "parallel workers (default $EBS_WORKERS or 1)");
  }
  sw->add_option("--format", f.format, "csv (default) | jsonl");
  sw->add_option("--plot-dir", f.plot_dir, "write per-curve plot data here");
  cmp->add_option("--tol-energy", f.tol_energy, "absolute |dE| tolerance")->capture_default_str();
  cmp->add_option("--tol-e-tilde", f.tol_e_tilde, "relative tolerance on E~ (accepted instead of |dE|)");
  cmp->add_option("--tol-xi", f.tol_xi, "relative tolerance on xi_g and xi_e");
  auto* sf = app.add_subcommand("scaling-fit", "power-law fit of E~ over an omega window");
  add_model_flags(sf, f, true);
  sf->add_option("--method", f.method, "default variational");
  sf->add_option("--omega-min", f.omega_min)->capture_default_str();
  sf->add_option("--omega-max", f.omega_max)->capture_default_str();
  sf->add_option("--points", f.points)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    auto* s = app.get_subcommands().front();
    const std::string name = s->get_name();
    if (name == "sweep") return run_sweep_command(f);
    if (name == "compare") return run_compare_command(f);
    if (name == "scaling-fit") return run_scaling_command(f);
    return run_point_command(name, f);
  } catch (const Error& e) {
    std::cerr << "ebs: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "ebs: " << e.what() << '\n';
    return 3;
  }
}
