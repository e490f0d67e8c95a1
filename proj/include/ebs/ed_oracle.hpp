#pragma once

#include <arpack.hpp>
// arpack.hpp drags in <complex.h>, whose macro I breaks Boost templates
#ifdef I
#undef I
#endif

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ebs/analysis.hpp"
#include "ebs/error.hpp"
#include "ebs/model.hpp"
#include "ebs/spectral.hpp"

namespace ebs {

constexpr int kMaxExcitations = 8;

// Fixed-N sector: impurity g with N bosons, then impurity e with N-1 bosons.
// Boson configurations are multisets of site indices, ranked in the
// combinatorial number system (q_i = p_i + i strictly increasing).
class SectorBasis {
 public:
  using Positions = std::array<int, kMaxExcitations>;

  SectorBasis(int N, std::size_t L, Boundary boundary) : N_(N), L_(L), boundary_(boundary) {
    if (N < 1 || N > kMaxExcitations) fail(ErrorCode::config, "ED supports 1 <= N <= 8");
    if (L < 3) fail(ErrorCode::config, "lattice needs at least 3 sites");
    const std::size_t top = L + N + 1;
    binom_.assign((top + 1) * (N + 2), 0);
    for (std::size_t n = 0; n <= top; ++n) {
      at(n, 0) = 1;
      for (int k = 1; k <= N + 1 && static_cast<std::size_t>(k) <= n; ++k)
        at(n, k) = at(n - 1, k - 1) + (static_cast<std::size_t>(k) <= n - 1 ? at(n - 1, k) : 0);
    }
    dim_g_ = multisets(N);
    dim_e_ = multisets(N - 1);
  }

  int excitations() const { return N_; }
  std::size_t sites() const { return L_; }
  Boundary boundary() const { return boundary_; }
  std::size_t dimension() const { return dim_g_ + dim_e_; }
  std::size_t g_dimension() const { return dim_g_; }

  // bosons = N (g) or N-1 (e), positions sorted ascending
  void unrank(std::size_t idx, bool& excited, Positions& pos, int& bosons) const {
    excited = idx >= dim_g_;
    bosons = excited ? N_ - 1 : N_;
    std::uint64_t r = excited ? idx - dim_g_ : idx;
    std::size_t hi = L_ + bosons - 1;
    for (int i = bosons; i >= 1; --i) {
      // largest q with C(q, i) <= r
      std::size_t q = hi;
      while (q > 0 && at(q, i) > r) --q;
      if (at(q, i) > r) q = 0;
      r -= at(q, i);
      pos[i - 1] = static_cast<int>(q) - (i - 1);
      hi = q;
    }
  }

  std::size_t rank(bool excited, const Positions& pos, int bosons) const {
    std::uint64_t r = 0;
    for (int i = 0; i < bosons; ++i) r += at(static_cast<std::size_t>(pos[i] + i), i + 1);
    return excited ? dim_g_ + r : r;
  }

 private:
  std::uint64_t& at(std::size_t n, int k) { return binom_[n * (N_ + 2) + k]; }
  std::uint64_t at(std::size_t n, int k) const {
    if (k < 0 || static_cast<std::size_t>(k) > n) return 0;
    return binom_[n * (N_ + 2) + k];
  }
  std::size_t multisets(int n) const { return n == 0 ? 1 : at(L_ + n - 1, n); }

  int N_;
  std::size_t L_;
  Boundary boundary_;
  std::vector<std::uint64_t> binom_;
  std::size_t dim_g_{0}, dim_e_{0};
};

struct SparseHamiltonian {
  std::size_t dim{0};
  std::vector<std::size_t> row_ptr{};
  std::vector<std::uint32_t> col{};
  std::vector<double> val{};
  double norm_bound{0.0};  // max absolute row sum

  void apply(const double* x, double* y) const {
    for (std::size_t i = 0; i < dim; ++i) {
      double s = 0.0;
      for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) s += val[p] * x[col[p]];
      y[i] = s;
    }
  }
  std::size_t nnz() const { return val.size(); }
  Eigen::MatrixXd dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t p = row_ptr[i]; p < row_ptr[i + 1]; ++p) m(i, col[p]) += val[p];
    return m;
  }
};

enum class EdSolver { lanczos, arpack };

struct EdOptions {
  std::size_t nnz_cap{5000000};
  EdSolver solver{EdSolver::lanczos};
  double tol{1e-10};  // residual relative to the norm bound
  int max_restarts{3000};
  bool correlation{false};
  std::size_t dense_below{400};
  int krylov{30};
  bool parity{true};  // solve in the even block when the reflection is a symmetry
};

namespace detail {

struct EdLattice {
  std::size_t L;
  Boundary boundary;
  double J;
  std::vector<std::pair<int, double>> coupling;  // (site index, eta_j)

  int neighbour(int j, int dir) const {
    int n = j + dir;
    if (boundary == Boundary::periodic) return static_cast<int>((n + static_cast<long>(L)) % static_cast<long>(L));
    return (n < 0 || n >= static_cast<int>(L)) ? -1 : n;
  }
};

inline EdLattice ed_lattice(const BathSpec& bath, const LatticeGrid& grid) {
  if (bath.dimension != 1 || grid.dimension != 1) fail(ErrorCode::unsupported, "ED is implemented for 1D lattices");
  if (!bath.is_tight_binding()) fail(ErrorCode::unsupported, "ED needs a tight-binding bath");
  validate(grid);
  EdLattice lat{static_cast<std::size_t>(grid.sites), grid.boundary, bath.hopping(), {}};
  const long c = static_cast<long>(grid.coupling_site());
  const long L = static_cast<long>(grid.sites);
  if (bath.is_point()) {
    lat.coupling.push_back({static_cast<int>(c), 1.0});
  } else {
    for (const auto& s : std::get<TabulatedCoupling>(bath.coupling).sites) {
      if (std::abs(s.amplitude.imag()) > 1e-14) fail(ErrorCode::unsupported, "complex coupling profiles");
      long j = c + s.r[0];
      if (grid.boundary == Boundary::periodic) j = ((j % L) + L) % L;
      if (j < 0 || j >= L) fail(ErrorCode::config, "coupling profile leaves the open lattice");
      lat.coupling.push_back({static_cast<int>(j), s.amplitude.real()});
    }
  }
  return lat;
}

inline void insert_sorted(SectorBasis::Positions& p, int& n, int site) {
  int i = n++;
  while (i > 0 && p[i - 1] > site) {
    p[i] = p[i - 1];
    --i;
  }
  p[i] = site;
}

inline void erase_one(SectorBasis::Positions& p, int& n, int site) {
  int i = 0;
  while (p[i] != site) ++i;
  for (; i + 1 < n; ++i) p[i] = p[i + 1];
  --n;
}

inline int count_at(const SectorBasis::Positions& p, int n, int site) {
  int c = 0;
  for (int i = 0; i < n; ++i) c += p[i] == site;
  return c;
}

}  // namespace detail

namespace detail {

// Nonzero elements <t|H|s> of column s, duplicates allowed.
template <class Emit>
void hamiltonian_column(const SectorBasis& basis, const EdLattice& lat, const ImpuritySpec& imp, std::size_t s,
                        Emit&& emit) {
  SectorBasis::Positions pos{}, tmp{};
  bool exc;
  int n;
  basis.unrank(s, exc, pos, n);
  const double J = lat.J;
  emit(s, (exc ? imp.delta : 0.0) + 2.0 * J * n);
  for (int a = 0; a < n; ++a) {
    if (a > 0 && pos[a] == pos[a - 1]) continue;
    const int m = pos[a];
    const int nm = count_at(pos, n, m);
    for (int dir : {-1, 1}) {
      const int j = lat.neighbour(m, dir);
      if (j < 0) continue;
      const int nj = count_at(pos, n, j);
      tmp = pos;
      int nt = n;
      erase_one(tmp, nt, m);
      insert_sorted(tmp, nt, j);
      emit(basis.rank(exc, tmp, nt), -J * std::sqrt(double(nm) * (nj + 1)));
    }
  }
  if (imp.omega == 0.0) return;
  for (auto [c, eta] : lat.coupling) {
    const int nc = count_at(pos, n, c);
    tmp = pos;
    int nt = n;
    if (!exc) {
      if (nc == 0) continue;
      erase_one(tmp, nt, c);
      emit(basis.rank(true, tmp, nt), imp.omega * eta * std::sqrt(double(nc)));
    } else {
      insert_sorted(tmp, nt, c);
      emit(basis.rank(false, tmp, nt), imp.omega * eta * std::sqrt(double(nc + 1)));
    }
  }
}

}  // namespace detail

// Even combinations under the site reflection that fixes the coupled site.
struct ParityMap {
  std::vector<std::uint32_t> reduced{};  // full index -> reduced index
  std::vector<std::size_t> rep{};        // reduced index -> representative full index
  std::vector<std::uint8_t> orbit{};     // reduced index -> orbit size (1 or 2)

  std::size_t dimension() const { return rep.size(); }

  Eigen::VectorXd expand(const Eigen::VectorXd& x) const {
    Eigen::VectorXd full(reduced.size());
    for (std::size_t i = 0; i < reduced.size(); ++i) full(i) = x(reduced[i]) / std::sqrt(double(orbit[reduced[i]]));
    return full;
  }
};

inline std::vector<int> reflection_sites(const LatticeGrid& grid) {
  const int L = grid.sites;
  std::vector<int> r(L);
  for (int j = 0; j < L; ++j) r[j] = grid.boundary == Boundary::periodic ? (L - j) % L : L - 1 - j;
  return r;
}

// Available for point coupling on periodic lattices and odd open lattices.
inline bool parity_available(const BathSpec& bath, const LatticeGrid& grid) {
  return bath.is_point() && (grid.boundary == Boundary::periodic || grid.sites % 2 == 1);
}

inline ParityMap parity_map(const SectorBasis& basis, const LatticeGrid& grid) {
  const auto refl = reflection_sites(grid);
  ParityMap pm;
  const std::size_t dim = basis.dimension();
  pm.reduced.assign(dim, 0);
  SectorBasis::Positions pos{}, img{};
  constexpr std::uint32_t unset = 0xffffffffu;
  std::fill(pm.reduced.begin(), pm.reduced.end(), unset);
  for (std::size_t i = 0; i < dim; ++i) {
    if (pm.reduced[i] != unset) continue;
    bool exc;
    int n;
    basis.unrank(i, exc, pos, n);
    for (int a = 0; a < n; ++a) img[a] = refl[pos[a]];
    std::sort(img.begin(), img.begin() + n);
    const std::size_t ri = basis.rank(exc, img, n);
    const auto idx = static_cast<std::uint32_t>(pm.rep.size());
    pm.rep.push_back(i);
    pm.orbit.push_back(ri == i ? 1 : 2);
    pm.reduced[i] = idx;
    pm.reduced[ri] = idx;
  }
  return pm;
}

// H with eps_k = 2J(1 - cos k): on-site 2J per boson, hopping -J, Delta on e,
// Omega eta_j (sigma_eg a_j + h.c.).  With a parity map the even block is built.
inline SparseHamiltonian build_sector_hamiltonian(const SectorBasis& basis, const BathSpec& bath,
                                                  const LatticeGrid& grid, const ImpuritySpec& imp,
                                                  std::size_t nnz_cap = 5000000, const ParityMap* parity = nullptr) {
  validate(imp);
  if (static_cast<std::size_t>(grid.sites) != basis.sites() || grid.boundary != basis.boundary())
    fail(ErrorCode::config, "grid and sector basis disagree");
  auto lat = detail::ed_lattice(bath, grid);
  SparseHamiltonian H;
  H.dim = parity ? parity->dimension() : basis.dimension();
  if (basis.dimension() >= (std::size_t{1} << 32)) fail(ErrorCode::dimension_cap, "sector dimension exceeds 2^32");
  H.row_ptr.reserve(H.dim + 1);
  H.row_ptr.push_back(0);
  std::vector<std::pair<std::uint32_t, double>> row;
  for (std::size_t i = 0; i < H.dim; ++i) {
    row.clear();
    if (parity) {
      const double oa = parity->orbit[i];
      detail::hamiltonian_column(basis, lat, imp, parity->rep[i], [&](std::size_t t, double h) {
        const std::uint32_t b = parity->reduced[t];
        row.push_back({b, std::sqrt(oa / parity->orbit[b]) * h});
      });
    } else {
      detail::hamiltonian_column(basis, lat, imp, i,
                                 [&](std::size_t t, double h) { row.push_back({static_cast<std::uint32_t>(t), h}); });
    }
    std::sort(row.begin(), row.end());
    double absrow = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0 && row[k].first == H.col.back() && H.col.size() > H.row_ptr.back()) {
        H.val.back() += row[k].second;
      } else {
        H.col.push_back(row[k].first);
        H.val.push_back(row[k].second);
      }
      absrow += std::abs(row[k].second);
    }
    H.norm_bound = std::max(H.norm_bound, absrow);
    if (H.val.size() > nnz_cap) fail(ErrorCode::dimension_cap, "sector Hamiltonian exceeds the nonzero cap");
    H.row_ptr.push_back(H.val.size());
  }
  return H;
}

struct GroundStateRecord {
  int N{1};
  std::size_t L{0};
  Boundary boundary{Boundary::periodic};
  double energy{0.0};
  double residual{0.0};  // |Hv - Ev| / |H|
  std::size_t matvecs{0};
  Eigen::VectorXd state{};
  double population_e{0.0};
  // sector-resolved <P_s n_j>, site = coordinate relative to the coupled site
  SiteProfile density_g{}, density_e{};
  Eigen::MatrixXd G{};  // index 0: impurity as hard-core mode, then bath sites in lattice order
  double xi_g{std::numeric_limits<double>::quiet_NaN()};
  double xi_e{std::numeric_limits<double>::quiet_NaN()};
};

namespace detail {

// Smallest eigenvalue of the tridiagonal (a, b) and its eigenvector by inverse iteration.
inline double tridiagonal_lowest(const std::vector<double>& a, const std::vector<double>& b, std::vector<double>& y) {
  const std::size_t m = a.size();
  Eigen::VectorXd d = Eigen::Map<const Eigen::VectorXd>(a.data(), m);
  Eigen::VectorXd e = Eigen::Map<const Eigen::VectorXd>(b.data(), m - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(d, e, Eigen::EigenvaluesOnly);
  const double theta = es.eigenvalues()(0);
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  for (double x : b) scale = std::max(scale, std::abs(x));
  const double shift = theta - 1e-13 * std::max(scale, 1e-300);
  y.assign(m, 1.0);
  std::vector<double> c(m), z(m);
  for (int it = 0; it < 3; ++it) {
    // Thomas algorithm for (T - shift) z = y
    double piv = a[0] - shift;
    c[0] = m > 1 ? b[0] / piv : 0.0;
    z[0] = y[0] / piv;
    for (std::size_t i = 1; i < m; ++i) {
      piv = a[i] - shift - b[i - 1] * c[i - 1];
      if (piv == 0.0) piv = 1e-300;
      if (i + 1 < m) c[i] = b[i] / piv;
      z[i] = (y[i] - b[i - 1] * z[i - 1]) / piv;
    }
    for (std::size_t i = m - 1; i-- > 0;) z[i] -= c[i] * z[i + 1];
    double nz = 0.0;
    for (double x : z) nz += x * x;
    nz = std::sqrt(nz);
    for (std::size_t i = 0; i < m; ++i) y[i] = z[i] / nz;
  }
  return theta;
}

// Lanczos without global reorthogonalization, in cycles: the first pass builds
// the tridiagonal matrix, a second pass replays the recurrence to assemble the
// Ritz vector, which then seeds the next cycle.
inline double lowest_eigenpair_lanczos(const SparseHamiltonian& H, const EdOptions& opt, Eigen::VectorXd& vec,
                                       std::size_t& matvecs, const Eigen::VectorXd& start) {
  const std::size_t n = H.dim;
  const double target = opt.tol * H.norm_bound;
  const std::size_t max_steps = std::max<std::size_t>(std::min<std::size_t>(n, 20000), 2);
  Eigen::VectorXd v0 = start.normalized();
  Eigen::VectorXd v(n), vp(n), w(n);
  double theta = 0.0;
  for (int cycle = 0; cycle < 8; ++cycle) {
    std::vector<double> al, be, y;
    // loose first cycle, before spurious copies of the ground state appear
    const double goal = cycle == 0 ? std::max(1e-6 * H.norm_bound, target) : 0.05 * target;
    auto run = [&](std::size_t steps, const std::vector<double>* coeff) {
      v = v0;
      vp.setZero();
      double beta = 0.0;
      if (coeff) vec = (*coeff)[0] * v;
      for (std::size_t j = 0; j < steps; ++j) {
        H.apply(v.data(), w.data());
        ++matvecs;
        if (j > 0) w -= beta * vp;
        double alpha = w.dot(v);
        w -= alpha * v;
        const double c = w.dot(v);
        w -= c * v;
        alpha += c;
        if (!coeff) al.push_back(alpha);
        beta = w.norm();
        if (j + 1 == steps) break;
        if (!coeff) be.push_back(beta);
        if (beta <= 1e-14 * H.norm_bound) return j + 1;  // invariant subspace
        vp.swap(v);
        v = w / beta;
        if (coeff) vec += (*coeff)[j + 1] * v;
        if (!coeff && (j + 1) % 20 == 0) {
          theta = tridiagonal_lowest(al, be, y);
          if (std::abs(beta * y.back()) <= goal) return j + 1;
        }
      }
      return steps;
    };
    std::size_t m = run(max_steps, nullptr);
    al.resize(m);
    be.resize(m - 1);
    theta = tridiagonal_lowest(al, be, y);
    run(m, &y);
    vec.normalize();
    H.apply(vec.data(), w.data());
    ++matvecs;
    theta = vec.dot(w);
    const double res = (w - theta * vec).norm();
    if (res <= 0.5 * target) return theta;
    v0 = vec;
  }
  fail(ErrorCode::non_convergence, "Lanczos did not reach the residual target");
}

inline double lowest_eigenpair_arpack(const SparseHamiltonian& H, const EdOptions& opt, Eigen::VectorXd& vec,
                                      std::size_t& matvecs) {
  const a_int n = static_cast<a_int>(H.dim);
  const a_int nev = 1;
  const a_int ncv = std::min<a_int>(n - 1, std::max(opt.krylov, 4));
  std::vector<double> resid(n), V(static_cast<std::size_t>(n) * ncv), workd(3 * static_cast<std::size_t>(n));
  const a_int lworkl = ncv * (ncv + 8);
  std::vector<double> workl(lworkl);
  a_int iparam[11] = {0}, ipntr[11] = {0};
  iparam[0] = 1;
  iparam[2] = opt.max_restarts;
  iparam[6] = 1;
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto& r : resid) r = u(rng);
  a_int ido = 0, info = 1;
  // ARPACK tolerance is relative to |lambda|; aim well below the residual target.
  const double tol = 1e-13;
  for (;;) {
    arpack::saupd(ido, arpack::bmat::identity, n, arpack::which::smallest_algebraic, nev, tol, resid.data(), ncv,
                  V.data(), n, iparam, ipntr, workd.data(), workl.data(), lworkl, info);
    if (ido == -1 || ido == 1) {
      H.apply(&workd[ipntr[0] - 1], &workd[ipntr[1] - 1]);
      ++matvecs;
      continue;
    }
    break;
  }
  if (info < 0) fail(ErrorCode::non_convergence, "ARPACK saupd failed, info=" + std::to_string(info));
  if (info == 1) fail(ErrorCode::non_convergence, "Lanczos did not converge within the restart budget");
  std::vector<a_int> select(ncv);
  double d[2] = {0.0, 0.0};
  vec.resize(n);
  arpack::seupd(true, arpack::howmny::ritz_vectors, select.data(), d, vec.data(), n, 0.0, arpack::bmat::identity, n,
                arpack::which::smallest_algebraic, nev, tol, resid.data(), ncv, V.data(), n, iparam, ipntr,
                workd.data(), workl.data(), lworkl, info);
  if (info != 0) fail(ErrorCode::non_convergence, "ARPACK seupd failed, info=" + std::to_string(info));
  return d[0];
}

}  // namespace detail


inline GroundStateRecord ground_state(const SpectralContext& ctx, const ImpuritySpec& imp, const LatticeGrid& grid,
                                      int N, const EdOptions& opt = {}) {
  validate(grid);
  SectorBasis basis(N, static_cast<std::size_t>(grid.sites), grid.boundary);
  std::optional<ParityMap> pm;
  if (opt.parity && parity_available(ctx.bath(), grid)) pm = parity_map(basis, grid);
  auto H = build_sector_hamiltonian(basis, ctx.bath(), grid, imp, opt.nnz_cap, pm ? &*pm : nullptr);
  GroundStateRecord rec;
  rec.N = N;
  rec.L = static_cast<std::size_t>(grid.sites);
  rec.boundary = grid.boundary;
  Eigen::VectorXd x;
  if (H.dim <= opt.dense_below) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense());
    x = es.eigenvectors().col(0);
  } else if (opt.solver == EdSolver::arpack) {
    detail::lowest_eigenpair_arpack(H, opt, x, rec.matvecs);
  } else {
    // positive in the gauge where every off-diagonal element is <= 0
    Eigen::VectorXd start(H.dim);
    for (std::size_t i = 0; i < H.dim; ++i) start(i) = (pm ? pm->rep[i] : i) < basis.g_dimension() ? 1.0 : -1.0;
    detail::lowest_eigenpair_lanczos(H, opt, x, rec.matvecs, start);
  }
  x.normalize();
  Eigen::VectorXd hv(H.dim);
  H.apply(x.data(), hv.data());
  rec.energy = x.dot(hv);
  rec.residual = (hv - rec.energy * x).norm() / std::max(H.norm_bound, 1e-300);
  if (rec.residual > opt.tol) fail(ErrorCode::non_convergence, "ground state residual above tolerance");
  rec.state = pm ? pm->expand(x) : x;
  // fix the global sign by the largest component
  Eigen::Index imax;
  rec.state.cwiseAbs().maxCoeff(&imax);
  if (rec.state(imax) < 0.0) rec.state = -rec.state;
  const std::size_t full_dim = basis.dimension();

  const std::size_t L = rec.L;
  std::vector<double> ng(L, 0.0), ne(L, 0.0);
  SectorBasis::Positions pos{}, tmp{};
  const bool corr = opt.correlation;
  // G_jm = <a_j psi | a_m psi>: collect the columns a_m|psi> (mode 0 is the
  // impurity lowering operator) in the N-1 excitation sector, then G = Phi^T Phi.
  std::optional<SectorBasis> lower;
  if (corr && basis.excitations() > 1) lower.emplace(basis.excitations() - 1, L, basis.boundary());
  auto lower_rank = [&](bool e, const SectorBasis::Positions& p, int n) { return lower ? lower->rank(e, p, n) : 0; };
  std::vector<Eigen::Triplet<double>> phi;
  if (corr) phi.reserve(full_dim * static_cast<std::size_t>(basis.excitations()));
  for (std::size_t i = 0; i < full_dim; ++i) {
    const double psi = rec.state(i);
    if (psi == 0.0) continue;
    bool exc;
    int n;
    basis.unrank(i, exc, pos, n);
    auto& dens = exc ? ne : ng;
    for (int a = 0; a < n; ++a) dens[pos[a]] += psi * psi;
    if (exc) rec.population_e += psi * psi;
    if (!corr) continue;
    if (exc) phi.emplace_back(lower_rank(false, pos, n), 0, psi);
    for (int a = 0; a < n; ++a) {
      if (a > 0 && pos[a] == pos[a - 1]) continue;
      const int m = pos[a];
      const int nm = detail::count_at(pos, n, m);
      tmp = pos;
      int nt = n;
      detail::erase_one(tmp, nt, m);
      phi.emplace_back(lower_rank(exc, tmp, nt), 1 + m, std::sqrt(double(nm)) * psi);
    }
  }
  if (corr) {
    const std::size_t rows = lower ? lower->dimension() : 1;
    Eigen::SparseMatrix<double> P(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(L + 1));
    P.setFromTriplets(phi.begin(), phi.end());
    phi = {};
    rec.G = Eigen::MatrixXd(P.transpose() * P);
  }
  for (std::size_t j = 0; j < L; ++j) {
    const long x = grid.coordinate(j)[0];
    rec.density_g.site.push_back(x);
    rec.density_g.value.push_back(ng[j]);
    rec.density_e.site.push_back(x);
    rec.density_e.value.push_back(ne[j]);
  }
  try {
    rec.xi_g = localization_length(rec.density_g);
  } catch (const Error&) {
  }
  try {
    rec.xi_e = localization_length(rec.density_e);
  } catch (const Error&) {
  }
  return rec;
}

// Eigenvalues of G, descending.
inline std::vector<double> correlation_spectrum(const GroundStateRecord& rec) {
  if (rec.G.size() == 0) fail(ErrorCode::config, "ground state was computed without the correlation matrix");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rec.G, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

}  // namespace ebs
