#include "bifurcate/ns_lite.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

namespace bif {

MacGrid::MacGrid(int r) : res(r), h(1.0 / r), nu((r - 1) * r), nv(r * (r - 1)), np(r * r) {
  if (r < 4) throw Error(ErrorKind::BadParams, "MAC grid needs res >= 4");
}

namespace {

using Sparse = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Wall-aware face accessors. Normal velocity vanishes on the wall itself;
// tangential velocity uses a mirrored ghost so the wall average is zero.
double uval(const MacGrid& g, const Vec& b, int i, int j) {
  if (i <= 0 || i >= g.res) return 0.0;
  if (j < 0) return -b(g.u_index(i, 0));
  if (j > g.res - 1) return -b(g.u_index(i, g.res - 1));
  return b(g.u_index(i, j));
}

double vval(const MacGrid& g, const Vec& b, int i, int j) {
  if (j <= 0 || j >= g.res) return 0.0;
  if (i < 0) return -b(g.v_index(0, j));
  if (i > g.res - 1) return -b(g.v_index(g.res - 1, j));
  return b(g.v_index(i, j));
}

std::vector<Triplet> laplacian_triplets(const MacGrid& g) {
  const int r = g.res;
  const double s = 1.0 / (g.h * g.h);
  std::vector<Triplet> t;
  for (int j = 0; j < r; ++j)
    for (int i = 1; i < r; ++i) {
      const int row = g.u_index(i, j);
      double diag = 4.0 * s;
      if (i - 1 >= 1) t.emplace_back(row, g.u_index(i - 1, j), -s);
      if (i + 1 <= r - 1) t.emplace_back(row, g.u_index(i + 1, j), -s);
      if (j - 1 >= 0) t.emplace_back(row, g.u_index(i, j - 1), -s); else diag += s;
      if (j + 1 <= r - 1) t.emplace_back(row, g.u_index(i, j + 1), -s); else diag += s;
      t.emplace_back(row, row, diag);
    }
  for (int j = 1; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      const int row = g.v_index(i, j);
      double diag = 4.0 * s;
      if (j - 1 >= 1) t.emplace_back(row, g.v_index(i, j - 1), -s);
      if (j + 1 <= r - 1) t.emplace_back(row, g.v_index(i, j + 1), -s);
      if (i - 1 >= 0) t.emplace_back(row, g.v_index(i - 1, j), -s); else diag += s;
      if (i + 1 <= r - 1) t.emplace_back(row, g.v_index(i + 1, j), -s); else diag += s;
      t.emplace_back(row, row, diag);
    }
  return t;
}

// Gradient: velocity rows, pressure columns.
std::vector<Triplet> gradient_triplets(const MacGrid& g, int col_offset) {
  const int r = g.res;
  const double s = 1.0 / g.h;
  std::vector<Triplet> t;
  for (int j = 0; j < r; ++j)
    for (int i = 1; i < r; ++i) {
      t.emplace_back(g.u_index(i, j), col_offset + g.p_index(i, j), s);
      t.emplace_back(g.u_index(i, j), col_offset + g.p_index(i - 1, j), -s);
    }
  for (int j = 1; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      t.emplace_back(g.v_index(i, j), col_offset + g.p_index(i, j), s);
      t.emplace_back(g.v_index(i, j), col_offset + g.p_index(i, j - 1), -s);
    }
  return t;
}

}  // namespace

struct StokesSolver::Impl {
  Eigen::SparseLU<Sparse, Eigen::COLAMDOrdering<int>> lu;
  int n = 0;
};

StokesSolver::StokesSolver(int res) : grid_(res), impl_(std::make_unique<Impl>()) {
  const MacGrid& g = grid_;
  const int nvel = g.nvel(), np = g.np;
  const int n = nvel + np + 1;
  std::vector<Triplet> t = laplacian_triplets(g);
  for (const auto& e : gradient_triplets(g, nvel)) {
    t.push_back(e);
    t.emplace_back(e.col(), e.row(), e.value());
  }
  // bordering row and column pin the pressure mean
  for (int k = 0; k < np; ++k) {
    t.emplace_back(nvel + k, n - 1, 1.0);
    t.emplace_back(n - 1, nvel + k, 1.0);
  }
  Sparse K(n, n);
  K.setFromTriplets(t.begin(), t.end());
  K.makeCompressed();
  impl_->lu.analyzePattern(K);
  impl_->lu.factorize(K);
  if (impl_->lu.info() != Eigen::Success) throw Error(ErrorKind::SingularOperator, "Stokes factorisation failed");
  impl_->n = n;
}

StokesSolver::~StokesSolver() = default;

Mat StokesSolver::solve_many(const Mat& forces) const {
  const int nvel = grid_.nvel(), np = grid_.np;
  if (forces.rows() != nvel) throw Error(ErrorKind::DimensionMismatch, "Stokes force dimension");
  Mat rhs = Mat::Zero(impl_->n, forces.cols());
  rhs.topRows(nvel) = forces;
  Mat sol = impl_->lu.solve(rhs);
  return sol.topRows(nvel + np);
}

StokesSolution StokesSolver::solve(const Vec& force) const {
  Mat s = solve_many(Mat(force));
  return StokesSolution{s.col(0).head(grid_.nvel()), s.col(0).segment(grid_.nvel(), grid_.np)};
}

std::shared_ptr<const StokesSolver> stokes_solver(int res) {
  static std::mutex mu;
  static std::map<int, std::shared_ptr<const StokesSolver>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(res);
  if (it != cache.end()) return it->second;
  auto s = std::make_shared<const StokesSolver>(res);
  cache.emplace(res, s);
  return s;
}

StokesSolution ns_stokes_solve(int res, const Vec& force) { return stokes_solver(res)->solve(force); }

Vec discrete_divergence(const MacGrid& g, const Vec& vel) {
  Vec d(g.np);
  for (int j = 0; j < g.res; ++j)
    for (int i = 0; i < g.res; ++i)
      d(g.p_index(i, j)) = (uval(g, vel, i + 1, j) - uval(g, vel, i, j) + vval(g, vel, i, j + 1) -
                            vval(g, vel, i, j)) / g.h;
  return d;
}

Mat neg_laplacian_dense(const MacGrid& g) {
  auto t = laplacian_triplets(g);
  Sparse A(g.nvel(), g.nvel());
  A.setFromTriplets(t.begin(), t.end());
  return Mat(A);
}

Vec convection(const MacGrid& g, const Vec& a, const Vec& b) {
  const int r = g.res;
  const double h2 = 2.0 * g.h;
  Vec out(g.nvel());
  for (int j = 0; j < r; ++j)
    for (int i = 1; i < r; ++i) {
      const double au = a(g.u_index(i, j));
      const double av = 0.25 * (vval(g, a, i - 1, j) + vval(g, a, i, j) + vval(g, a, i - 1, j + 1) + vval(g, a, i, j + 1));
      const double dx = (uval(g, b, i + 1, j) - uval(g, b, i - 1, j)) / h2;
      const double dy = (uval(g, b, i, j + 1) - uval(g, b, i, j - 1)) / h2;
      out(g.u_index(i, j)) = au * dx + av * dy;
    }
  for (int j = 1; j < r; ++j)
    for (int i = 0; i < r; ++i) {
      const double au = 0.25 * (uval(g, a, i, j - 1) + uval(g, a, i + 1, j - 1) + uval(g, a, i, j) + uval(g, a, i + 1, j));
      const double av = a(g.v_index(i, j));
      const double dx = (vval(g, b, i + 1, j) - vval(g, b, i - 1, j)) / h2;
      const double dy = (vval(g, b, i, j + 1) - vval(g, b, i, j - 1)) / h2;
      out(g.v_index(i, j)) = au * dx + av * dy;
    }
  return out;
}

Mat convection_jacobian(const MacGrid& g, const Vec& U) {
  const int n = g.nvel();
  Mat J(n, n);
  Vec e = Vec::Zero(n);
  for (int k = 0; k < n; ++k) {
    e(k) = 1.0;
    J.col(k) = convection(g, U, e) + convection(g, e, U);
    e(k) = 0.0;
  }
  return J;
}

namespace {

constexpr double kPi = std::numbers::pi;

template <class FU, class FV>
Vec sample_faces(const MacGrid& g, FU fu, FV fv) {
  Vec out(g.nvel());
  for (int j = 0; j < g.res; ++j)
    for (int i = 1; i < g.res; ++i) out(g.u_index(i, j)) = fu(i * g.h, (j + 0.5) * g.h);
  for (int j = 1; j < g.res; ++j)
    for (int i = 0; i < g.res; ++i) out(g.v_index(i, j)) = fv((i + 0.5) * g.h, j * g.h);
  return out;
}

}  // namespace

Vec manufactured_velocity(const MacGrid& g) {
  return sample_faces(
      g, [](double x, double y) { return kPi * std::pow(std::sin(kPi * x), 2) * std::sin(2 * kPi * y); },
      [](double x, double y) { return -kPi * std::sin(2 * kPi * x) * std::pow(std::sin(kPi * y), 2); });
}

Vec manufactured_pressure(const MacGrid& g) {
  Vec p(g.np);
  for (int j = 0; j < g.res; ++j)
    for (int i = 0; i < g.res; ++i)
      p(g.p_index(i, j)) = std::cos(kPi * (i + 0.5) * g.h) * std::cos(kPi * (j + 0.5) * g.h);
  return p;
}

Vec manufactured_force(const MacGrid& g) {
  const double c = 2.0 * kPi * kPi * kPi;
  return sample_faces(
      g,
      [c](double x, double y) {
        return -c * std::sin(2 * kPi * y) * (2 * std::cos(2 * kPi * x) - 1) - kPi * std::sin(kPi * x) * std::cos(kPi * y);
      },
      [c](double x, double y) {
        return c * std::sin(2 * kPi * x) * (2 * std::cos(2 * kPi * y) - 1) - kPi * std::cos(kPi * x) * std::sin(kPi * y);
      });
}

Vec ns_forcing(const MacGrid& g, Forcing kind, double amplitude) {
  if (kind == Forcing::Smooth) return amplitude * manufactured_force(g);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  Vec f(g.nvel());
  for (int k = 0; k < g.nvel(); ++k) f(k) = amplitude * ud(rng);
  return f;
}

Vec ns_F_eval(int res, double lambda, const Vec& state, const Vec& force) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::EvalFailure, "ns_lite: lambda must be positive");
  auto S = stokes_solver(res);
  const MacGrid& g = S->grid();
  if (state.size() != g.state_dim()) throw Error(ErrorKind::DimensionMismatch, "ns_lite state");
  const int np = g.np, nvel = g.nvel();
  const Vec p = state.head(np), U = state.segment(np, nvel), q = state.tail(np);
  const Vec G = lambda * (convection(g, U, U) - force);
  const StokesSolution ts = S->solve(G);
  Vec out(g.state_dim());
  out.head(np) = p - q / lambda;
  out.segment(np, nvel) = U + ts.vel;
  out.tail(np) = q + ts.pressure;
  return out;
}

ProblemDef ns_problem(int res, Forcing kind, double amplitude) {
  auto S = stokes_solver(res);
  const MacGrid g = S->grid();
  const Vec force = ns_forcing(g, kind, amplitude);
  ProblemDef p;
  p.name = "ns_lite";
  p.m = 1;
  p.N = g.state_dim();
  p.smoothness = 3;
  p.F = [res, force](const Vec& l, const Vec& s) { return ns_F_eval(res, l(0), s, force); };
  p.DF = [S, g, force](const Vec& l, const Vec& s) -> Mat {
    const double lam = l(0);
    if (!(lam > 0.0)) throw Error(ErrorKind::EvalFailure, "ns_lite: lambda must be positive");
    const int np = g.np, nvel = g.nvel(), N = g.state_dim();
    const Vec U = s.segment(np, nvel), q = s.tail(np);
    Mat rhs(nvel, 1 + nvel);
    rhs.col(0) = convection(g, U, U) - force;
    rhs.rightCols(nvel) = lam * convection_jacobian(g, U);
    const Mat T = S->solve_many(rhs);  // rows: vel then pressure
    Mat J = Mat::Zero(N, 1 + N);
    J.block(0, 0, np, 1) = q / (lam * lam);
    J.block(np, 0, nvel + np, 1) = T.col(0);
    J.block(0, 1, np, np).diagonal().setOnes();
    J.block(0, 1 + np + nvel, np, np).diagonal().setConstant(-1.0 / lam);
    J.block(np, 1 + np, nvel, nvel) = T.topRightCorner(nvel, nvel);
    J.block(np, 1 + np, nvel, nvel).diagonal().array() += 1.0;
    J.block(np + nvel, 1 + np, np, nvel) = T.bottomRightCorner(np, nvel);
    J.block(np + nvel, 1 + np + nvel, np, np).diagonal().setOnes();
    return J;
  };
  p.D2F = [S, g](const Vec& l, const Vec& s, const Vec& d1, const Vec& d2) -> Vec {
    const double lam = l(0);
    if (!(lam > 0.0)) throw Error(ErrorKind::EvalFailure, "ns_lite: lambda must be positive");
    const int np = g.np, nvel = g.nvel(), N = g.state_dim();
    const Vec U = s.segment(np, nvel), q = s.tail(np);
    const double m1 = d1(0), m2 = d2(0);
    const Vec U1 = d1.segment(1 + np, nvel), U2 = d2.segment(1 + np, nvel);
    const Vec q1 = d1.tail(np), q2 = d2.tail(np);
    const Vec DN1 = convection(g, U, U1) + convection(g, U1, U);
    const Vec DN2 = convection(g, U, U2) + convection(g, U2, U);
    const Vec G = m1 * DN2 + m2 * DN1 + lam * (convection(g, U1, U2) + convection(g, U2, U1));
    const StokesSolution ts = S->solve(G);
    Vec out(N);
    out.head(np) = -2.0 * q * m1 * m2 / (lam * lam * lam) + (m1 * q2 + m2 * q1) / (lam * lam);
    out.segment(np, nvel) = ts.vel;
    out.tail(np) = ts.pressure;
    return out;
  };
  return p;
}

namespace {

// Bilinear interpolation on a tensor grid of sample coordinates. `index`
// maps a sample node to a coarse unknown, or -1 where the value is zero.
struct Axis {
  std::vector<double> xs;
  bool clamp = false;
};

void locate(const Axis& a, double x, int& k, double& t) {
  const auto& xs = a.xs;
  if (x <= xs.front()) {
    k = 0;
    t = 0.0;
    return;
  }
  if (x >= xs.back()) {
    k = static_cast<int>(xs.size()) - 2;
    t = 1.0;
    return;
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  k = static_cast<int>(it - xs.begin()) - 1;
  t = (x - xs[k]) / (xs[k + 1] - xs[k]);
}

template <class Index>
void interp_rows(Mat& E, int row, const Axis& ax, const Axis& ay, double x, double y, Index index) {
  int kx, ky;
  double tx, ty;
  locate(ax, x, kx, tx);
  locate(ay, y, ky, ty);
  const double w[2][2] = {{(1 - tx) * (1 - ty), (1 - tx) * ty}, {tx * (1 - ty), tx * ty}};
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      if (w[a][b] == 0.0) continue;
      const int c = index(kx + a, ky + b);
      if (c >= 0) E(row, c) += w[a][b];
    }
}

}  // namespace

Mat velocity_prolongation(int res_coarse, int res_fine) {
  const MacGrid gc(res_coarse), gf(res_fine);
  Mat E = Mat::Zero(gf.nvel(), gc.nvel());
  const int rc = res_coarse;
  Axis faces, centres;
  for (int i = 0; i <= rc; ++i) faces.xs.push_back(i * gc.h);
  centres.xs.push_back(0.0);
  for (int j = 0; j < rc; ++j) centres.xs.push_back((j + 0.5) * gc.h);
  centres.xs.push_back(1.0);
  auto uidx = [&](int ix, int iy) { return (ix >= 1 && ix <= rc - 1 && iy >= 1 && iy <= rc) ? gc.u_index(ix, iy - 1) : -1; };
  auto vidx = [&](int ix, int iy) { return (iy >= 1 && iy <= rc - 1 && ix >= 1 && ix <= rc) ? gc.v_index(ix - 1, iy) : -1; };
  for (int j = 0; j < res_fine; ++j)
    for (int i = 1; i < res_fine; ++i) interp_rows(E, gf.u_index(i, j), faces, centres, i * gf.h, (j + 0.5) * gf.h, uidx);
  for (int j = 1; j < res_fine; ++j)
    for (int i = 0; i < res_fine; ++i) interp_rows(E, gf.v_index(i, j), centres, faces, (i + 0.5) * gf.h, j * gf.h, vidx);
  return E;
}

Mat pressure_prolongation(int res_coarse, int res_fine) {
  const MacGrid gc(res_coarse), gf(res_fine);
  Mat E = Mat::Zero(gf.np, gc.np);
  Axis c;
  for (int i = 0; i < res_coarse; ++i) c.xs.push_back((i + 0.5) * gc.h);
  c.clamp = true;
  auto pidx = [&](int ix, int iy) { return gc.p_index(ix, iy); };
  for (int j = 0; j < res_fine; ++j)
    for (int i = 0; i < res_fine; ++i) interp_rows(E, gf.p_index(i, j), c, c, (i + 0.5) * gf.h, (j + 0.5) * gf.h, pidx);
  return E;
}

Mat left_inverse(const Mat& E) {
  Mat G = E.transpose() * E;
  return G.ldlt().solve(E.transpose());
}

Vec ns_solve_state(int res, double lambda, const Vec& force, int max_iter, double tol) {
  if (!(lambda > 0.0)) throw Error(ErrorKind::EvalFailure, "ns_lite: lambda must be positive");
  auto S = stokes_solver(res);
  const MacGrid& g = S->grid();
  const int nvel = g.nvel(), np = g.np;
  Vec U = Vec::Zero(nvel);
  bool done = false;
  for (int it = 0; it < max_iter; ++it) {
    const StokesSolution ts = S->solve(lambda * (convection(g, U, U) - force));
    const Vec R = U + ts.vel;
    if (R.norm() <= tol * (1.0 + U.norm())) {
      done = true;
      break;
    }
    const Mat T = S->solve_many(lambda * convection_jacobian(g, U));
    Mat J = T.topRows(nvel);
    J.diagonal().array() += 1.0;
    U -= J.partialPivLu().solve(R);
  }
  if (!done) throw Error(ErrorKind::NoConvergence, "ns_solve_state");
  const StokesSolution ts = S->solve(lambda * (convection(g, U, U) - force));
  Vec state(g.state_dim());
  const Vec q = -ts.pressure;
  state.head(np) = q / lambda;
  state.segment(np, nvel) = U;
  state.tail(np) = q;
  return state;
}

double gram_norm(const Mat& A) { return op_norm(A); }

NsTransferStudy ns_transfer_study(int res_fine, const std::vector<int>& res_list, Forcing kind, double lambda0) {
  NsTransferStudy study;
  study.res_fine = res_fine;
  study.lambda0 = lambda0;
  auto Tf = stokes_solver(res_fine);
  const MacGrid gf = Tf->grid();
  const Vec force_f = ns_forcing(gf, kind, 1.0);
  const Vec state = ns_solve_state(res_fine, lambda0, force_f);
  const Vec U0 = state.segment(gf.np, gf.nvel());
  for (int rc : res_list) {
    if (rc > res_fine) throw Error(ErrorKind::BadParams, "ns_transfer_study: coarse resolution above fine");
    auto Tc = stokes_solver(rc);
    const MacGrid gc = Tc->grid();
    const Mat EU = velocity_prolongation(rc, res_fine);
    const Mat EP = pressure_prolongation(rc, res_fine);
    const Mat RU = left_inverse(EU);
    const Mat RP = left_inverse(EP);
    const int nf = gf.nvel() + gf.np, nc = gc.nvel() + gc.np;
    Mat Eout = Mat::Zero(nf, nc), Rout = Mat::Zero(nc, nf);
    Eout.topLeftCorner(gf.nvel(), gc.nvel()) = EU;
    Eout.bottomRightCorner(gf.np, gc.np) = EP;
    Rout.topLeftCorner(gc.nvel(), gf.nvel()) = RU;
    Rout.bottomRightCorner(gc.np, gf.np) = RP;

    const Vec force_c = RU * force_f;
    const Vec U0c = RU * U0;
    Mat in_f(gf.nvel(), 1 + gc.nvel()), in_c(gc.nvel(), 1 + gc.nvel());
    in_f.col(0) = convection(gf, U0, U0) - force_f;
    in_f.rightCols(gc.nvel()) = lambda0 * convection_jacobian(gf, U0) * EU;
    in_c.col(0) = convection(gc, U0c, U0c) - force_c;
    in_c.rightCols(gc.nvel()) = lambda0 * convection_jacobian(gc, U0c);

    const Mat A = Tf->solve_many(in_f);
    const Mat proj = Eout * (Rout * A) - A;
    const Mat gap = A - Eout * Tc->solve_many(RU * in_f);
    const Mat shift = Eout * Tc->solve_many(RU * in_f - in_c);

    NsTransferRow row;
    row.res = rc;
    row.eta2_projection = gram_norm(proj);
    row.eta2_stokes_gap = gram_norm(gap);
    row.eta2_nonlinear = gram_norm(shift);
    row.eta2 = row.eta2_projection + row.eta2_stokes_gap + row.eta2_nonlinear;
    const int k = gc.nvel();
    row.eta4_projection = gram_norm(proj.rightCols(k));
    row.eta4_stokes_gap = gram_norm(gap.rightCols(k));
    row.eta4_nonlinear = gram_norm(shift.rightCols(k));
    row.eta4 = row.eta4_projection + row.eta4_stokes_gap + row.eta4_nonlinear;
    study.rows.push_back(row);
  }
  study.eta2_decreasing = study.eta4_decreasing = true;
  for (size_t i = 1; i < study.rows.size(); ++i) {
    if (!(study.rows[i].eta2 < study.rows[i - 1].eta2)) study.eta2_decreasing = false;
    if (!(study.rows[i].eta4 < study.rows[i - 1].eta4)) study.eta4_decreasing = false;
  }
  return study;
}

}  // namespace bif
