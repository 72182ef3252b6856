#include "bifurcate/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bifurcate/errors.hpp"

namespace bif {

void validate(const RecoveryOptions& o) {
  if (o.max_iter < 1) throw Error(ErrorKind::BadParams, "max_iter must be positive");
  if (!(o.step_tol > 0) || !(o.residual_tol > 0)) throw Error(ErrorKind::BadParams, "tolerances must be positive");
  if (!(o.alpha > 0) || o.alpha >= 1 || o.alpha == 0.5)
    throw Error(ErrorKind::BadParams, "alpha must lie in (0,1) and differ from 1/2");
  if (!(o.refresh_cond > 1)) throw Error(ErrorKind::BadParams, "refresh_cond must exceed 1");
}

KernelBlocks solve_kernel_blocks(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  KernelBlocks kb;
  const int qm = fr.q + fr.m;
  Mat rhsG = Mat::Zero(fr.dim_x(), qm);
  rhsG.topRows(qm) = fr.basis_qm;
  const Mat Y = solve(PhiG_matrix(p, fr, pt), rhsG);
  for (int i = 0; i < qm; ++i) kb.y.push_back(Y.col(i));
  if (fr.n > 0) {
    Mat rhsH = Mat::Zero(fr.dim_z(), fr.n);
    rhsH.topRows(fr.n) = fr.basis_n;
    const Mat Z = solve(PhiH_matrix(p, fr, pt), rhsH);
    for (int k = 0; k < fr.n; ++k) kb.z.push_back(Z.col(k));
  }
  return kb;
}

Vec singular_residual(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  const KernelBlocks kb = solve_kernel_blocks(p, fr, pt);
  const int qm = fr.q + fr.m;
  Vec r(fr.q * qm + fr.n * fr.n);
  for (int i = 0; i < qm; ++i) r.segment(i * fr.q, fr.q) = kb.y[i].head(fr.q);
  for (int k = 0; k < fr.n; ++k) r.segment(fr.q * qm + k * fr.n, fr.n) = kb.z[k].head(fr.n);
  return r;
}

ExtState anchor_state(const ProblemDef& p, const Frames& fr, const PointLU& anchor) {
  ExtState s = ExtState::zeros(ExtLayout::of(fr));
  s.set_x(x_of(fr.q, anchor));
  const KernelBlocks kb = solve_kernel_blocks(p, fr, anchor);
  for (size_t i = 0; i < kb.y.size(); ++i) {
    Vec y = kb.y[i];
    y.head(fr.q).setZero();
    s.set_y(static_cast<int>(i), y);
  }
  for (size_t k = 0; k < kb.z.size(); ++k) {
    Vec z = kb.z[k];
    z.head(fr.n).setZero();
    s.set_z(static_cast<int>(k), z);
  }
  return s;
}

namespace {

using ResidualFn = std::function<Vec(const Vec&)>;

Mat fd_jacobian(const ResidualFn& r, const Vec& z, const Vec& r0) {
  const double h = std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + z.lpNorm<Eigen::Infinity>());
  Mat J(r0.size(), z.size());
  for (int j = 0; j < z.size(); ++j) {
    Vec zp = z, zm = z;
    zp(j) += h;
    zm(j) -= h;
    J.col(j) = (r(zp) - r(zm)) / (2.0 * h);
  }
  return J;
}

struct GaussNewtonOutcome {
  Vec z;
  int iterations = 0;
  std::vector<double> history;
  bool converged = false;
};

// Minimum-norm Gauss-Newton with backtracking. `before_step` may replace the
// residual function (frame refresh) and returns true when it did.
GaussNewtonOutcome gauss_newton(ResidualFn r, Vec z, double radius, const RecoveryOptions& o,
                                const std::function<bool(const Vec&, ResidualFn&)>& before_step) {
  GaussNewtonOutcome out;
  Vec rz = r(z);
  require_finite(rz, "recovery residual");
  out.history.push_back(rz.norm());
  if (rz.norm() <= o.residual_tol) {
    out.z = z;
    out.converged = true;
    return out;
  }
  const Vec z0 = z;
  for (int it = 1; it <= o.max_iter; ++it) {
    if (before_step && before_step(z, r)) rz = r(z);
    const Mat J = fd_jacobian(r, z, rz);
    const Vec step = -solve(J, rz, SolveMode::LeastSquares);
    double t = 1.0;
    Vec zn = z + step;
    Vec rn = r(zn);
    if (o.line_search) {
      const double target = rz.squaredNorm();
      for (int h = 0; h < 20 && !(rn.allFinite() && rn.squaredNorm() <= (1.0 - 1e-4 * t) * target); ++h) {
        t *= 0.5;
        zn = z + t * step;
        rn = r(zn);
      }
    }
    require_finite(rn, "recovery residual");
    const double stepn = t * step.norm();
    z = zn;
    rz = rn;
    out.iterations = it;
    out.history.push_back(rz.norm());
    if ((z - z0).norm() > radius)
      throw Error(ErrorKind::DivergedOutsideTrustRegion, "Gauss-Newton iterate left the trust region");
    if (rz.norm() <= o.residual_tol ||
        (stepn <= o.step_tol * (1.0 + z.norm()) && rz.norm() <= 1e3 * o.residual_tol)) {
      out.converged = true;
      break;
    }
  }
  out.z = z;
  return out;
}

bool frames_ill_conditioned(const ProblemDef& p, const Frames& fr, const PointLU& pt, double limit) {
  if (condition_number(PhiG_matrix(p, fr, pt)) > limit) return true;
  return fr.n > 0 && condition_number(PhiH_matrix(p, fr, pt)) > limit;
}

void finish(const ProblemDef& target, Frames fr, const PointLU& pt, const RecoveryOptions& o, RecoveryResult& res) {
  fr.theta0 = fr.B * x_of(fr.q, pt);
  res.theta0_shifted = fr.theta0;
  res.frames = fr;
  res.ext_state = build_extended_solution(target, fr, pt);
  res.kernels = kernel_from_extended(res.ext_state);
  res.verify = verify_extended(target, fr, res.ext_state, o.verify);
}

}  // namespace

RecoveryResult recover(const ProblemDef& p, const Frames& fr0, const PointLU& anchor, const RecoveryOptions& opts,
                       std::optional<double> a_star) {
  validate(opts);
  Frames fr = fr0;
  RecoveryResult res;
  const int m = p.m;
  const double radius = 10.0 * (1.0 + anchor.stacked().norm());
  ResidualFn r = [&p, &fr, m](const Vec& z) { return singular_residual(p, fr, PointLU::from_stacked(z, m)); };
  auto refresh = [&](const Vec& z, ResidualFn&) {
    const PointLU pt = PointLU::from_stacked(z, m);
    if (!frames_ill_conditioned(p, fr, pt, opts.refresh_cond)) return false;
    fr = choose_frames(p, pt, opts.rtol, TypeNQ{fr0.n, fr0.q});
    ++res.frame_refreshes;
    return true;
  };
  const GaussNewtonOutcome gn = gauss_newton(r, anchor.stacked(), radius, opts, refresh);
  res.iterations = gn.iterations;
  res.residual_history = gn.history;
  if (!gn.converged) throw Error(ErrorKind::NoConvergence, "singular-point recovery did not converge");
  res.point = PointLU::from_stacked(gn.z, m);
  res.rho = eval_F(p, res.point);
  finish(shifted(p, res.rho), fr, res.point, opts, res);
  res.converged = res.verify.passes;
  if (a_star) {
    const ExtState s_anchor = anchor_state(p, fr0, anchor);
    ExtState s0 = res.ext_state;
    res.distance_to_anchor_state = (s0.data - s_anchor.data).norm();
    res.ball_checked = true;
    res.within_ball = res.distance_to_anchor_state <= *a_star;
  }
  return res;
}

RecoveryResult recover_functional(const ProblemDef& p, const Frames& fr, const PointLU& anchor,
                                  const RecoveryOptions& opts) {
  validate(opts);
  RecoveryResult res;
  const int m = p.m;
  const int d = p.m + p.N;
  const double radius = 10.0 * (1.0 + anchor.stacked().norm());
  ResidualFn r = [&p, &fr, m, d](const Vec& z) {
    const PointLU pt = PointLU::from_stacked(z.head(d), m);
    const Vec dir = z.tail(d);
    const ProblemDef pm = modified_by_direction(p, dir);
    const Vec s = singular_residual(pm, fr, pt);
    Vec out(p.N + s.size());
    out.head(p.N) = eval_F(pm, pt);
    out.tail(s.size()) = s;
    return out;
  };
  Vec z0(2 * d);
  z0.head(d) = anchor.stacked();
  z0.tail(d).setZero();
  const GaussNewtonOutcome gn = gauss_newton(r, z0, radius, opts, nullptr);
  res.iterations = gn.iterations;
  res.residual_history = gn.history;
  if (!gn.converged) throw Error(ErrorKind::NoConvergence, "functional recovery did not converge");
  res.point = PointLU::from_stacked(gn.z.head(d), m);
  res.mu_w_prime = gn.z.tail(d);
  res.rho = jac_DF(p, res.point) * res.mu_w_prime;
  finish(modified_by_direction(p, res.mu_w_prime), fr, res.point, opts, res);
  res.converged = res.verify.passes;
  return res;
}

// ---------------------------------------------------------------------------
// Branch tracing

namespace {

std::vector<Vec> bifurcation_tangents(const ProblemDef& p, const PointLU& pt) {
  const Mat DF = jac_DF(p, pt);
  const Mat K = smallest_right_vectors(DF, 2);
  const Vec psi = smallest_left_vectors(DF, 1).col(0);
  const Vec k1 = K.col(0), k2 = K.col(1);
  const double a = psi.dot(second_directional(p, pt, k1, k1));
  const double b = psi.dot(second_directional(p, pt, k1, k2));
  const double c = psi.dot(second_directional(p, pt, k2, k2));
  const double scale = std::max({std::abs(a), std::abs(b), std::abs(c)});
  const double disc = b * b - a * c;
  if (scale < 1e-10 || disc < 0) return {k1, k2};
  if (std::max(std::abs(a), std::abs(c)) <= 1e-12 * scale) return {k1, k2};
  std::vector<Vec> t;
  const double sq = std::sqrt(disc);
  if (std::abs(a) >= std::abs(c)) {
    for (double root : {(-b + sq) / a, (-b - sq) / a}) t.push_back((root * k1 + k2).normalized());
  } else {
    for (double root : {(-b + sq) / c, (-b - sq) / c}) t.push_back((k1 + root * k2).normalized());
  }
  return t;
}

bool correct(const ProblemDef& p, const Vec& rho, const Vec& prev, const Vec& tau, double ds, Vec& X) {
  const int m = p.m;
  for (int it = 0; it < 20; ++it) {
    const PointLU pt = PointLU::from_stacked(X, m);
    Vec res(p.N + 1);
    res.head(p.N) = eval_F(p, pt) - rho;
    res(p.N) = tau.dot(X - prev) - ds;
    if (!res.allFinite()) return false;
    const double tol = 1e-11 * (1.0 + X.norm());
    if (res.norm() <= tol) return true;
    Mat J(p.N + 1, X.size());
    J.topRows(p.N) = jac_DF(p, pt);
    J.row(p.N) = tau.transpose();
    const Vec dx = solve(J, res, SolveMode::LeastSquares);
    X -= dx;
    if (dx.norm() > 10.0 * std::abs(ds)) return false;
  }
  return false;
}

}  // namespace

TraceResult trace_branches(const ProblemDef& p, const Vec& rho, const PointLU& point, int steps, double ds) {
  if (steps < 1 || !(ds > 0)) throw Error(ErrorKind::BadParams, "trace needs steps >= 1 and ds > 0");
  if (p.m != 1) throw Error(ErrorKind::BadParams, "branch tracing supports a scalar parameter only");
  TraceResult tr;
  tr.start = point;
  tr.tangents = bifurcation_tangents(p, point);
  const Vec X0 = point.stacked();
  tr.start_residual = (eval_F(p, point) - rho).norm();
  const bool on_branch = tr.start_residual <= 1e-8 * (1.0 + rho.norm());
  for (size_t j = 0; j < tr.tangents.size(); ++j) {
    for (int sign : {1, -1}) {
      Branch br;
      br.tangent_index = static_cast<int>(j);
      br.sign = sign;
      br.tangent = sign * tr.tangents[j];
      br.starts_at_point = on_branch;
      Vec prev = X0;
      Vec tau = br.tangent;
      double s = 0.0;
      double h = ds;
      int failures = 0;
      while (static_cast<int>(br.points.size()) < steps) {
        Vec X = prev + h * tau;
        if (correct(p, rho, prev, tau, h, X)) {
          failures = 0;
          s += h;
          const PointLU pt = PointLU::from_stacked(X, p.m);
          br.points.push_back(BranchPoint{s, pt.lambda, pt.u});
          tau = (X - prev).normalized();
          prev = X;
          h = std::min(ds, 2.0 * h);
        } else {
          if (++failures >= 3) throw Error(ErrorKind::ContinuationStall, "continuation corrector failed three times");
          h *= 0.5;
        }
      }
      tr.branches.push_back(std::move(br));
    }
  }
  return tr;
}

double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1) {
  const Vec u = p1 - p0, v = q1 - q0, w = p0 - q0;
  const double a = u.dot(u), b = u.dot(v), c = v.dot(v), d = u.dot(w), e = v.dot(w);
  double s = 0.0, t = 0.0;
  if (a <= 1e-300 && c <= 1e-300) return w.norm();
  if (a <= 1e-300) {
    t = std::clamp(e / c, 0.0, 1.0);
  } else if (c <= 1e-300) {
    s = std::clamp(-d / a, 0.0, 1.0);
  } else {
    const double den = a * c - b * b;
    s = den > 1e-14 * a * c ? std::clamp((b * e - c * d) / den, 0.0, 1.0) : 0.0;
    t = (b * s + e) / c;
    if (t < 0.0) {
      t = 0.0;
      s = std::clamp(-d / a, 0.0, 1.0);
    } else if (t > 1.0) {
      t = 1.0;
      s = std::clamp((b - d) / a, 0.0, 1.0);
    }
  }
  return (w + s * u - t * v).norm();
}

namespace {

std::vector<Vec> polyline(const TraceResult& t, const Branch& br) {
  std::vector<Vec> pts;
  if (br.starts_at_point) pts.push_back(t.start.stacked());
  for (const auto& bp : br.points) pts.push_back(PointLU{bp.lambda, bp.u}.stacked());
  return pts;
}

}  // namespace

double crossing_gap(const TraceResult& t) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& b1 : t.branches) {
    if (b1.tangent_index != 0) continue;
    const auto P = polyline(t, b1);
    for (const auto& b2 : t.branches) {
      if (b2.tangent_index != 1) continue;
      const auto Q = polyline(t, b2);
      for (size_t i = 0; i + 1 < P.size(); ++i)
        for (size_t j = 0; j + 1 < Q.size(); ++j) best = std::min(best, segment_distance(P[i], P[i + 1], Q[j], Q[j + 1]));
    }
  }
  return best;
}

}  // namespace bif
