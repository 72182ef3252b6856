#include "bifurcate/problem.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace bif {

Vec PointLU::stacked() const {
  Vec z(lambda.size() + u.size());
  z << lambda, u;
  return z;
}

PointLU PointLU::from_stacked(const Vec& z, int m) {
  return PointLU{z.head(m), z.tail(z.size() - m)};
}

namespace {

void check_dims(const ProblemDef& p, const Vec& lambda, const Vec& u) {
  if (lambda.size() != p.m || u.size() != p.N)
    throw Error(ErrorKind::DimensionMismatch, p.name + ": point dimensions");
}

Vec call_F(const ProblemDef& p, const Vec& lambda, const Vec& u) {
  check_dims(p, lambda, u);
  Vec r = p.F(lambda, u);
  if (r.size() != p.N) throw Error(ErrorKind::EvalFailure, p.name + ": F returned wrong dimension");
  if (!r.allFinite()) throw Error(ErrorKind::EvalFailure, p.name + ": F not finite");
  return r;
}

Vec call_F(const ProblemDef& p, const Vec& z) {
  return call_F(p, z.head(p.m), z.tail(p.N));
}

double fd_step1(const Vec& z) {
  return std::cbrt(std::numeric_limits<double>::epsilon()) * (1.0 + z.lpNorm<Eigen::Infinity>());
}

double fd_step2(const Vec& z) {
  return std::pow(std::numeric_limits<double>::epsilon(), 0.25) * (1.0 + z.lpNorm<Eigen::Infinity>());
}

}  // namespace

Vec eval_F(const ProblemDef& p, const PointLU& pt) { return call_F(p, pt.lambda, pt.u); }

Mat fd_DF(const ProblemDef& p, const PointLU& pt) {
  const Vec z = pt.stacked();
  const double h = fd_step1(z);
  Mat J(p.N, p.m + p.N);
  for (int j = 0; j < p.m + p.N; ++j) {
    Vec zp = z, zm = z;
    zp(j) += h;
    zm(j) -= h;
    J.col(j) = (call_F(p, zp) - call_F(p, zm)) / (2.0 * h);
  }
  return J;
}

Mat jac_DF(const ProblemDef& p, const PointLU& pt) {
  check_dims(p, pt.lambda, pt.u);
  if (!p.DF) return fd_DF(p, pt);
  Mat J = p.DF(pt.lambda, pt.u);
  if (J.rows() != p.N || J.cols() != p.m + p.N)
    throw Error(ErrorKind::EvalFailure, p.name + ": DF returned wrong shape");
  if (!J.allFinite()) throw Error(ErrorKind::EvalFailure, p.name + ": DF not finite");
  return J;
}

Mat jac_DuF(const ProblemDef& p, const PointLU& pt) {
  if (p.DF) return jac_DF(p, pt).rightCols(p.N);
  const Vec z = pt.stacked();
  const double h = fd_step1(z);
  Mat J(p.N, p.N);
  for (int j = 0; j < p.N; ++j) {
    Vec zp = z, zm = z;
    zp(p.m + j) += h;
    zm(p.m + j) -= h;
    J.col(j) = (call_F(p, zp) - call_F(p, zm)) / (2.0 * h);
  }
  return J;
}

Vec fd_second_directional(const ProblemDef& p, const PointLU& pt, const Vec& d1, const Vec& d2) {
  const double n1 = d1.norm(), n2 = d2.norm();
  if (n1 == 0.0 || n2 == 0.0) return Vec::Zero(p.N);
  const Vec a = d1 / n1, b = d2 / n2;
  const Vec z = pt.stacked();
  const double t = fd_step2(z);
  // the two middle terms trade places under a <-> b, so the result is
  // symmetric to the last bit
  Vec r = call_F(p, z + t * (a + b)) - call_F(p, z + t * (a - b)) - call_F(p, z - t * (a - b)) +
          call_F(p, z - t * (a + b));
  return r * (n1 * n2 / (4.0 * t * t));
}

Vec second_directional(const ProblemDef& p, const PointLU& pt, const Vec& d1, const Vec& d2) {
  check_dims(p, pt.lambda, pt.u);
  if (d1.size() != p.m + p.N || d2.size() != p.m + p.N)
    throw Error(ErrorKind::DimensionMismatch, p.name + ": direction dimensions");
  if (!p.D2F) return fd_second_directional(p, pt, d1, d2);
  Vec r = p.D2F(pt.lambda, pt.u, d1, d2);
  if (!r.allFinite()) throw Error(ErrorKind::EvalFailure, p.name + ": D2F not finite");
  return r;
}

Mat second_matrix(const ProblemDef& p, const PointLU& pt, const Vec& d1) {
  const int k = p.m + p.N;
  Mat M(p.N, k);
  for (int j = 0; j < k; ++j) M.col(j) = second_directional(p, pt, d1, Vec::Unit(k, j));
  return M;
}

FdReport fd_check(const ProblemDef& p, const std::vector<PointLU>& pts, unsigned seed) {
  FdReport rep;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto rel = [](const Mat& a, const Mat& b) {
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    return (a - b).cwiseAbs().maxCoeff() / scale;
  };
  const int k = p.m + p.N;
  for (const auto& pt : pts) {
    const Mat A = jac_DF(p, pt);
    const Mat B = fd_DF(p, pt);
    rep.max_rel_DF = std::max(rep.max_rel_DF, rel(A, B));
    rep.max_rel_DuF = std::max(rep.max_rel_DuF, rel(jac_DuF(p, pt), B.rightCols(p.N)));
    Vec d1(k), d2(k);
    for (int i = 0; i < k; ++i) d1(i) = nd(rng);
    for (int i = 0; i < k; ++i) d2(i) = nd(rng);
    d1.normalize();
    d2.normalize();
    const Vec s = second_directional(p, pt, d1, d2);
    const Vec sf = fd_second_directional(p, pt, d1, d2);
    rep.max_rel_D2F = std::max(rep.max_rel_D2F, rel(Mat(s), Mat(sf)));
    ++rep.points;
  }
  return rep;
}

ProblemDef shifted(const ProblemDef& p, const Vec& rho) {
  if (rho.size() != p.N) throw Error(ErrorKind::DimensionMismatch, "shifted: rho dimension");
  ProblemDef q = p;
  q.name = p.name + "-shifted";
  auto f = p.F;
  q.F = [f, rho](const Vec& l, const Vec& u) -> Vec { return f(l, u) - rho; };
  return q;
}

ProblemDef modified_by_direction(const ProblemDef& p, const Vec& d) {
  if (d.size() != p.m + p.N) throw Error(ErrorKind::DimensionMismatch, "modified_by_direction");
  ProblemDef q;
  q.name = p.name + "-modified";
  q.m = p.m;
  q.N = p.N;
  q.smoothness = p.smoothness - 1;
  q.F = [p, d](const Vec& l, const Vec& u) -> Vec {
    PointLU pt{l, u};
    return eval_F(p, pt) - jac_DF(p, pt) * d;
  };
  q.DF = [p, d](const Vec& l, const Vec& u) -> Mat {
    PointLU pt{l, u};
    return jac_DF(p, pt) - second_matrix(p, pt, d);
  };
  return q;
}

}  // namespace bif
