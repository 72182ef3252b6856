#include "bifurcate/extended.hpp"

#include <algorithm>

namespace bif {

ExtState ExtState::unflatten(const ExtLayout& l, const Vec& v) {
  if (v.size() != l.total()) throw Error(ErrorKind::DimensionMismatch, "ExtState::unflatten");
  return ExtState{l, v};
}

PointLU ExtState::point() const {
  const Vec xx = x();
  return PointLU{xx.segment(lay.q, lay.m), xx.tail(lay.N)};
}

double ExtState::zero_components_max() const {
  double z = lay.q > 0 ? f().cwiseAbs().maxCoeff() : 0.0;
  for (int i = 0; i < lay.q + lay.m && lay.q > 0; ++i) z = std::max(z, g(i).cwiseAbs().maxCoeff());
  for (int k = 0; k < lay.n; ++k) z = std::max(z, e(k).cwiseAbs().maxCoeff());
  return z;
}

Vec x_of(int q, const PointLU& pt) {
  Vec x(q + pt.lambda.size() + pt.u.size());
  x << Vec::Zero(q), pt.lambda, pt.u;
  return x;
}

namespace {

PointLU point_of(const Frames& fr, const Vec& x) {
  return PointLU{x.segment(fr.q, fr.m), x.tail(fr.N)};
}

void finish_frames(const ProblemDef& p, const PointLU& anchor, Frames& fr) {
  const Mat DG = DG_matrix(p, fr, anchor);
  fr.B = smallest_right_vectors(DG, fr.q + fr.m).transpose();
  if (fr.n > 0) fr.Bbar = smallest_right_vectors(H_matrix(p, fr, anchor), fr.n).transpose();
  else fr.Bbar = Mat(0, fr.N);
  fr.theta0 = fr.B * x_of(fr.q, anchor);
  fr.basis_qm = Mat::Identity(fr.q + fr.m, fr.q + fr.m);
  fr.basis_n = Mat::Identity(fr.n, fr.n);
}

}  // namespace

Frames frames_from_vectors(const ProblemDef& p, const PointLU& anchor, const Mat& a_bars, const Mat& b_bars) {
  Frames fr;
  fr.m = p.m;
  fr.N = p.N;
  fr.q = static_cast<int>(a_bars.cols());
  fr.n = static_cast<int>(b_bars.cols());
  fr.a_bars = a_bars;
  fr.b_bars = b_bars;
  finish_frames(p, anchor, fr);
  return fr;
}

Frames choose_frames(const ProblemDef& p, const PointLU& anchor, double rtol, std::optional<TypeNQ> forced,
                     bool require_n) {
  const Mat DF = jac_DF(p, anchor);
  const Mat DuF = DF.rightCols(p.N);
  const SvdResult sF = svd_analysis(DF);
  const SvdResult sU = svd_analysis(DuF);
  int q, n;
  if (forced) {
    q = forced->q;
    n = forced->n;
    if (q < 0 || n < 0 || q > p.N || n > p.N) throw Error(ErrorKind::BadParams, "choose_frames: forced type out of range");
  } else {
    q = p.N - numerical_rank(sF.sigma, rtol);
    n = p.N - numerical_rank(sU.sigma, rtol);
  }
  if (require_n && n < 1) throw Error(ErrorKind::DegenerateAnchor, "choose_frames: D_uF has no kernel at the anchor");
  Frames fr;
  fr.m = p.m;
  fr.N = p.N;
  fr.q = q;
  fr.n = n;
  fr.a_bars = sF.U.rightCols(q);
  fr.b_bars = sU.U.rightCols(n);
  fr.rank_ambiguity = rank_ambiguous(sF.sigma, rtol) || rank_ambiguous(sU.sigma, rtol);
  finish_frames(p, anchor, fr);
  return fr;
}

Mat DG_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  Mat M(fr.N, fr.dim_x());
  M.leftCols(fr.q) = -fr.a_bars;
  M.rightCols(fr.m + fr.N) = jac_DF(p, pt);
  return M;
}

Mat H_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  Mat M(fr.N, fr.dim_z());
  M.leftCols(fr.n) = -fr.b_bars;
  M.rightCols(fr.N) = jac_DuF(p, pt);
  return M;
}

Mat PhiG_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  Mat M(fr.dim_x(), fr.dim_x());
  M.topRows(fr.q + fr.m) = fr.B;
  M.bottomRows(fr.N) = DG_matrix(p, fr, pt);
  return M;
}

Mat PhiH_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  Mat M(fr.dim_z(), fr.dim_z());
  M.topRows(fr.n) = fr.Bbar;
  M.bottomRows(fr.N) = H_matrix(p, fr, pt);
  return M;
}

Mat Phi_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  const ExtLayout L = ExtLayout::of(fr);
  Mat M = Mat::Zero(L.total(), L.total());
  const Mat G = PhiG_matrix(p, fr, pt);
  const Mat H = PhiH_matrix(p, fr, pt);
  const int dx = L.dim_x(), dz = L.dim_z();
  M.block(0, 0, dx, dx) = G;
  for (int i = 0; i < fr.q + fr.m; ++i) M.block(L.off_y(i), L.off_y(i), dx, dx) = G;
  for (int k = 0; k < fr.n; ++k) M.block(L.off_z(k), L.off_z(k), dz, dz) = H;
  return M;
}

Mat Phi_x_derivative(const ProblemDef& p, const Frames& fr, const PointLU& pt, const ExtState& phi) {
  const ExtLayout L = phi.lay;
  const int dx = L.dim_x(), mN = fr.m + fr.N, qm = fr.q + fr.m;
  Mat M = Mat::Zero(L.total(), dx);
  M.block(qm, fr.q, fr.N, mN) = second_matrix(p, pt, phi.x().tail(mN));
  for (int i = 0; i < qm; ++i) M.block(L.off_y(i) + qm, fr.q, fr.N, mN) = second_matrix(p, pt, phi.mu_w(i));
  for (int k = 0; k < fr.n; ++k) {
    Vec d = Vec::Zero(mN);
    d.tail(fr.N) = phi.v(k);
    M.block(L.off_z(k) + fr.n, fr.q, fr.N, mN) = second_matrix(p, pt, d);
  }
  return M;
}

Vec eval_G(const ProblemDef& p, const Frames& fr, const Vec& x) {
  if (x.size() != fr.dim_x()) throw Error(ErrorKind::DimensionMismatch, "eval_G");
  return eval_F(p, point_of(fr, x)) - fr.a_bars * x.head(fr.q);
}

Vec eval_H(const ProblemDef& p, const Frames& fr, const PointLU& pt, const Vec& z) {
  if (z.size() != fr.dim_z()) throw Error(ErrorKind::DimensionMismatch, "eval_H");
  return jac_DuF(p, pt) * z.tail(fr.N) - fr.b_bars * z.head(fr.n);
}

Vec eval_Psi(const ProblemDef& p, const Frames& fr, const Vec& x) {
  Vec r(fr.dim_x());
  r.head(fr.q + fr.m) = fr.B * x - fr.theta0;
  r.tail(fr.N) = eval_G(p, fr, x);
  return r;
}

Vec eval_Phi(const ProblemDef& p, const Frames& fr, const Vec& x, const ExtState& phi) {
  return Phi_matrix(p, fr, point_of(fr, x)) * phi.data;
}

Vec eval_S(const ProblemDef& p, const Frames& fr, const ExtState& s) {
  const ExtLayout L = s.lay;
  const int qm = fr.q + fr.m;
  const Vec x = s.x();
  const PointLU pt = point_of(fr, x);
  const Mat DG = DG_matrix(p, fr, pt);
  const Mat H = H_matrix(p, fr, pt);
  Vec r(L.total());
  r.head(L.dim_x()) = eval_Psi(p, fr, x);
  for (int i = 0; i < qm; ++i) {
    const Vec y = s.y(i);
    r.segment(L.off_y(i), qm) = fr.B * y - fr.basis_qm.col(i);
    r.segment(L.off_y(i) + qm, fr.N) = DG * y;
  }
  for (int k = 0; k < fr.n; ++k) {
    const Vec z = s.z(k);
    r.segment(L.off_z(k), fr.n) = fr.Bbar * z - fr.basis_n.col(k);
    r.segment(L.off_z(k) + fr.n, fr.N) = H * z;
  }
  return r;
}

Mat jac_S(const ProblemDef& p, const Frames& fr, const ExtState& s) {
  const ExtLayout L = s.lay;
  const int qm = fr.q + fr.m, dx = L.dim_x(), dz = L.dim_z(), mN = fr.m + fr.N;
  const PointLU pt = s.point();
  const Mat PG = PhiG_matrix(p, fr, pt);
  const Mat PH = PhiH_matrix(p, fr, pt);
  Mat J = Mat::Zero(L.total(), L.total());
  J.block(0, 0, dx, dx) = PG;
  for (int i = 0; i < qm; ++i) {
    J.block(L.off_y(i), L.off_y(i), dx, dx) = PG;
    J.block(L.off_y(i) + qm, fr.q, fr.N, mN) = second_matrix(p, pt, s.mu_w(i));
  }
  for (int k = 0; k < fr.n; ++k) {
    J.block(L.off_z(k), L.off_z(k), dz, dz) = PH;
    Vec d = Vec::Zero(mN);
    d.tail(fr.N) = s.v(k);
    J.block(L.off_z(k) + fr.n, fr.q, fr.N, mN) = second_matrix(p, pt, d);
  }
  return J;
}

std::pair<double, double> kernel_intersection_margins(const ProblemDef& p, const Frames& fr, const PointLU& anchor) {
  return {sigma_min(PhiG_matrix(p, fr, anchor)), sigma_min(PhiH_matrix(p, fr, anchor))};
}

}  // namespace bif
