#include "bifurcate/classify.hpp"

#include <algorithm>
#include <random>

namespace bif {

double default_tol_res(const ProblemDef& p, const PointLU& pt) {
  return 1e-8 * (1.0 + jac_DF(p, pt).cwiseAbs().maxCoeff());
}

ClassifyReport classify(const ProblemDef& p, const PointLU& pt, double rtol, double tol_res) {
  ClassifyReport r;
  r.rtol_used = rtol;
  r.tol_res = tol_res > 0.0 ? tol_res : default_tol_res(p, pt);
  r.residual = eval_F(p, pt).norm();
  if (r.residual > r.tol_res)
    throw Error(ErrorKind::SolutionResidualTooLarge, "classify: |F| = " + std::to_string(r.residual));
  const Mat DF = jac_DF(p, pt);
  const SvdResult sF = svd_analysis(DF);
  const SvdResult sU = svd_analysis(DF.rightCols(p.N));
  // Both ranks are decided against one scale, floored at 1 so that a point a
  // few ulps away from the singular point is not read as regular.
  const double scale = std::max(1.0, sF.sigma.size() ? sF.sigma(0) : 0.0);
  const double thr = rtol * scale;
  auto rank_of = [thr](const Vec& s) { return int((s.array() > thr).count()); };
  auto ambiguous = [thr](const Vec& s) { return ((s.array() > thr / 10.0) && (s.array() < thr * 10.0)).any(); };
  const int rankF = rank_of(sF.sigma);
  const int rankU = rank_of(sU.sigma);
  r.sigma_DF = sF.sigma;
  r.sigma_DuF = sU.sigma;
  r.q = p.N - rankF;
  r.n = p.N - rankU;
  for (int j = rankF; j < p.m + p.N; ++j) r.kernel_DF.push_back(sF.V.col(j));
  for (int j = rankU; j < p.N; ++j) r.kernel_DuF.push_back(sU.V.col(j));
  for (int j = rankF; j < p.N; ++j) r.cokernel_DF.push_back(sF.U.col(j));
  for (int j = rankU; j < p.N; ++j) r.cokernel_DuF.push_back(sU.U.col(j));
  r.rank_ambiguity = ambiguous(sF.sigma) || ambiguous(sU.sigma);
  r.bifurcation = r.n >= 1 && r.q >= 1;
  r.fredholm_index_note = "D_uF is square (" + std::to_string(p.N) + "x" + std::to_string(p.N) +
                          "), so dim Ker = codim Range and the index is zero";
  return r;
}

ExtState build_extended_solution(const ProblemDef& p, const Frames& fr, const PointLU& pt) {
  ExtState s = ExtState::zeros(ExtLayout::of(fr));
  s.set_x(x_of(fr.q, pt));
  const Mat PG = PhiG_matrix(p, fr, pt);
  const Mat PH = PhiH_matrix(p, fr, pt);
  const int qm = fr.q + fr.m;
  Mat rhsG = Mat::Zero(fr.dim_x(), qm);
  rhsG.topRows(qm) = fr.basis_qm;
  const Mat Y = solve(PG, rhsG);
  for (int i = 0; i < qm; ++i) s.set_y(i, Y.col(i));
  if (fr.n > 0) {
    Mat rhsH = Mat::Zero(fr.dim_z(), fr.n);
    rhsH.topRows(fr.n) = fr.basis_n;
    const Mat Z = solve(PH, rhsH);
    for (int k = 0; k < fr.n; ++k) s.set_z(k, Z.col(k));
  }
  return s;
}

VerifyReport verify_extended(const ProblemDef& p, const Frames& fr, const ExtState& s0, const VerifyTolerances& tols) {
  VerifyReport r;
  r.implied_type = TypeNQ{fr.n, fr.q};
  try {
    r.residual_S = eval_S(p, fr, s0).norm();
    r.sigma_min_DS = sigma_min(jac_S(p, fr, s0));
  } catch (const Error&) {
    r.residual_S = std::numeric_limits<double>::infinity();
    r.sigma_min_DS = 0.0;
  }
  r.zero_components_max = s0.zero_components_max();
  r.passes = r.residual_S <= tols.tol_res && r.sigma_min_DS > tols.tol_rank && r.zero_components_max <= tols.tol_zero;
  return r;
}

KernelBases kernel_from_extended(const ExtState& s0) {
  KernelBases k;
  for (int i = 0; i < s0.lay.q + s0.lay.m; ++i) k.DF.push_back(s0.mu_w(i));
  for (int j = 0; j < s0.lay.n; ++j) k.DuF.push_back(s0.v(j));
  return k;
}

namespace {

Mat jacobian_of_change(const LinearChange& t) {
  const auto m = t.Lambda.rows(), N = t.A.rows();
  Mat J = Mat::Zero(m + N, m + N);
  J.topLeftCorner(m, m) = t.Lambda;
  J.bottomLeftCorner(N, m) = t.C;
  J.bottomRightCorner(N, N) = t.A;
  return J;
}

}  // namespace

PointLU transform_point(const PointLU& pt, const LinearChange& t) {
  return PointLU{t.Lambda * pt.lambda, t.A * pt.u + t.C * pt.lambda};
}

ProblemDef transform_problem(const ProblemDef& p, const LinearChange& t) {
  const Mat Jinv = jacobian_of_change(t).inverse();
  const int m = p.m;
  auto back = [Jinv, m](const Vec& l, const Vec& u) {
    Vec z(l.size() + u.size());
    z << l, u;
    return PointLU::from_stacked(Jinv * z, m);
  };
  ProblemDef r;
  r.name = p.name + "-transformed";
  r.m = p.m;
  r.N = p.N;
  r.smoothness = p.smoothness;
  r.F = [p, back](const Vec& l, const Vec& u) { return eval_F(p, back(l, u)); };
  r.DF = [p, back, Jinv](const Vec& l, const Vec& u) -> Mat { return jac_DF(p, back(l, u)) * Jinv; };
  r.D2F = [p, back, Jinv](const Vec& l, const Vec& u, const Vec& a, const Vec& b) -> Vec {
    return second_directional(p, back(l, u), Jinv * a, Jinv * b);
  };
  return r;
}

LinearChange random_change(int m, int N, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.5, 2.0);
  auto well_conditioned = [&](int k) {
    Mat G(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) G(i, j) = nd(rng);
    Eigen::HouseholderQR<Mat> qr(G);
    Mat Q = qr.householderQ();
    Vec d(k);
    for (int i = 0; i < k; ++i) d(i) = ud(rng);
    return Mat(Q * d.asDiagonal());
  };
  LinearChange t;
  t.Lambda = well_conditioned(m);
  t.A = well_conditioned(N);
  t.C = Mat(N, m);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < m; ++j) t.C(i, j) = 0.5 * nd(rng);
  return t;
}

SpotcheckReport equivalence_spotcheck(const ProblemDef& p, const PointLU& pt, unsigned seed, int trials, double rtol) {
  SpotcheckReport rep;
  rep.seed = seed;
  rep.trials = trials;
  const ClassifyReport base = classify(p, pt, rtol);
  rep.base = TypeNQ{base.n, base.q};
  for (int t = 0; t < trials; ++t) {
    const LinearChange ch = random_change(p.m, p.N, seed + 7919u * static_cast<unsigned>(t));
    const ProblemDef pt_prob = transform_problem(p, ch);
    const ClassifyReport c = classify(pt_prob, transform_point(pt, ch), rtol);
    rep.transformed.push_back(TypeNQ{c.n, c.q});
    if (c.n != base.n || c.q != base.q) rep.all_equal = false;
  }
  return rep;
}

}  // namespace bif
