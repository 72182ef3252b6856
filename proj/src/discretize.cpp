#include "bifurcate/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "bifurcate/errors.hpp"
#include "bifurcate/testbeds.hpp"

namespace bif {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Hat-function interpolation from nodes at `pos` (interior, increasing, zero
// boundary values at 0 and pi) onto the fine grid.
Mat hat_interpolation(int fine_N, const std::vector<double>& pos) {
  const double hf = grid_spacing(fine_N);
  const int nc = static_cast<int>(pos.size());
  Mat E = Mat::Zero(fine_N, nc);
  for (int j = 0; j < fine_N; ++j) {
    const double x = (j + 1) * hf;
    int k = 0;
    while (k < nc && pos[k] <= x) ++k;
    const double left = k == 0 ? 0.0 : pos[k - 1];
    const double right = k == nc ? M_PI : pos[k];
    const double w = (x - left) / (right - left);
    if (k > 0) E(j, k - 1) += 1.0 - w;
    if (k < nc) E(j, k) += w;
  }
  return E;
}

Mat block_lift(int lead, const Mat& E) {
  Mat M = Mat::Zero(lead + E.rows(), lead + E.cols());
  M.topLeftCorner(lead, lead).setIdentity();
  M.bottomRightCorner(E.rows(), E.cols()) = E;
  return M;
}

}  // namespace

ProjectionKind parse_projection_kind(const std::string& s) {
  if (s == "truncation") return ProjectionKind::Truncation;
  if (s == "injection") return ProjectionKind::Injection;
  if (s == "interpolation") return ProjectionKind::Interpolation;
  throw Error(ErrorKind::BadParams, "unknown projection kind '" + s + "'");
}

std::string projection_kind_name(ProjectionKind k) {
  switch (k) {
    case ProjectionKind::Truncation: return "truncation";
    case ProjectionKind::Injection: return "injection";
    default: return "interpolation";
  }
}

double projection_constant(const Mat& P_Z, const Mat& E, const Mat& Q) {
  const Mat I = Mat::Identity(E.rows(), E.rows());
  return op_norm((I - E * P_Z) * Q);
}

ProjectionPair projection_from_matrices(const Mat& P, const Mat& E, const Mat& resolved, double h_label) {
  if (P.rows() != E.cols() || P.cols() != E.rows() || resolved.rows() != E.rows())
    throw Error(ErrorKind::DimensionMismatch, "projection pair shapes");
  ProjectionPair pr;
  pr.P_W = P;
  pr.P_Z = P;
  pr.E_W = E;
  pr.h_label = h_label;
  pr.C_est = projection_constant(P, E, resolved);
  if (!(pr.C_est < 1.0 - 1e-12))
    throw Error(ErrorKind::InadmissibleProjection, "projection constant C_est >= 1");
  return pr;
}

ProjectionPair build_projection(int fine_N, int coarse_N, ProjectionKind kind, const Mat& resolved) {
  if (coarse_N < 1 || coarse_N > fine_N) throw Error(ErrorKind::BadParams, "need 1 <= coarse_N <= fine_N");
  Mat Q = resolved;
  if (Q.size() == 0) Q = tridiag_eigen_oracle(fine_N).vectors.leftCols(std::max(1, coarse_N / 4));
  const double hf = grid_spacing(fine_N), hc = grid_spacing(coarse_N);
  Mat P, E;
  if (coarse_N == fine_N) {
    P = E = Mat::Identity(fine_N, fine_N);
  } else if (kind == ProjectionKind::Truncation) {
    E = tridiag_eigen_oracle(fine_N).vectors.leftCols(coarse_N) * tridiag_eigen_oracle(coarse_N).vectors.transpose();
    P = E.transpose();
  } else if (kind == ProjectionKind::Interpolation) {
    std::vector<double> pos(coarse_N);
    for (int i = 0; i < coarse_N; ++i) pos[i] = (i + 1) * hc;
    E = std::sqrt(hf / hc) * hat_interpolation(fine_N, pos);
    P = solve(Mat(E.transpose() * E), Mat(E.transpose()));
  } else {
    std::vector<int> idx(coarse_N);
    std::vector<double> pos(coarse_N);
    for (int i = 0; i < coarse_N; ++i) {
      int j = static_cast<int>(std::lround((i + 1) * hc / hf)) - 1;
      j = std::clamp(j, i == 0 ? 0 : idx[i - 1] + 1, fine_N - coarse_N + i);
      idx[i] = j;
      pos[i] = (j + 1) * hf;
    }
    E = std::sqrt(hf / hc) * hat_interpolation(fine_N, pos);
    P = Mat::Zero(coarse_N, fine_N);
    for (int i = 0; i < coarse_N; ++i) P(i, idx[i]) = std::sqrt(hc / hf);
  }
  return projection_from_matrices(P, E, Q, hc);
}

ProblemDef approx_problem(const ProblemDef& p, const ProjectionPair& pair) {
  if (pair.E_W.rows() != p.N) throw Error(ErrorKind::DimensionMismatch, "approx_problem: pair does not match N");
  ProblemDef h;
  h.name = p.name + "_h";
  h.m = p.m;
  h.N = static_cast<int>(pair.E_W.cols());
  h.smoothness = p.smoothness;
  const Mat P = pair.P_Z, E = pair.E_W;
  const Mat lift = block_lift(p.m, E);
  h.F = [p, P, E](const Vec& l, const Vec& u) { return Vec(P * eval_F(p, PointLU{l, E * u})); };
  h.DF = [p, P, E, lift](const Vec& l, const Vec& u) { return Mat(P * jac_DF(p, PointLU{l, E * u}) * lift); };
  h.D2F = [p, P, E, lift](const Vec& l, const Vec& u, const Vec& d1, const Vec& d2) {
    return Vec(P * second_directional(p, PointLU{l, E * u}, lift * d1, lift * d2));
  };
  return h;
}

PointLU project_point(const ProjectionPair& pair, const PointLU& pt) { return PointLU{pt.lambda, pair.P_W * pt.u}; }
PointLU embed_point(const ProjectionPair& pair, const PointLU& pt) { return PointLU{pt.lambda, pair.E_W * pt.u}; }

Frames frames_h(const ProblemDef& p_h, const ProjectionPair& pair, const Frames& fr, const PointLU& anchor_h,
                bool projected_B) {
  Frames f;
  f.q = fr.q;
  f.n = fr.n;
  f.m = fr.m;
  f.N = p_h.N;
  f.a_bars = pair.P_Z * fr.a_bars;
  f.b_bars = pair.P_Z * fr.b_bars;
  f.basis_qm = fr.basis_qm;
  f.basis_n = fr.basis_n;
  const int qm = f.q + f.m;
  const Mat target_B = fr.B * block_lift(qm, pair.E_W);
  const Mat target_Bbar = fr.Bbar * block_lift(fr.n, pair.E_W);
  if (projected_B) {
    f.B = target_B;
    f.Bbar = target_Bbar;
  } else {
    const Mat K = smallest_right_vectors(DG_matrix(p_h, f, anchor_h), qm).transpose();
    f.B = procrustes_rotation(K, target_B) * K;
    const Mat Kb = smallest_right_vectors(H_matrix(p_h, f, anchor_h), f.n).transpose();
    f.Bbar = procrustes_rotation(Kb, target_Bbar) * Kb;
  }
  f.theta0 = f.B * x_of(f.q, anchor_h);
  return f;
}

Etas eta_estimates(const ProblemDef& p_fine, const ProblemDef& p_h, const ProjectionPair& pair, const Frames& fr,
                   const Frames& fr_h, const PointLU& exact_pt, const PointLU& anchor_h) {
  Etas e;
  const Mat& P = pair.P_Z;
  const Mat& E = pair.E_W;
  e.eta1 = op_norm(fr.B * block_lift(fr.q + fr.m, E) - fr_h.B);
  e.eta2 = op_norm(P * jac_DF(p_fine, exact_pt) * block_lift(p_fine.m, E) - jac_DF(p_h, anchor_h));
  e.eta3 = op_norm(fr.Bbar * block_lift(fr.n, E) - fr_h.Bbar);
  e.eta4 = op_norm(P * jac_DuF(p_fine, exact_pt) * E - jac_DuF(p_h, anchor_h));
  return e;
}

TransferReport transfer_check(const ProblemDef& p_fine, const ProblemDef& p_h, const ProjectionPair& pair,
                              const Frames& fr, const Frames& fr_h, const PointLU& exact_pt, const PointLU& anchor_h) {
  TransferReport t;
  t.eta = eta_estimates(p_fine, p_h, pair, fr, fr_h, exact_pt, anchor_h);
  const double C = pair.C_est;
  const double J = 1.0;
  double sum_a = 0.0, sum_b = 0.0;
  for (int i = 0; i < fr.a_bars.cols(); ++i) sum_a += fr.a_bars.col(i).norm();
  for (int k = 0; k < fr.b_bars.cols(); ++k) sum_b += fr.b_bars.col(k).norm();

  t.inv_norm_exact_G = 1.0 / sigma_min(PhiG_matrix(p_fine, fr, exact_pt));
  t.q_G1 = C * (op_norm(jac_DF(p_fine, exact_pt)) + sum_a + J);
  t.q_G2 = t.eta.eta1 + t.eta.eta2 + C * J;
  t.q_G = (t.q_G1 + t.q_G2) * t.inv_norm_exact_G;
  t.inv_norm_bound_G = t.q_G < 1.0 ? t.inv_norm_exact_G / (1.0 - t.q_G) : kInf;
  const double sG = sigma_min(PhiG_matrix(p_h, fr_h, anchor_h));
  t.inv_norm_actual_G = sG > 0 ? 1.0 / sG : kInf;

  t.inv_norm_exact_H = 1.0 / sigma_min(PhiH_matrix(p_fine, fr, exact_pt));
  t.q_H1 = C * (op_norm(jac_DuF(p_fine, exact_pt)) + sum_b + J);
  t.q_H2 = t.eta.eta3 + t.eta.eta4 + C * J;
  t.q_H = (t.q_H1 + t.q_H2) * t.inv_norm_exact_H;
  t.inv_norm_bound_H = t.q_H < 1.0 ? t.inv_norm_exact_H / (1.0 - t.q_H) : kInf;
  const double sH = sigma_min(PhiH_matrix(p_h, fr_h, anchor_h));
  t.inv_norm_actual_H = sH > 0 ? 1.0 / sH : kInf;

  t.admissible = t.q_G < 1.0 && t.q_H < 1.0;
  if (t.q_G < 1.0 && !(t.inv_norm_actual_G <= t.inv_norm_bound_G + 1e-9)) t.bounds_hold = false;
  if (t.q_H < 1.0 && !(t.inv_norm_actual_H <= t.inv_norm_bound_H + 1e-9)) t.bounds_hold = false;
  return t;
}

ExtState embed_state(const ProjectionPair& pair, const ExtState& s_h, const ExtLayout& exact) {
  const Mat& E = pair.E_W;
  const ExtLayout& lh = s_h.lay;
  ExtState s = ExtState::zeros(exact);
  const Mat LX = block_lift(lh.q + lh.m, E);
  const Mat LZ = block_lift(lh.n, E);
  s.set_x(LX * s_h.x());
  for (int i = 0; i < lh.q + lh.m; ++i) s.set_y(i, LX * s_h.y(i));
  for (int k = 0; k < lh.n; ++k) s.set_z(k, LZ * s_h.z(k));
  return s;
}

double embed_state_norm(const ProjectionPair& pair, const ExtLayout&) { return std::max(1.0, op_norm(pair.E_W)); }

namespace {

template <typename F>
bool strictly_decreasing(const std::vector<StudyRow>& rows, F get) {
  if (rows.size() < 2) return true;
  for (size_t i = 1; i < rows.size(); ++i)
    if (!(get(rows[i]) < get(rows[i - 1]))) return false;
  return true;
}

}  // namespace

StudyTable h_study(const ProblemDef& p_fine, const std::vector<StudyCase>& cases, const Frames& fr,
                   const PointLU& exact_pt, const StudyOptions& opts) {
  StudyTable t;
  const ExtState s0 = build_extended_solution(p_fine, fr, exact_pt);
  for (const StudyCase& sc : cases) {
    StudyRow row;
    row.h_label = sc.pair.h_label;
    row.N_h = sc.p_h.N;
    row.C_est = sc.pair.C_est;
    const PointLU anchor_h = project_point(sc.pair, exact_pt);
    const Frames fh = frames_h(sc.p_h, sc.pair, fr, anchor_h, opts.projected_B);
    row.transfer = transfer_check(p_fine, sc.p_h, sc.pair, fr, fh, exact_pt, anchor_h);
    row.eta = row.transfer.eta;
    row.q_G = row.transfer.q_G;
    row.q_H = row.transfer.q_H;
    const ExtState sa = anchor_state(sc.p_h, fh, anchor_h);
    row.delta_h = eval_S(sc.p_h, fh, sa).norm();
    row.gap = kInf;
    row.bound = kInf;
    try {
      const RecoveryResult rec = recover(sc.p_h, fh, anchor_h, opts.recovery);
      row.recovered = rec.converged;
      row.rho_norm = rec.rho.norm();
      row.lambda0h = rec.point.lambda(0);
      const ClassifyReport cr = classify(shifted(sc.p_h, rec.rho), rec.point);
      row.type_n = cr.n;
      row.type_q = cr.q;
      row.gap = (exact_pt.stacked() - embed_point(sc.pair, rec.point).stacked()).norm();
      try {
        const double eb = error_bound(sc.p_h, rec.frames, rec.rho, rec.ext_state, sa, opts.samples, opts.seed);
        row.bound = (s0.data - embed_state(sc.pair, sa, s0.lay).data).norm() + embed_state_norm(sc.pair, sa.lay) * eb;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::ConditionViolated) throw;
      }
    } catch (const Error& e) {
      row.error = error_name(e.kind());
    }
    t.rows.push_back(std::move(row));
  }
  t.eta2_decreasing = strictly_decreasing(t.rows, [](const StudyRow& r) { return r.eta.eta2; });
  t.eta4_decreasing = strictly_decreasing(t.rows, [](const StudyRow& r) { return r.eta.eta4; });
  t.delta_decreasing = strictly_decreasing(t.rows, [](const StudyRow& r) { return r.delta_h; });
  return t;
}

StudyTable ci_h_study(int fine_N, const std::vector<int>& coarse, ProjectionKind kind, const StudyOptions& opts) {
  const RegistryEntry fine = registry("chafee_infante", {{"N", std::to_string(fine_N)}, {"form", "compact"}});
  const PointLU exact = fine.truth->point;
  const Frames fr = choose_frames(fine.problem, exact);
  std::vector<int> sorted = coarse;
  std::sort(sorted.begin(), sorted.end());
  std::vector<StudyCase> cases;
  for (int c : sorted) {
    StudyCase sc;
    sc.pair = build_projection(fine_N, c, kind);
    sc.p_h = registry("chafee_infante", {{"N", std::to_string(c)}, {"form", "compact"}}).problem;
    cases.push_back(std::move(sc));
  }
  return h_study(fine.problem, cases, fr, exact, opts);
}

std::string study_csv(const StudyTable& t) {
  std::ostringstream os;
  os << "h_label,C_est,eta1,eta2,eta3,eta4,qG,qH,delta_h,rho_norm,lambda0h,gap,bound,type_n,type_q\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const StudyRow& r : t.rows) {
    os << num(r.h_label) << ',' << num(r.C_est) << ',' << num(r.eta.eta1) << ',' << num(r.eta.eta2) << ','
       << num(r.eta.eta3) << ',' << num(r.eta.eta4) << ',' << num(r.q_G) << ',' << num(r.q_H) << ','
       << num(r.delta_h) << ',' << num(r.rho_norm) << ',' << num(r.lambda0h) << ',' << num(r.gap) << ','
       << num(r.bound) << ',' << r.type_n << ',' << r.type_q << '\n';
  }
  return os.str();
}

}  // namespace bif
