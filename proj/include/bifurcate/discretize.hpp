#pragma once

#include <string>
#include <vector>

#include "bifurcate/certify.hpp"

namespace bif {

enum class ProjectionKind { Truncation, Injection, Interpolation };

ProjectionKind parse_projection_kind(const std::string& s);
std::string projection_kind_name(ProjectionKind k);

struct ProjectionPair {
  Mat P_W;  // N_h x N
  Mat P_Z;  // N_h x N
  Mat E_W;  // N x N_h
  double C_est = 0.0;
  double h_label = 0.0;
};

// C = ||(I - E P_Z) Q|| over the orthonormal columns of Q.
double projection_constant(const Mat& P_Z, const Mat& E, const Mat& Q);

// Coordinates are L2-scaled grid values on (0, pi). Truncation goes through
// the discrete sine transform and keeps the first coarse_N modes. The constant C_est is
// measured on the first max(1, coarse_N/4) Dirichlet sine modes of the fine
// grid unless `resolved` supplies another orthonormal basis.
ProjectionPair build_projection(int fine_N, int coarse_N, ProjectionKind kind, const Mat& resolved = Mat());
ProjectionPair projection_from_matrices(const Mat& P, const Mat& E, const Mat& resolved, double h_label);

// F_h(lambda, u_h) = P_Z F(lambda, E u_h).
ProblemDef approx_problem(const ProblemDef& p_fine, const ProjectionPair& pair);

// Approximate frames at anchor_h: a_h = P_Z a, b_h = P_Z b, and borderings
// taken from the smallest right singular vectors of DG_h and H_h, rotated
// onto the transported exact borderings. With `projected_B` the transported
// borderings themselves are used.
Frames frames_h(const ProblemDef& p_h, const ProjectionPair& pair, const Frames& fr, const PointLU& anchor_h,
                bool projected_B = false);

struct Etas {
  double eta1 = 0.0, eta2 = 0.0, eta3 = 0.0, eta4 = 0.0;
};

Etas eta_estimates(const ProblemDef& p_fine, const ProblemDef& p_h, const ProjectionPair& pair, const Frames& fr,
                   const Frames& fr_h, const PointLU& exact_pt, const PointLU& anchor_h);

struct TransferReport {
  Etas eta;
  double q_G1 = 0.0, q_G2 = 0.0, q_G = 0.0;
  double q_H1 = 0.0, q_H2 = 0.0, q_H = 0.0;
  double inv_norm_exact_G = 0.0, inv_norm_bound_G = 0.0, inv_norm_actual_G = 0.0;
  double inv_norm_exact_H = 0.0, inv_norm_bound_H = 0.0, inv_norm_actual_H = 0.0;
  bool admissible = false;
  bool bounds_hold = true;
};

TransferReport transfer_check(const ProblemDef& p_fine, const ProblemDef& p_h, const ProjectionPair& pair,
                              const Frames& fr, const Frames& fr_h, const PointLU& exact_pt, const PointLU& anchor_h);

PointLU project_point(const ProjectionPair& pair, const PointLU& pt);
PointLU embed_point(const ProjectionPair& pair, const PointLU& pt);
// Embedding of approximate extended states into the exact layout.
ExtState embed_state(const ProjectionPair& pair, const ExtState& s_h, const ExtLayout& exact);
double embed_state_norm(const ProjectionPair& pair, const ExtLayout& lay_h);

struct StudyCase {
  ProjectionPair pair;
  ProblemDef p_h;
};

struct StudyOptions {
  bool projected_B = false;
  RecoveryOptions recovery;
  int samples = 16;
  unsigned seed = 7;
};

struct StudyRow {
  double h_label = 0.0;
  int N_h = 0;
  double C_est = 0.0;
  Etas eta;
  double q_G = 0.0, q_H = 0.0;
  TransferReport transfer;
  double delta_h = 0.0;
  double rho_norm = 0.0;
  double lambda0h = 0.0;
  double gap = 0.0;
  double bound = 0.0;
  int type_n = 0, type_q = 0;
  bool recovered = false;
  std::string error;
};

struct StudyTable {
  std::vector<StudyRow> rows;
  bool eta2_decreasing = false;
  bool eta4_decreasing = false;
  bool delta_decreasing = false;
};

StudyTable h_study(const ProblemDef& p_fine, const std::vector<StudyCase>& cases, const Frames& fr,
                   const PointLU& exact_pt, const StudyOptions& opts = {});

// Chafee-Infante study in compact scaled form: the native coarse problems are
// the approximate problems; the exact point is (lambda_1, 0) on the fine grid.
StudyTable ci_h_study(int fine_N, const std::vector<int>& coarse, ProjectionKind kind, const StudyOptions& opts = {});

std::string study_csv(const StudyTable& t);

}  // namespace bif
