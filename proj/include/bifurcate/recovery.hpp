#pragma once

#include <optional>
#include <vector>

#include "bifurcate/classify.hpp"

namespace bif {

struct RecoveryOptions {
  int max_iter = 50;
  double step_tol = 1e-12;
  double residual_tol = 1e-10;
  bool line_search = true;
  double alpha = 1e-3;
  double refresh_cond = 1e8;
  double rtol = kRankTol;
  VerifyTolerances verify;
};

void validate(const RecoveryOptions& o);

struct RecoveryResult {
  PointLU point;
  Vec rho;
  Vec theta0_shifted;
  ExtState ext_state;
  Frames frames;
  KernelBases kernels;
  Vec mu_w_prime;  // functional mode only
  int iterations = 0;
  int frame_refreshes = 0;
  std::vector<double> residual_history;
  bool converged = false;
  bool ball_checked = false;
  bool within_ball = false;
  double distance_to_anchor_state = 0.0;
  VerifyReport verify;
};

struct KernelBlocks {
  std::vector<Vec> y;
  std::vector<Vec> z;
};

KernelBlocks solve_kernel_blocks(const ProblemDef& p, const Frames& fr, const PointLU& pt);
Vec singular_residual(const ProblemDef& p, const Frames& fr, const PointLU& pt);

// Extended state at the anchor: x = (0, anchor), kernel blocks from the
// linear solves, slack components g_i, e_k set to zero.
ExtState anchor_state(const ProblemDef& p, const Frames& fr, const PointLU& anchor);

RecoveryResult recover(const ProblemDef& p, const Frames& fr, const PointLU& anchor, const RecoveryOptions& opts = {},
                       std::optional<double> a_star = std::nullopt);
RecoveryResult recover_functional(const ProblemDef& p, const Frames& fr, const PointLU& anchor,
                                  const RecoveryOptions& opts = {});

struct BranchPoint {
  double s = 0.0;
  Vec lambda;
  Vec u;
};

struct Branch {
  int tangent_index = 0;
  int sign = 1;
  Vec tangent;
  bool starts_at_point = false;  // the start point solves F - rho = 0 and opens the branch
  std::vector<BranchPoint> points;
};

struct TraceResult {
  PointLU start;
  std::vector<Vec> tangents;
  std::vector<Branch> branches;  // two per tangent, + then -
  double start_residual = 0.0;
};

TraceResult trace_branches(const ProblemDef& p, const Vec& rho, const PointLU& point, int steps, double ds);

// Smallest distance between the traced pieces of the first tangent's branch
// and the second tangent's branch.
double crossing_gap(const TraceResult& t);

double segment_distance(const Vec& p0, const Vec& p1, const Vec& q0, const Vec& q1);

}  // namespace bif
