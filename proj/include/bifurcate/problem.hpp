#pragma once

#include <functional>
#include <string>
#include <vector>

#include "bifurcate/linalg.hpp"

namespace bif {

struct PointLU {
  Vec lambda;
  Vec u;

  Vec stacked() const;
  static PointLU from_stacked(const Vec& z, int m);
};

// F : R^m x R^N -> R^N. Derivative evaluators are optional; missing ones fall
// back to finite differences. Columns of DF are ordered lambda first, then u.
struct ProblemDef {
  std::string name;
  int m = 1;
  int N = 1;
  int smoothness = 3;
  std::function<Vec(const Vec& lambda, const Vec& u)> F;
  std::function<Mat(const Vec& lambda, const Vec& u)> DF;
  std::function<Vec(const Vec& lambda, const Vec& u, const Vec& d1, const Vec& d2)> D2F;

  bool has_analytic() const { return static_cast<bool>(DF) && static_cast<bool>(D2F); }
};

Vec eval_F(const ProblemDef& p, const PointLU& pt);
Mat jac_DF(const ProblemDef& p, const PointLU& pt);
Mat jac_DuF(const ProblemDef& p, const PointLU& pt);
Vec second_directional(const ProblemDef& p, const PointLU& pt, const Vec& d1, const Vec& d2);

// Finite-difference variants, always computed from F alone.
Mat fd_DF(const ProblemDef& p, const PointLU& pt);
Vec fd_second_directional(const ProblemDef& p, const PointLU& pt, const Vec& d1, const Vec& d2);

// Matrix of (lambda_bar, u_bar) -> D^2F(pt)(d1, (lambda_bar, u_bar)).
Mat second_matrix(const ProblemDef& p, const PointLU& pt, const Vec& d1);

struct FdReport {
  double max_rel_DF = 0.0;
  double max_rel_DuF = 0.0;
  double max_rel_D2F = 0.0;
  int points = 0;
};

FdReport fd_check(const ProblemDef& p, const std::vector<PointLU>& pts, unsigned seed = 1);

// F - rho for a constant rho; derivatives are shared with the original.
ProblemDef shifted(const ProblemDef& p, const Vec& rho);

// F~(lambda,u) = F(lambda,u) - DF(lambda,u) d, with d a fixed vector in R^{m+N}.
ProblemDef modified_by_direction(const ProblemDef& p, const Vec& d);

}  // namespace bif
