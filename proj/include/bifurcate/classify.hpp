#pragma once

#include <string>
#include <vector>

#include "bifurcate/extended.hpp"

namespace bif {

struct ClassifyReport {
  int n = 0;
  int q = 0;
  bool bifurcation = false;
  Vec sigma_DF, sigma_DuF;
  std::vector<Vec> kernel_DF, kernel_DuF, cokernel_DF, cokernel_DuF;
  double rtol_used = kRankTol;
  double residual = 0.0;
  double tol_res = 0.0;
  bool rank_ambiguity = false;
  std::string fredholm_index_note;
};

struct VerifyTolerances {
  double tol_res = 1e-8;
  double tol_rank = 1e-8;
  double tol_zero = 1e-7;
};

struct VerifyReport {
  double residual_S = 0.0;
  double sigma_min_DS = 0.0;
  double zero_components_max = 0.0;
  bool passes = false;
  TypeNQ implied_type;
};

// Residual tolerance 1e-8 (1 + scale), scale being the largest entry of DF.
double default_tol_res(const ProblemDef& p, const PointLU& pt);

ClassifyReport classify(const ProblemDef& p, const PointLU& pt, double rtol = kRankTol, double tol_res = -1.0);

ExtState build_extended_solution(const ProblemDef& p, const Frames& fr, const PointLU& pt);
VerifyReport verify_extended(const ProblemDef& p, const Frames& fr, const ExtState& s0,
                             const VerifyTolerances& tols = {});

struct KernelBases {
  std::vector<Vec> DF;   // (mu_i, w_i), i = 1..q+m
  std::vector<Vec> DuF;  // v_k, k = 1..n
};
KernelBases kernel_from_extended(const ExtState& s0);

struct SpotcheckReport {
  TypeNQ base;
  std::vector<TypeNQ> transformed;
  bool all_equal = true;
  int trials = 0;
  unsigned seed = 0;
};

// Invertible linear change of variables phi0(lambda,u) = (Lambda lambda, A u + C lambda).
struct LinearChange {
  Mat Lambda, A, C;
};
ProblemDef transform_problem(const ProblemDef& p, const LinearChange& t);
PointLU transform_point(const PointLU& pt, const LinearChange& t);
LinearChange random_change(int m, int N, unsigned seed);

SpotcheckReport equivalence_spotcheck(const ProblemDef& p, const PointLU& pt, unsigned seed, int trials,
                                      double rtol = kRankTol);

}  // namespace bif
