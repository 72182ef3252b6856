#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bifurcate/errors.hpp"

namespace bif {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr double kRankTol = 1e-6;

struct SvdResult {
  Vec sigma;  // nonincreasing, length min(rows, cols)
  Mat U;      // rows x rows
  Mat V;      // cols x cols
};

enum class SolveMode { Exact, LeastSquares };

void require_finite(const Mat& op, const char* where);
void require_finite(const Vec& v, const char* where);

SvdResult svd_analysis(const Mat& op);
Vec singular_values(const Mat& op);

// Number of singular values strictly above rtol * sigma_max. A value sitting
// exactly on the threshold counts as zero.
int numerical_rank(const Vec& sigma, double rtol = kRankTol);
bool rank_ambiguous(const Vec& sigma, double rtol = kRankTol);

Vec solve(const Mat& op, const Vec& rhs, SolveMode mode = SolveMode::Exact, double rtol = kRankTol);
Mat solve(const Mat& op, const Mat& rhs, SolveMode mode = SolveMode::Exact, double rtol = kRankTol);

double inverse_norm(const Mat& op, double rtol = kRankTol);
double op_norm(const Mat& op);
double sigma_min(const Mat& op);
double condition_number(const Mat& op);

std::vector<Vec> kernel_basis(const Mat& op, double rtol = kRankTol);
std::vector<Vec> cokernel_basis(const Mat& op, double rtol = kRankTol);

// The `count` right (resp. left) singular vectors of smallest singular value,
// regardless of any threshold.
Mat smallest_right_vectors(const Mat& op, int count);
Mat smallest_left_vectors(const Mat& op, int count);

Mat columns(const std::vector<Vec>& vs, int dim);
std::vector<Vec> split_columns(const Mat& m);

// Sum of Euclidean norms of consecutive blocks (the 1-norm on a product space).
double product_norm1(const Vec& v, const std::vector<int>& block_sizes);

// Orthogonal Procrustes: rotation R minimising ||R*X - Y||_F, X and Y of equal shape.
Mat procrustes_rotation(const Mat& X, const Mat& Y);

}  // namespace bif
