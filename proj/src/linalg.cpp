#include "bifurcate/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace bif {

const char* error_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::SingularOperator: return "SingularOperator";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EvalFailure: return "EvalFailure";
    case ErrorKind::DegenerateAnchor: return "DegenerateAnchor";
    case ErrorKind::SolutionResidualTooLarge: return "SolutionResidualTooLarge";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::DivergedOutsideTrustRegion: return "DivergedOutsideTrustRegion";
    case ErrorKind::ConditionViolated: return "ConditionViolated";
    case ErrorKind::InadmissibleProjection: return "InadmissibleProjection";
    case ErrorKind::ContinuationStall: return "ContinuationStall";
    case ErrorKind::UnknownName: return "UnknownName";
    case ErrorKind::BadParams: return "BadParams";
    case ErrorKind::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

void require_finite(const Mat& op, const char* where) {
  if (!op.allFinite()) throw Error(ErrorKind::NonFinite, where);
}

void require_finite(const Vec& v, const char* where) {
  if (!v.allFinite()) throw Error(ErrorKind::NonFinite, where);
}

namespace {

// Jacobi is the most accurate choice for the small operators that dominate
// here; divide-and-conquer takes over once the matrix gets large.
constexpr Eigen::Index kJacobiLimit = 96;

SvdResult full_svd(const Mat& op) {
  SvdResult r;
  const auto rows = op.rows(), cols = op.cols();
  if (rows == 0 || cols == 0) {
    r.sigma = Vec(0);
    r.U = Mat::Identity(rows, rows);
    r.V = Mat::Identity(cols, cols);
    return r;
  }
  if (std::max(rows, cols) <= kJacobiLimit) {
    Eigen::JacobiSVD<Mat> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r.sigma = svd.singularValues();
    r.U = svd.matrixU();
    r.V = svd.matrixV();
  } else {
    Eigen::BDCSVD<Mat> svd(op, Eigen::ComputeFullU | Eigen::ComputeFullV);
    r.sigma = svd.singularValues();
    r.U = svd.matrixU();
    r.V = svd.matrixV();
  }
  return r;
}

}  // namespace

SvdResult svd_analysis(const Mat& op) {
  require_finite(op, "svd_analysis");
  return full_svd(op);
}

Vec singular_values(const Mat& op) {
  require_finite(op, "singular_values");
  if (op.rows() == 0 || op.cols() == 0) return Vec(0);
  if (std::max(op.rows(), op.cols()) <= kJacobiLimit) {
    Eigen::JacobiSVD<Mat> svd(op);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Mat> svd(op);
  return svd.singularValues();
}

int numerical_rank(const Vec& sigma, double rtol) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return 0;
  const double thr = rtol * sigma(0);
  int r = 0;
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > thr) ++r;
  return r;
}

bool rank_ambiguous(const Vec& sigma, double rtol) {
  if (sigma.size() == 0 || sigma(0) == 0.0) return false;
  const double thr = rtol * sigma(0);
  for (Eigen::Index i = 0; i < sigma.size(); ++i)
    if (sigma(i) > thr / 10.0 && sigma(i) < thr * 10.0) return true;
  return false;
}

Mat solve(const Mat& op, const Mat& rhs, SolveMode mode, double rtol) {
  if (rhs.rows() != op.rows()) throw Error(ErrorKind::DimensionMismatch, "solve: rhs rows");
  require_finite(rhs, "solve rhs");
  SvdResult s = svd_analysis(op);
  const int k = static_cast<int>(s.sigma.size());
  if (mode == SolveMode::Exact) {
    if (op.rows() != op.cols()) throw Error(ErrorKind::DimensionMismatch, "solve: exact mode needs a square operator");
    if (k == 0) return Mat(0, rhs.cols());
    if (s.sigma(k - 1) <= rtol * s.sigma(0))
      throw Error(ErrorKind::SingularOperator, "solve: sigma_min below rank tolerance");
    Mat t = s.U.transpose() * rhs;
    for (int i = 0; i < k; ++i) t.row(i) /= s.sigma(i);
    return s.V * t;
  }
  const int r = numerical_rank(s.sigma, rtol);
  Mat t = s.U.leftCols(r).transpose() * rhs;
  for (int i = 0; i < r; ++i) t.row(i) /= s.sigma(i);
  return s.V.leftCols(r) * t;
}

Vec solve(const Mat& op, const Vec& rhs, SolveMode mode, double rtol) {
  Mat r = solve(op, Mat(rhs), mode, rtol);
  return r.col(0);
}

double inverse_norm(const Mat& op, double rtol) {
  if (op.rows() != op.cols()) throw Error(ErrorKind::DimensionMismatch, "inverse_norm: not square");
  Vec s = singular_values(op);
  if (s.size() == 0 || s(s.size() - 1) <= rtol * s(0))
    throw Error(ErrorKind::SingularOperator, "inverse_norm: sigma_min below rank tolerance");
  return 1.0 / s(s.size() - 1);
}

// Largest eigenvalue of the smaller Gram matrix: the top singular value comes
// out to full relative precision at a fraction of the cost of an SVD.
double op_norm(const Mat& op) {
  if (op.size() == 0) return 0.0;
  const Mat G = op.rows() >= op.cols() ? Mat(op.transpose() * op) : Mat(op * op.transpose());
  Eigen::SelfAdjointEigenSolver<Mat> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double sigma_min(const Mat& op) {
  Vec s = singular_values(op);
  if (s.size() == 0) return 0.0;
  // a wide or tall operator still has min(rows, cols) singular values; for
  // injectivity questions on tall matrices this is what callers want
  return s(s.size() - 1);
}

double condition_number(const Mat& op) {
  Vec s = singular_values(op);
  if (s.size() == 0) return 1.0;
  const double lo = s(s.size() - 1);
  return lo == 0.0 ? std::numeric_limits<double>::infinity() : s(0) / lo;
}

std::vector<Vec> kernel_basis(const Mat& op, double rtol) {
  SvdResult s = svd_analysis(op);
  const int r = numerical_rank(s.sigma, rtol);
  std::vector<Vec> out;
  for (Eigen::Index j = r; j < op.cols(); ++j) out.push_back(s.V.col(j));
  return out;
}

std::vector<Vec> cokernel_basis(const Mat& op, double rtol) {
  SvdResult s = svd_analysis(op);
  const int r = numerical_rank(s.sigma, rtol);
  std::vector<Vec> out;
  for (Eigen::Index j = r; j < op.rows(); ++j) out.push_back(s.U.col(j));
  return out;
}

Mat smallest_right_vectors(const Mat& op, int count) {
  SvdResult s = svd_analysis(op);
  return s.V.rightCols(count);
}

Mat smallest_left_vectors(const Mat& op, int count) {
  SvdResult s = svd_analysis(op);
  return s.U.rightCols(count);
}

Mat columns(const std::vector<Vec>& vs, int dim) {
  Mat m(dim, static_cast<Eigen::Index>(vs.size()));
  for (size_t j = 0; j < vs.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = vs[j];
  return m;
}

std::vector<Vec> split_columns(const Mat& m) {
  std::vector<Vec> out;
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.push_back(m.col(j));
  return out;
}

double product_norm1(const Vec& v, const std::vector<int>& block_sizes) {
  double total = 0.0;
  Eigen::Index off = 0;
  for (int b : block_sizes) {
    total += v.segment(off, b).norm();
    off += b;
  }
  if (off != v.size()) throw Error(ErrorKind::DimensionMismatch, "product_norm1: block sizes");
  return total;
}

Mat procrustes_rotation(const Mat& X, const Mat& Y) {
  Mat C = Y * X.transpose();
  SvdResult s = svd_analysis(C);
  return s.U * s.V.transpose();
}

}  // namespace bif
