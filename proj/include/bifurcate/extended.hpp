#pragma once

#include <optional>
#include <utility>

#include "bifurcate/problem.hpp"

namespace bif {

struct Frames {
  int q = 0, n = 0, m = 1, N = 1;
  Mat a_bars;    // N x q
  Mat b_bars;    // N x n
  Mat B;         // (q+m) x (q+m+N)
  Mat Bbar;      // n x (n+N)
  Vec theta0;    // q+m
  Mat basis_qm;  // columns are the basis vectors delta_i of R^{q+m}
  Mat basis_n;   // columns are delta_k of R^n
  bool rank_ambiguity = false;

  int dim_x() const { return q + m + N; }
  int dim_z() const { return n + N; }
};

// Offsets of s = (x, y_1..y_{q+m}, z_1..z_n); also the row layout of S(s).
struct ExtLayout {
  int q = 0, m = 1, N = 1, n = 0;
  static ExtLayout of(const Frames& f) { return ExtLayout{f.q, f.m, f.N, f.n}; }
  int dim_x() const { return q + m + N; }
  int dim_z() const { return n + N; }
  int off_y(int i) const { return dim_x() * (1 + i); }
  int off_z(int k) const { return dim_x() * (1 + q + m) + dim_z() * k; }
  int total() const { return dim_x() * (1 + q + m) + dim_z() * n; }
};

struct ExtState {
  ExtLayout lay;
  Vec data;

  static ExtState zeros(const ExtLayout& l) { return ExtState{l, Vec::Zero(l.total())}; }
  static ExtState unflatten(const ExtLayout& l, const Vec& v);
  const Vec& flatten() const { return data; }

  Vec x() const { return data.head(lay.dim_x()); }
  Vec y(int i) const { return data.segment(lay.off_y(i), lay.dim_x()); }
  Vec z(int k) const { return data.segment(lay.off_z(k), lay.dim_z()); }
  void set_x(const Vec& v) { data.head(lay.dim_x()) = v; }
  void set_y(int i, const Vec& v) { data.segment(lay.off_y(i), lay.dim_x()) = v; }
  void set_z(int k, const Vec& v) { data.segment(lay.off_z(k), lay.dim_z()) = v; }

  PointLU point() const;
  Vec f() const { return data.head(lay.q); }
  Vec g(int i) const { return y(i).head(lay.q); }
  Vec mu_w(int i) const { return y(i).tail(lay.m + lay.N); }
  Vec e(int k) const { return z(k).head(lay.n); }
  Vec v(int k) const { return z(k).tail(lay.N); }
  // max |f|, |g_i|, |e_k|
  double zero_components_max() const;
};

Vec x_of(int q, const PointLU& pt);

struct TypeNQ {
  int n = 1;
  int q = 1;
};

// Frames at an anchor. Without `forced`, q and n come from rank decisions at
// rtol; with it, the cokernel directions are the q (resp. n) left singular
// vectors of smallest singular value, which lets frames be built at regular
// anchors near a suspected bifurcation.
Frames choose_frames(const ProblemDef& p, const PointLU& anchor, double rtol = kRankTol,
                     std::optional<TypeNQ> forced = std::nullopt, bool require_n = true);

// Borderings B, B-bar for given cokernel frames: orthonormal kernel bases of
// DG and H at the anchor.
Frames frames_from_vectors(const ProblemDef& p, const PointLU& anchor, const Mat& a_bars, const Mat& b_bars);

Mat DG_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt);
Mat H_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt);
Mat PhiG_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt);
Mat PhiH_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt);
// Matrix of phi' -> Phi(x, phi'), square on the extended dimension.
Mat Phi_matrix(const ProblemDef& p, const Frames& fr, const PointLU& pt);
// x-derivative of Phi(x, phi') at fixed phi', as a map on x-bar.
Mat Phi_x_derivative(const ProblemDef& p, const Frames& fr, const PointLU& pt, const ExtState& phi);

Vec eval_G(const ProblemDef& p, const Frames& fr, const Vec& x);
Vec eval_H(const ProblemDef& p, const Frames& fr, const PointLU& pt, const Vec& z);
Vec eval_Psi(const ProblemDef& p, const Frames& fr, const Vec& x);
Vec eval_Phi(const ProblemDef& p, const Frames& fr, const Vec& x, const ExtState& phi);
Vec eval_S(const ProblemDef& p, const Frames& fr, const ExtState& s);
Mat jac_S(const ProblemDef& p, const Frames& fr, const ExtState& s);

// sigma_min of [B; DG(x_anchor)] and [B-bar; H(anchor, .)].
std::pair<double, double> kernel_intersection_margins(const ProblemDef& p, const Frames& fr, const PointLU& anchor);

}  // namespace bif
