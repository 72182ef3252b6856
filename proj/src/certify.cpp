#include "bifurcate/certify.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "bifurcate/errors.hpp"

namespace bif {

RadiiMode parse_radii_mode(const std::string& s) {
  if (s == "h_uniform") return RadiiMode::HUniform;
  if (s == "general") return RadiiMode::General;
  throw Error(ErrorKind::BadParams, "unknown radii_mode '" + s + "'");
}

std::string radii_mode_name(RadiiMode m) { return m == RadiiMode::HUniform ? "h_uniform" : "general"; }

std::vector<Vec> unit_ball_samples(int dim, int samples, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Vec> out;
  out.reserve(samples);
  for (int j = 0; j < samples; ++j) {
    Vec v(dim);
    for (int i = 0; i < dim; ++i) v(i) = normal(gen);
    const double r = std::pow(unif(gen), 1.0 / dim);
    const double nv = v.norm();
    out.push_back(nv > 0 ? Vec(v * (r / nv)) : Vec(Vec::Zero(dim)));
  }
  return out;
}

std::vector<Vec> ball_probe_points(int dim, int samples, unsigned seed, int axis_dims) {
  std::vector<Vec> pts = unit_ball_samples(dim, samples, seed);
  const int axes = axis_dims < 0 ? dim : std::min(axis_dims, dim);
  for (int j = 0; j < axes; ++j) {
    for (double sgn : {1.0, -1.0}) {
      Vec e = Vec::Zero(dim);
      e(j) = sgn;
      pts.push_back(e);
    }
  }
  return pts;
}

double gamma_of(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor) {
  const double smin = sigma_min(jac_S(p, fr, s_anchor));
  if (!(smin > 0)) throw Error(ErrorKind::SingularOperator, "DS is singular at the anchor");
  return 1.0 / smin;
}

double kappa_of(double gamma) { return gamma; }

double lipschitz_LS(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double radius, int samples,
                    unsigned seed) {
  if (!(radius > 0) || samples < 1) throw Error(ErrorKind::BadParams, "lipschitz_LS needs radius > 0 and samples >= 1");
  const Mat DS0 = jac_S(p, fr, s_anchor);
  double best = 0.0;
  for (const Vec& xi : ball_probe_points(s_anchor.lay.total(), samples, seed, s_anchor.lay.dim_x())) {
    const ExtState s{s_anchor.lay, s_anchor.data + radius * xi};
    best = std::max(best, op_norm(DS0 - jac_S(p, fr, s)));
  }
  return best;
}

namespace {

// Difference operator at (s, phi') against the anchor (s0, 0), acting on
// (s_bar, phi_bar').
Mat upsilon(const ProblemDef& p, const Frames& fr, const Mat& DS0, const Mat& Phi0, const ExtState& s,
            const ExtState& phi) {
  const int T = s.lay.total();
  Mat Y = Mat::Zero(T, 2 * T);
  const PointLU pt = s.point();
  Y.leftCols(T) = 0.5 * (DS0 - jac_S(p, fr, s));
  Y.leftCols(s.lay.dim_x()) += 0.5 * Phi_x_derivative(p, fr, pt, phi);
  Y.rightCols(T) = -0.5 * (Phi0 - Phi_matrix(p, fr, pt));
  return Y;
}

}  // namespace

double lipschitz_L(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double radius, int samples,
                   unsigned seed) {
  if (!(radius > 0) || samples < 1) throw Error(ErrorKind::BadParams, "lipschitz_L needs radius > 0 and samples >= 1");
  const int T = s_anchor.lay.total();
  const Mat DS0 = jac_S(p, fr, s_anchor);
  const Mat Phi0 = Phi_matrix(p, fr, s_anchor.point());
  const auto xs = ball_probe_points(T, samples, seed, s_anchor.lay.dim_x());
  const auto phis = ball_probe_points(T, samples, seed + 1, s_anchor.lay.dim_x());
  const ExtState zero = ExtState::zeros(s_anchor.lay);
  double best = 0.0;
  for (size_t j = 0; j < xs.size(); ++j) {
    const ExtState s{s_anchor.lay, s_anchor.data + radius * xs[j]};
    best = std::max(best, op_norm(upsilon(p, fr, DS0, Phi0, s, zero)));
    const ExtState phi{s_anchor.lay, radius * phis[j]};
    best = std::max(best, op_norm(upsilon(p, fr, DS0, Phi0, s, phi)));
  }
  return best;
}

double M_bound(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double alpha) {
  const ExtLayout L = s_anchor.lay;
  const int T = L.total();
  Vec sel = Vec::Zero(T);
  sel.head(L.q).setOnes();
  for (int i = 0; i < L.q + L.m; ++i) sel.segment(L.off_y(i), L.q).setOnes();
  for (int k = 0; k < L.n; ++k) sel.segment(L.off_z(k), L.n).setOnes();
  const Mat DS0 = jac_S(p, fr, s_anchor);
  const Mat Phi0 = Phi_matrix(p, fr, s_anchor.point());
  const Mat PhiSel = Phi0 * sel.asDiagonal();
  Mat A(T, 2 * T);
  A.leftCols(T) = DS0 - (1.0 - alpha) * PhiSel;
  A.rightCols(T) = -Phi0 + (1.0 - alpha) * PhiSel;
  return 1.01 * op_norm(A);
}

double frame_norm_max(const Frames& fr) {
  double a = 0.0;
  for (int i = 0; i < fr.a_bars.cols(); ++i) a = std::max(a, fr.a_bars.col(i).norm());
  for (int k = 0; k < fr.b_bars.cols(); ++k) a = std::max(a, fr.b_bars.col(k).norm());
  return a;
}

Radii radii(double kappa, double L, double M, double epsilon, RadiiMode mode) {
  if (!(2.0 * kappa * L < 1.0)) throw Error(ErrorKind::ConditionViolated, "2 kappa L(eps) >= 1");
  Radii r;
  r.c = 1.0 / kappa - L;
  if (mode == RadiiMode::HUniform) {
    const double km = 2.0 * kappa * M;
    r.tau = 0.99 * (1.0 + km) / (2.0 + km) * epsilon;
    const double aU = r.tau / (1.0 + km);
    const double bV = r.tau / (2.0 * kappa);
    r.a_star = std::min(aU, kappa * bV);
  } else {
    r.tau = 0.99 * (L + M) / (L + M + r.c) * epsilon;
    const double aU = r.c * r.tau / (L + M);
    const double bV = r.c * r.tau;
    r.a_star = std::min(aU, bV / r.c);
  }
  r.b_star = r.c * r.a_star;
  return r;
}

Certificate certificate(const ProblemDef& p, const Frames& fr, const PointLU& anchor, const CertifyOptions& o) {
  if (!(o.epsilon > 0) || !(o.alpha >= 0) || o.samples < 1)
    throw Error(ErrorKind::BadParams, "certificate needs epsilon > 0, alpha >= 0, samples >= 1");
  Certificate c;
  c.epsilon = o.epsilon;
  c.alpha = o.alpha;
  c.sample_count = o.samples;
  c.axis_samples = 2 * ExtLayout::of(fr).dim_x();
  c.seed = o.seed;
  c.radii_mode = o.radii_mode;
  const ExtState s0 = anchor_state(p, fr, anchor);
  c.gamma = gamma_of(p, fr, s0);
  c.kappa = kappa_of(c.gamma);
  c.L_S_eps = lipschitz_LS(p, fr, s0, o.epsilon, o.samples, o.seed);
  c.L_eps = lipschitz_L(p, fr, s0, o.epsilon, o.samples, o.seed);
  c.a_hat = frame_norm_max(fr);
  c.M = M_bound(p, fr, s0, o.alpha);
  c.delta = eval_S(p, fr, s0).norm();
  c.cond_contraction = 2.0 * c.kappa * c.L_eps + 2.0 * c.kappa * c.alpha * c.a_hat < 1.0;
  c.cond_gamma = 2.0 * c.gamma * c.L_eps < 1.0;
  c.c = 1.0 / c.kappa - c.L_eps;
  if (2.0 * c.kappa * c.L_eps < 1.0) {
    const Radii r = radii(c.kappa, c.L_eps, c.M, o.epsilon, o.radii_mode);
    c.tau = r.tau;
    c.a_star = r.a_star;
    c.b_star = r.b_star;
    c.c = r.c;
  }
  c.cond_delta = c.delta < 0.5 * c.c * c.a_star;
  c.rho_bound_1 = c.a_star / (2.0 * c.gamma) + c.delta;
  const Mat DF0 = jac_DF(p, anchor);
  double LF = 0.0;
  if (c.a_star > 0) {
    const Vec z0 = anchor.stacked();
    for (const Vec& xi : ball_probe_points(static_cast<int>(z0.size()), o.samples, o.seed))
      LF = std::max(LF, op_norm(DF0 - jac_DF(p, PointLU::from_stacked(z0 + c.a_star * xi, p.m))));
  }
  c.rho_bound_2 = (op_norm(DF0) + LF) * c.a_star;
  return c;
}

double error_bound(const ProblemDef& p, const Frames& fr, const Vec& rho, const ExtState& s0, const ExtState& r,
                   int samples, unsigned seed) {
  const ProblemDef ps = shifted(p, rho);
  Frames f0 = fr;
  f0.theta0 = f0.B * s0.x();
  const Mat DS0 = jac_S(ps, f0, s0);
  const double gamma = 1.0 / sigma_min(DS0);
  const double a = (r.data - s0.data).norm();
  double LS = 0.0;
  if (a > 0) {
    for (const Vec& xi : ball_probe_points(s0.lay.total(), samples, seed, s0.lay.dim_x()))
      LS = std::max(LS, op_norm(DS0 - jac_S(ps, f0, ExtState{s0.lay, s0.data + a * xi})));
    for (int k = 1; k <= 8; ++k) {
      const double t = k / 8.0;
      LS = std::max(LS, op_norm(DS0 - jac_S(ps, f0, ExtState{s0.lay, s0.data + t * (r.data - s0.data)})));
    }
  }
  if (!(gamma * LS < 1.0)) throw Error(ErrorKind::ConditionViolated, "gamma L_S(a) >= 1 for the trial state");
  return gamma / (1.0 - gamma * LS) * eval_S(ps, f0, r).norm();
}

}  // namespace bif
