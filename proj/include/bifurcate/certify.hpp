#pragma once

#include <string>
#include <vector>

#include "bifurcate/recovery.hpp"

namespace bif {

enum class RadiiMode { HUniform, General };

RadiiMode parse_radii_mode(const std::string& s);
std::string radii_mode_name(RadiiMode m);

struct CertifyOptions {
  double epsilon = 0.05;
  double alpha = 1e-3;
  int samples = 64;
  unsigned seed = 7;
  RadiiMode radii_mode = RadiiMode::HUniform;
};

struct Certificate {
  double gamma = 0.0;
  double kappa = 0.0;
  double L_eps = 0.0;
  double L_S_eps = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  double a_hat = 0.0;
  double M = 0.0;
  double c = 0.0;
  double tau = 0.0;
  double a_star = 0.0;
  double b_star = 0.0;
  double delta = 0.0;
  bool cond_contraction = false;
  bool cond_gamma = false;
  bool cond_delta = false;
  double rho_bound_1 = 0.0;
  double rho_bound_2 = 0.0;
  int sample_count = 0;  // uniform points; 2*dim_x axis points come on top
  int axis_samples = 0;
  unsigned seed = 0;
  RadiiMode radii_mode = RadiiMode::HUniform;

  bool certified() const { return cond_contraction && cond_delta; }
};

// Points drawn uniformly from the unit ball of R^dim; the first k points do
// not depend on how many are requested.
std::vector<Vec> unit_ball_samples(int dim, int samples, unsigned seed);

// The uniform samples followed by the points +-e_j for the first `axis_dims`
// coordinates (all of them when negative). Extended states put the x block
// first, and it is the only block that S depends on non-affinely.
std::vector<Vec> ball_probe_points(int dim, int samples, unsigned seed, int axis_dims = -1);

double gamma_of(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor);
double kappa_of(double gamma);

double lipschitz_LS(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double radius, int samples,
                    unsigned seed);
// Sampled Lipschitz modulus of the difference map of the set-valued system,
// always at least half of lipschitz_LS for the same samples.
double lipschitz_L(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double radius, int samples,
                   unsigned seed);

// 1.01 times the norm of the derivative of the set-valued map at the anchor.
double M_bound(const ProblemDef& p, const Frames& fr, const ExtState& s_anchor, double alpha);

double frame_norm_max(const Frames& fr);

struct Radii {
  double tau = 0.0;
  double a_star = 0.0;
  double b_star = 0.0;
  double c = 0.0;
};

Radii radii(double kappa, double L, double M, double epsilon, RadiiMode mode);

Certificate certificate(const ProblemDef& p, const Frames& fr, const PointLU& anchor, const CertifyOptions& o = {});

// Bound on ||s0 - r|| for the shifted problem F - rho; the Lipschitz modulus
// is sampled on the ball of radius ||r - s0|| around s0 and on the segment.
double error_bound(const ProblemDef& p, const Frames& fr, const Vec& rho, const ExtState& s0, const ExtState& r,
                   int samples = 64, unsigned seed = 7);

}  // namespace bif
