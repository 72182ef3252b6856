#pragma once

#include <memory>
#include <vector>

#include "bifurcate/problem.hpp"

namespace bif {

// Staggered (MAC) grid on the unit square with res x res cells. Velocity
// unknowns live on interior faces: u on vertical faces, v on horizontal ones.
// Pressure lives at cell centres.
struct MacGrid {
  int res = 0;
  double h = 0.0;
  int nu = 0, nv = 0, np = 0;

  explicit MacGrid(int r);
  int nvel() const { return nu + nv; }
  int u_index(int i, int j) const { return j * (res - 1) + (i - 1); }  // i in 1..res-1, j in 0..res-1
  int v_index(int i, int j) const { return nu + (j - 1) * res + i; }   // i in 0..res-1, j in 1..res-1
  int p_index(int i, int j) const { return j * res + i; }
  // Layout of the augmented state (p, velocity, q).
  int state_dim() const { return 2 * np + nvel(); }
};

struct StokesSolution {
  Vec vel;       // (u, v) stacked
  Vec pressure;  // zero mean
};

class StokesSolver {
 public:
  explicit StokesSolver(int res);
  ~StokesSolver();
  const MacGrid& grid() const { return grid_; }
  StokesSolution solve(const Vec& force) const;
  // Columns of `forces` solved at once; rows of the result are (vel, pressure).
  Mat solve_many(const Mat& forces) const;

 private:
  struct Impl;
  MacGrid grid_;
  std::unique_ptr<Impl> impl_;
};

// One factorisation per resolution, built on first use and read-only afterwards.
std::shared_ptr<const StokesSolver> stokes_solver(int res);

StokesSolution ns_stokes_solve(int res, const Vec& force);
Vec discrete_divergence(const MacGrid& g, const Vec& vel);
Mat neg_laplacian_dense(const MacGrid& g);

// (a . grad) b on the faces: bilinear in (a, b).
Vec convection(const MacGrid& g, const Vec& a, const Vec& b);
Mat convection_jacobian(const MacGrid& g, const Vec& U);

enum class Forcing { Smooth, Rough };
Vec ns_forcing(const MacGrid& g, Forcing kind, double amplitude);

// Manufactured pair: stream function sin^2(pi x) sin^2(pi y), pressure cos(pi x) cos(pi y).
Vec manufactured_velocity(const MacGrid& g);
Vec manufactured_pressure(const MacGrid& g);
Vec manufactured_force(const MacGrid& g);

// Augmented map (p, u, q) + T*G*(lambda, p, u, q) with q standing for lambda*p.
Vec ns_F_eval(int res, double lambda, const Vec& state, const Vec& force);
ProblemDef ns_problem(int res, Forcing kind, double amplitude);

// Coarse-to-fine transfer of each staggered component by bilinear
// interpolation (walls carry the no-slip values); rows are fine unknowns.
Mat velocity_prolongation(int res_coarse, int res_fine);
Mat pressure_prolongation(int res_coarse, int res_fine);
Mat left_inverse(const Mat& E);

// Zero of the augmented map at fixed lambda by Newton on the velocity block.
Vec ns_solve_state(int res, double lambda, const Vec& force, int max_iter = 30, double tol = 1e-13);

struct NsTransferRow {
  int res = 0;
  double eta2_projection = 0.0, eta2_stokes_gap = 0.0, eta2_nonlinear = 0.0, eta2 = 0.0;
  double eta4_projection = 0.0, eta4_stokes_gap = 0.0, eta4_nonlinear = 0.0, eta4 = 0.0;
};

struct NsTransferStudy {
  int res_fine = 0;
  double lambda0 = 1.0;
  std::vector<NsTransferRow> rows;
  bool eta2_decreasing = false;
  bool eta4_decreasing = false;
};

NsTransferStudy ns_transfer_study(int res_fine, const std::vector<int>& res_list,
                                  Forcing kind = Forcing::Smooth, double lambda0 = 1.0);

// Largest singular value through the smaller Gram matrix; fine for norms only.
double gram_norm(const Mat& A);

}  // namespace bif
