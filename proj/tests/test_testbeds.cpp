#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bifurcate/ns_lite.hpp"
#include "bifurcate/testbeds.hpp"

using namespace bif;

TEST_CASE("registry names and errors") {
  const auto names = registry_names();
  CHECK(std::is_sorted(names.begin(), names.end()));
  CHECK_THROWS_AS(registry("no_such_problem"), Error);
  CHECK_THROWS_AS(registry("chafee_infante", {{"N", "1"}}), Error);
  CHECK_THROWS_AS(registry("ns_lite", {{"res", "3"}}), Error);
  CHECK_THROWS_AS(registry("chafee_infante", {{"form", "spectral"}}), Error);
}

TEST_CASE("known truths of the normal forms") {
  for (const char* name : {"pitchfork", "transcritical"}) {
    const auto e = registry(name);
    REQUIRE(e.truth);
    CHECK(e.truth->point.stacked().norm() == 0.0);
    CHECK(e.truth->n == 1);
    CHECK(e.truth->q == 1);
  }
}

TEST_CASE("tridiagonal eigen oracle") {
  const TridiagEigen two = tridiag_eigen_oracle(2);
  const double h = M_PI / 3.0;
  for (int k = 1; k <= 2; ++k) {
    const double closed = 4.0 / (h * h) * std::pow(std::sin(k * M_PI / 6.0), 2);
    CHECK(std::abs(two.values(k - 1) - closed) < 1e-12);
  }
  for (int Ng : {3, 8, 32}) {
    const TridiagEigen t = tridiag_eigen_oracle(Ng);
    CHECK((t.vectors.transpose() * t.vectors - Mat::Identity(Ng, Ng)).norm() < 1e-12);
    CHECK(t.values(0) < 1.0);
    CHECK(t.values(1) > 1.0);
    // Eigenpairs of the assembled operator.
    const Mat L = dirichlet_laplacian(Ng);
    CHECK((-L * t.vectors - t.vectors * t.values.asDiagonal()).norm() < 1e-9 * t.values.maxCoeff());
  }
}

TEST_CASE("Chafee-Infante truth and forms") {
  const auto e = registry("chafee_infante", {{"N", "32"}});
  CHECK(e.truth->point.lambda(0) == doctest::Approx(tridiag_eigen_oracle(32).values(0)).epsilon(1e-14));
  CHECK(asym_node(32) == 15);
  const auto lap = registry("chafee_infante_asym", {{"N", "16"}, {"eps", "0.01"}});
  const auto cmp = registry("chafee_infante_asym", {{"N", "16"}, {"eps", "0.01"}, {"form", "compact"}});
  // Same zero set: a zero of one form is a zero of the other.
  Vec lam(1);
  lam << 0.6;
  Vec u = Vec::Zero(16);
  for (int it = 0; it < 30; ++it) u -= jac_DuF(lap.problem, PointLU{lam, u}).lu().solve(eval_F(lap.problem, PointLU{lam, u}));
  CHECK(eval_F(lap.problem, PointLU{lam, u}).norm() < 1e-12);
  const Vec v = std::sqrt(grid_spacing(16)) * u;
  CHECK(eval_F(cmp.problem, PointLU{lam, v}).norm() < 1e-12);
}

TEST_CASE("building an entry twice gives identical evaluators") {
  const Params params{{"N", "12"}, {"eps", "0.002"}};
  const auto a = registry("chafee_infante_asym", params);
  const auto b = registry("chafee_infante_asym", params);
  const PointLU x{Vec::Constant(1, 0.9), Vec::LinSpaced(12, -0.2, 0.4)};
  CHECK((eval_F(a.problem, x) - eval_F(b.problem, x)).norm() == 0.0);
  CHECK((jac_DF(a.problem, x) - jac_DF(b.problem, x)).norm() == 0.0);
}

TEST_CASE("every registry entry passes fd_check at 20 random points") {
  std::mt19937 gen(20);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (const auto& name : registry_names()) {
    Params params;
    if (name.rfind("chafee", 0) == 0) params["N"] = "16";
    if (name == "ns_lite") params["res"] = "4";
    const ProblemDef p = registry(name, params).problem;
    std::vector<PointLU> pts;
    for (int k = 0; k < 20; ++k) {
      Vec l(p.m), u(p.N);
      for (int i = 0; i < p.m; ++i) l(i) = 1.0 + U(gen);
      for (int i = 0; i < p.N; ++i) u(i) = U(gen);
      pts.push_back(PointLU{l, u});
    }
    const FdReport r = fd_check(p, pts);
    INFO(name);
    CHECK(r.max_rel_DF < 1e-6);
    CHECK(r.max_rel_D2F < 1e-5);
  }
}

TEST_CASE("Stokes solver basics") {
  const StokesSolution z = ns_stokes_solve(8, Vec::Zero(MacGrid(8).nvel()));
  CHECK(z.vel.norm() == 0.0);
  CHECK(z.pressure.norm() == 0.0);
  for (int res : {8, 12}) {
    const MacGrid g(res);
    const StokesSolution s = ns_stokes_solve(res, ns_forcing(g, Forcing::Rough, 1.0));
    CHECK(discrete_divergence(g, s.vel).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(std::abs(s.pressure.mean()) <= 1e-12);
  }
}

TEST_CASE("Stokes manufactured solution converges") {
  double prev = 1e300;
  for (int res : {8, 12, 16, 24}) {
    const MacGrid g(res);
    const StokesSolution s = ns_stokes_solve(res, manufactured_force(g));
    const double err = (s.vel - manufactured_velocity(g)).cwiseAbs().maxCoeff();
    CHECK(err < prev);
    prev = err;
  }
  CHECK(prev < 0.05);
}

TEST_CASE("Stokes operator gap shrinks on a fixed smooth force") {
  const int fine = 24;
  const MacGrid gf(fine);
  const Vec uf = ns_stokes_solve(fine, ns_forcing(gf, Forcing::Smooth, 1.0)).vel;
  double prev = 1e300;
  for (int res : {8, 12, 16}) {
    const MacGrid gc(res);
    const Vec uc = ns_stokes_solve(res, ns_forcing(gc, Forcing::Smooth, 1.0)).vel;
    const double gap = (uf - velocity_prolongation(res, fine) * uc).norm() * gf.h;
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("augmented Navier-Stokes map") {
  const int res = 8;
  const MacGrid g(res);
  CHECK(ns_F_eval(res, 1.0, Vec::Zero(g.state_dim()), Vec::Zero(g.nvel())).norm() == 0.0);
  CHECK_THROWS_AS(ns_F_eval(res, 0.0, Vec::Zero(g.state_dim()), Vec::Zero(g.nvel())), Error);
  const Vec f = ns_forcing(g, Forcing::Smooth, 1.0);
  for (double lam : {0.5, 2.0}) {
    const Vec s = ns_solve_state(res, lam, f);
    const Vec r = ns_F_eval(res, lam, s, f);
    CHECK(r.norm() < 1e-10);
    CHECK((s.head(g.np) - s.tail(g.np) / lam).norm() <= 1e-12);
  }
}

TEST_CASE("NS transfer study") {
  const NsTransferStudy same = ns_transfer_study(12, {12});
  CHECK(same.rows[0].eta2 < 1e-12);
  CHECK(same.rows[0].eta4 < 1e-12);
  const NsTransferStudy s = ns_transfer_study(24, {8, 12, 16});
  CHECK(s.eta4_decreasing);
  for (const auto& r : s.rows) {
    CHECK(r.eta4_projection >= 0.0);
    CHECK(r.eta4_stokes_gap >= 0.0);
    CHECK(r.eta4_nonlinear >= 0.0);
  }
}
