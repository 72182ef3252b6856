#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "bifurcate/classify.hpp"
#include "bifurcate/testbeds.hpp"

using namespace bif;

namespace {

PointLU pt(double l, double u) { return PointLU{Vec::Constant(1, l), Vec::Constant(1, u)}; }

}  // namespace

TEST_CASE("classify normal forms") {
  const ProblemDef p = registry("pitchfork").problem;
  const ClassifyReport r = classify(p, pt(0, 0));
  CHECK(r.n == 1);
  CHECK(r.q == 1);
  CHECK(r.bifurcation);
  const ClassifyReport reg = classify(p, pt(-1, 0));
  CHECK(reg.n == 0);
  CHECK_FALSE(reg.bifurcation);
  const ClassifyReport t = classify(registry("transcritical").problem, pt(0, 0));
  CHECK(t.n == 1);
  CHECK(t.q == 1);
  CHECK_THROWS_AS(classify(p, pt(2, 1)), Error);
}

TEST_CASE("classify Chafee-Infante at the first eigenvalue") {
  const auto e = registry("chafee_infante", {{"N", "32"}});
  const ClassifyReport r = classify(e.problem, e.truth->point);
  CHECK(r.n == 1);
  CHECK(r.q == 1);
  CHECK(std::abs(e.truth->point.lambda(0) - tridiag_eigen_oracle(32).values(0)) < 1e-10);
}

TEST_CASE("extended solution at the pitchfork origin") {
  const ProblemDef p = registry("pitchfork").problem;
  const Frames fr = choose_frames(p, pt(0, 0));
  const ExtState s = build_extended_solution(p, fr, pt(0, 0));
  // y-blocks span all of R^2 and the z-block is +-1.
  Mat Y(2, 2);
  Y.col(0) = s.mu_w(0);
  Y.col(1) = s.mu_w(1);
  CHECK(std::abs(Y.determinant()) > 0.5);
  CHECK(std::abs(std::abs(s.v(0)(0)) - 1.0) < 1e-14);
  CHECK(std::abs(s.g(0)(0)) < 1e-10);
  CHECK(std::abs(s.g(1)(0)) < 1e-10);
  const VerifyReport v = verify_extended(p, fr, s);
  CHECK(v.passes);
  ExtState bad = s;
  bad.data(0) = 0.1;
  CHECK_FALSE(verify_extended(p, fr, bad).passes);
}

TEST_CASE("verify rejects a garbage state") {
  const ProblemDef p = registry("pitchfork").problem;
  const Frames fr = choose_frames(p, pt(0, 0));
  ExtState s = ExtState::zeros(ExtLayout::of(fr));
  s.data.setConstant(0.37);
  const VerifyReport v = verify_extended(p, fr, s);
  CHECK(v.residual_S > 1e-8);
  CHECK_FALSE(v.passes);
}

TEST_CASE("extended residual is tiny on registry bifurcation points") {
  for (const char* name : {"pitchfork", "transcritical", "chafee_infante", "linear"}) {
    const auto e = registry(name, {{"N", "16"}});
    const Frames fr = choose_frames(e.problem, e.truth->point);
    const ExtState s = build_extended_solution(e.problem, fr, e.truth->point);
    INFO(name);
    CHECK(eval_S(e.problem, fr, s).norm() <= 1e-9);
    const KernelBases k = kernel_from_extended(s);
    CHECK(static_cast<int>(k.DF.size()) == fr.q + fr.m);
    CHECK(static_cast<int>(k.DuF.size()) == fr.n);
  }
}

TEST_CASE("Chafee-Infante kernel is the first sine mode") {
  const auto e = registry("chafee_infante", {{"N", "16"}});
  const Frames fr = choose_frames(e.problem, e.truth->point);
  const KernelBases k = kernel_from_extended(build_extended_solution(e.problem, fr, e.truth->point));
  const Vec mode = tridiag_eigen_oracle(16).vectors.col(0);
  CHECK(std::abs(k.DuF[0].normalized().dot(mode)) > 1.0 - 1e-8);
}

TEST_CASE("equivalence spot check") {
  const ProblemDef p = registry("pitchfork").problem;
  LinearChange id{Mat::Identity(1, 1), Mat::Identity(1, 1), Mat::Zero(1, 1)};
  const ProblemDef same = transform_problem(p, id);
  const PointLU x = pt(0.3, 0.2);
  CHECK((eval_F(same, x) - eval_F(p, x)).norm() == 0.0);

  LinearChange scale{Mat::Identity(1, 1), 2.0 * Mat::Identity(1, 1), Mat::Zero(1, 1)};
  const ClassifyReport r = classify(transform_problem(p, scale), transform_point(pt(0, 0), scale));
  CHECK(r.n == 1);
  CHECK(r.q == 1);

  const auto ci = registry("chafee_infante", {{"N", "16"}});
  const SpotcheckReport s = equivalence_spotcheck(ci.problem, ci.truth->point, 42, 10);
  CHECK(s.all_equal);
  CHECK(s.trials == 10);
  for (const auto& t : s.transformed) {
    CHECK(t.n == 1);
    CHECK(t.q == 1);
  }
}
