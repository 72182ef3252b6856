// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "bifurcate/discretize.hpp"
#include "bifurcate/ns_lite.hpp"
#include "bifurcate/testbeds.hpp"

using namespace bif;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;
  void need(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

int failures = 0;

void criterion(int id, double limit_s, const std::function<void(Outcome&)>& body) {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.need(false, std::string("exception ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0) o.need(secs < limit_s, "runtime");
  if (!o.pass) ++failures;
  std::printf("criterion %d: %s (%.2f s)%s\n", id, o.pass ? "PASS" : "FAIL", secs, o.detail.str().c_str());
  std::fflush(stdout);
}

PointLU pt(double l, double u) { return PointLU{Vec::Constant(1, l), Vec::Constant(1, u)}; }

PointLU branch_point(const ProblemDef& p, double lambda) {
  PointLU x{Vec::Constant(1, lambda), Vec::Zero(p.N)};
  for (int it = 0; it < 40; ++it) x.u -= jac_DuF(p, x).lu().solve(eval_F(p, x));
  return x;
}

struct Case {
  std::string label;
  ProblemDef p;
  PointLU anchor;
  Frames fr;
};

// Every registry problem with an anchor at or near its bifurcation point.
std::vector<Case> registry_cases(bool with_ns) {
  std::vector<Case> out;
  auto add_truth = [&](const std::string& name, const Params& params) {
    const RegistryEntry e = registry(name, params);
    out.push_back({name, e.problem, e.truth->point, choose_frames(e.problem, e.truth->point)});
  };
  add_truth("pitchfork", {});
  add_truth("transcritical", {});
  add_truth("linear", {});
  add_truth("chafee_infante", {{"N", "16"}});
  {
    const ProblemDef p = registry("perturbed_pitchfork", {{"eps", "0.001"}}).problem;
    out.push_back({"perturbed_pitchfork", p, pt(0, 0), choose_frames(p, pt(0, 0), kRankTol, TypeNQ{1, 1})});
  }
  {
    const ProblemDef p = registry("chafee_infante_asym", {{"N", "16"}, {"eps", "0.001"}}).problem;
    const PointLU a = branch_point(p, tridiag_eigen_oracle(16).values(0) - 0.05);
    out.push_back({"chafee_infante_asym", p, a, choose_frames(p, a, kRankTol, TypeNQ{1, 1})});
  }
  if (with_ns) {
    const ProblemDef p = registry("ns_lite", {{"res", "4"}}).problem;
    const PointLU a{Vec::Constant(1, 1.0), ns_solve_state(4, 1.0, ns_forcing(MacGrid(4), Forcing::Smooth, 1.0))};
    out.push_back({"ns_lite", p, a, choose_frames(p, a, kRankTol, TypeNQ{1, 1})});
  }
  return out;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BIFURCATE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, 0.0, [](Outcome& o) {
    auto timed = [&](const std::function<ClassifyReport()>& f, const std::string& what) {
      const auto t0 = std::chrono::steady_clock::now();
      const ClassifyReport r = f();
      const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      o.need(r.n == 1 && r.q == 1, what + " type");
      o.need(s < 1.0, what + " runtime");
    };
    timed([] { return classify(registry("pitchfork").problem, pt(0, 0)); }, "pitchfork");
    timed([] { return classify(registry("transcritical").problem, pt(0, 0)); }, "transcritical");
    for (int N : {8, 16, 32, 64}) {
      const double l1 = tridiag_eigen_oracle(N).values(0);
      const RegistryEntry e = registry("chafee_infante", {{"N", std::to_string(N)}});
      o.need(std::abs(e.truth->point.lambda(0) - l1) <= 1e-10, "eigenvalue N=" + std::to_string(N));
      timed([&] { return classify(e.problem, PointLU{Vec::Constant(1, l1), Vec::Zero(N)}); },
            "chafee_infante N=" + std::to_string(N));
    }
    o.detail << " pitchfork, transcritical, chafee_infante N in {8,16,32,64}";
  });

  criterion(2, 10.0, [](Outcome& o) {
    std::mt19937_64 rng(42);
    std::normal_distribution<double> g;
    int frames_checked = 0;
    for (const char* name : {"pitchfork", "transcritical", "chafee_infante"}) {
      const RegistryEntry e = registry(name, {{"N", "16"}});
      const ProblemDef& p = e.problem;
      const PointLU x0 = e.truth->point;
      const Frames fr = choose_frames(p, x0);
      const ExtState s0 = build_extended_solution(p, fr, x0);
      const VerifyReport v = verify_extended(p, fr, s0);
      o.need(v.passes && v.residual_S <= 1e-8 && v.sigma_min_DS > 1e-8 && v.zero_components_max <= 1e-7,
             std::string(name) + " verify");
      const ClassifyReport c = classify(p, x0);
      for (int k = 0; k < 20; ++k) {
        // Random cokernel frames: the canonical ones plus noise, which stay
        // transversal to the range with probability one.
        Mat a = fr.a_bars, b = fr.b_bars;
        for (int i = 0; i < a.size(); ++i) a.data()[i] += 0.5 * g(rng);
        for (int i = 0; i < b.size(); ++i) b.data()[i] += 0.5 * g(rng);
        Frames f2;
        try {
          f2 = frames_from_vectors(p, x0, a, b);
        } catch (const Error&) {
          continue;
        }
        const ExtState s2 = build_extended_solution(p, f2, x0);
        const VerifyReport v2 = verify_extended(p, f2, s2);
        o.need(v2.passes, std::string(name) + " random frame verify");
        o.need(v2.implied_type.n == c.n && v2.implied_type.q == c.q, std::string(name) + " random frame type");
        ++frames_checked;
      }
    }
    o.need(frames_checked >= 50, "enough admissible random frames");
    o.detail << " random frames checked: " << frames_checked;
  });

  criterion(3, 30.0, [](Outcome& o) {
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const ProblemDef p = registry("perturbed_pitchfork", {{"eps", std::to_string(eps)}}).problem;
      const Frames fr = choose_frames(p, pt(0.05, 0.05), kRankTol, TypeNQ{1, 1});
      const RecoveryResult r = recover(p, fr, pt(0.05, 0.05));
      o.need(r.converged && std::abs(r.rho(0) + eps) <= 1e-8, "rho for eps " + std::to_string(eps));
      o.need(r.point.stacked().norm() <= 1e-8, "point for eps " + std::to_string(eps));
    }
    const ProblemDef p = registry("chafee_infante_asym", {{"N", "32"}, {"eps", "0.001"}}).problem;
    const PointLU anchor = branch_point(p, tridiag_eigen_oracle(32).values(0) - 0.05);
    const Frames fr = choose_frames(p, anchor, kRankTol, TypeNQ{1, 1});
    const RecoveryResult r = recover(p, fr, anchor);
    o.need(r.converged, "asym convergence");
    const ClassifyReport c = classify(shifted(p, r.rho), r.point);
    o.need(c.n == 1 && c.q == 1, "asym type");
    const double with = crossing_gap(trace_branches(p, r.rho, r.point, 20, 0.05));
    const double without = crossing_gap(trace_branches(p, Vec::Zero(p.N), r.point, 20, 0.05));
    o.need(with <= 1e-6, "shifted crossing");
    o.need(without > 1e-4, "unshifted gap");
    o.detail << " asym |rho| = " << r.rho.norm() << ", gap shifted " << with << ", unshifted " << without;
  });

  criterion(4, 20.0, [](Outcome& o) {
    double worst = 0.0;
    for (const Case& cs : registry_cases(true)) {
      const Certificate c = certificate(cs.p, cs.fr, cs.anchor);
      o.need(c.kappa <= c.gamma, cs.label + " kappa <= gamma");
      o.need(0.5 * c.L_S_eps <= 1.05 * c.L_eps, cs.label + " L_S / 2 <= 1.05 L");
      if (c.L_eps > 0) worst = std::max(worst, 0.5 * c.L_S_eps / c.L_eps);
      if (c.a_star > 0) o.need(c.b_star == c.c * c.a_star, cs.label + " b* = c a*");
    }
    // kappa = 2, L = 0.1, M = 3, eps = 0.05 on the linear testbed's formulas.
    const Radii h = radii(2.0, 0.1, 3.0, 0.05, RadiiMode::HUniform);
    o.need(std::abs(h.tau - 0.0459642857142857142857) <= 1e-12, "tau");
    o.need(std::abs(h.a_star - 0.00353571428571428571) <= 1e-12, "a*");
    o.need(std::abs(h.b_star - 0.00141428571428571429) <= 1e-12, "b*");
    o.need(h.b_star == h.c * h.a_star, "b* = c a* (hand)");
    const RegistryEntry lin = registry("linear");
    const Frames lf = choose_frames(lin.problem, lin.truth->point);
    const Certificate lc = certificate(lin.problem, lf, lin.truth->point);
    const Radii lr = radii(lc.kappa, 0.0, lc.M, lc.epsilon, RadiiMode::HUniform);
    const double km = 2.0 * lc.kappa * lc.M;
    const double tau = 0.99 * (1.0 + km) / (2.0 + km) * lc.epsilon;
    o.need(std::abs(lr.a_star - std::min(tau / (1.0 + km), tau / 2.0)) <= 1e-12, "linear a*");
    o.need(std::abs(lr.c - 1.0 / lc.kappa) <= 1e-12, "linear c");
    o.detail << " max (L_S/2)/L = " << worst;
  });

  criterion(5, 30.0, [](Outcome& o) {
    struct Recovered {
      std::string label;
      ProblemDef p;
      Frames fr;
      Vec rho;
      ExtState s0;
    };
    std::vector<Recovered> cases;
    for (const Case& cs : registry_cases(false)) {
      const RecoveryResult r = recover(cs.p, cs.fr, cs.anchor);
      cases.push_back({cs.label, cs.p, r.frames, r.rho, r.ext_state});
    }
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g;
    int checked = 0, violations = 0, outside = 0;
    for (const Recovered& rc : cases) {
      const int dim = rc.s0.lay.total();
      for (int k = 0; k < 50; ++k) {
        Vec d(dim);
        for (int i = 0; i < dim; ++i) d(i) = g(rng);
        const double size = std::pow(10.0, -4.0 + 2.0 * (k % 10) / 9.0);  // 1e-4 .. 1e-2
        d *= size / d.norm();
        const ExtState r{rc.s0.lay, rc.s0.data + d};
        try {
          const double bound = error_bound(rc.p, rc.fr, rc.rho, rc.s0, r);
          ++checked;
          if (d.norm() > bound) ++violations;
        } catch (const Error&) {
          ++outside;
        }
      }
    }
    o.need(violations == 0, "bound violations");
    o.need(checked >= 40 * static_cast<int>(cases.size()), "enough trial states inside the hypothesis");
    o.detail << " trial states " << checked << ", violations " << violations << ", outside hypothesis " << outside;
  });

  criterion(6, 120.0, [](Outcome& o) {
    const StudyTable t = ci_h_study(64, {16, 24, 32, 48}, ProjectionKind::Truncation);
    const double l_fine = tridiag_eigen_oracle(64).values(0);
    o.need(t.rows.size() == 4, "row count");
    o.need(t.eta2_decreasing && t.eta4_decreasing && t.delta_decreasing, "monotone eta2, eta4, delta");
    for (const StudyRow& r : t.rows) {
      const std::string n = "N_h=" + std::to_string(r.N_h);
      if (r.q_G < 1.0 && r.q_H < 1.0) {
        o.need(r.transfer.inv_norm_actual_G > 0 && r.transfer.inv_norm_actual_H > 0, n + " nonsingular");
        o.need(r.transfer.bounds_hold, n + " inverse bounds");
        o.need(r.recovered && r.type_n == 1 && r.type_q == 1, n + " type");
        const double oracle = std::abs(tridiag_eigen_oracle(r.N_h).values(0) - l_fine);
        o.need(std::abs(std::abs(r.lambda0h - l_fine) - oracle) <= 1e-6, n + " eigen gap");
      } else {
        o.need(false, n + " inadmissible");
      }
    }
  });

  criterion(7, 120.0, [](Outcome& o) {
    double prev = 1e300;
    for (int res : {8, 12, 16, 24}) {
      const MacGrid g(res);
      const StokesSolution s = ns_stokes_solve(res, manufactured_force(g));
      const double err = (s.vel - manufactured_velocity(g)).cwiseAbs().maxCoeff();
      o.need(err < prev, "manufactured error decreasing at res " + std::to_string(res));
      prev = err;
      o.need(discrete_divergence(g, s.vel).cwiseAbs().maxCoeff() <= 1e-10, "divergence");
      const StokesSolution r = ns_stokes_solve(res, ns_forcing(g, Forcing::Rough, 1.0));
      o.need(discrete_divergence(g, r.vel).cwiseAbs().maxCoeff() <= 1e-10, "divergence (rough)");
    }
    for (int res : {8, 12}) {
      const MacGrid g(res);
      const Vec f = ns_forcing(g, Forcing::Smooth, 1.0);
      for (double lam : {0.5, 1.0, 2.0}) {
        const Vec s = ns_solve_state(res, lam, f);
        o.need(ns_F_eval(res, lam, s, f).norm() <= 1e-10, "zero of the augmented map");
        o.need((s.head(g.np) - s.tail(g.np) / lam).norm() <= 1e-12, "p = q / lambda");
      }
    }
    const int fine = 32;
    const MacGrid gf(fine);
    const Vec uf = ns_stokes_solve(fine, ns_forcing(gf, Forcing::Smooth, 1.0)).vel;
    double gap_prev = 1e300;
    for (int res : {8, 12, 16, 24}) {
      const MacGrid gc(res);
      const Vec uc = ns_stokes_solve(res, ns_forcing(gc, Forcing::Smooth, 1.0)).vel;
      const double gap = (uf - velocity_prolongation(res, fine) * uc).norm() * gf.h;
      o.need(gap < gap_prev, "Stokes gap decreasing at res " + std::to_string(res));
      gap_prev = gap;
    }
    o.detail << " final manufactured error " << prev << ", final Stokes gap " << gap_prev;
  });

  criterion(8, 0.0, [](Outcome& o) {
    const fs::path d = fs::temp_directory_path() / "bifurcate_acceptance";
    fs::create_directories(d);
    const std::vector<std::pair<std::string, bool>> runs = {
        {"list", false},
        {"classify --problem chafee_infante --N 16", false},
        {"recover --problem chafee_infante_asym --N 16 --eps 1e-3", false},
        {"recover --problem perturbed_pitchfork --eps 1e-3 --anchor 0.05,0.05 --functional", false},
        {"certify --problem perturbed_pitchfork --eps 1e-4 --anchor 0,0 --samples 64 --seed 7", false},
        {"trace --problem perturbed_pitchfork --eps 1e-3 --anchor 0.05,0.05", true},
        {"discretize --fine 32 --coarse 12,16,24", true},
    };
    int compared = 0;
    for (size_t i = 0; i < runs.size(); ++i) {
      const fs::path json = d / ("run" + std::to_string(i) + ".json");
      const fs::path csv = d / ("run" + std::to_string(i) + ".csv");
      std::string args = runs[i].first + " --out " + json.string();
      if (runs[i].second) args += " --csv " + csv.string();
      std::string first_json, first_csv;
      for (int rep = 0; rep < 2; ++rep) {
        fs::remove(json);
        fs::remove(csv);
        const int code = run_cli(args);
        o.need(code == 0 || code == 2, "exit code of '" + runs[i].first + "'");
        const std::string j = slurp(json), c = runs[i].second ? slurp(csv) : std::string();
        o.need(!j.empty(), "report written for '" + runs[i].first + "'");
        if (rep == 0) {
          first_json = j;
          first_csv = c;
        } else {
          o.need(j == first_json && c == first_csv, "byte-identical '" + runs[i].first + "'");
          ++compared;
        }
      }
    }
    o.detail << " CLI runs compared: " << compared;
  });

  return failures == 0 ? 0 : 1;
}
