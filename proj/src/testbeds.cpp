#include "bifurcate/testbeds.hpp"

#include <cmath>
#include <memory>
#include <numbers>
#include <sstream>

#include "bifurcate/ns_lite.hpp"

namespace bif {

double param_double(const Params& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    size_t used = 0;
    double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParams, "parameter " + key + " is not a number");
  }
}

int param_int(const Params& p, const std::string& key, int fallback) {
  auto it = p.find(key);
  if (it == p.end()) return fallback;
  try {
    size_t used = 0;
    int v = std::stoi(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::BadParams, "parameter " + key + " is not an integer");
  }
}

std::string param_string(const Params& p, const std::string& key, const std::string& fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

double grid_spacing(int Ng) { return std::numbers::pi / (Ng + 1); }

int asym_node(int Ng) { return Ng / 2 - 1; }  // node Ng/2 counted from 1

Mat dirichlet_laplacian(int Ng) {
  const double h = grid_spacing(Ng);
  Mat L = Mat::Zero(Ng, Ng);
  for (int j = 0; j < Ng; ++j) {
    L(j, j) = -2.0;
    if (j > 0) L(j, j - 1) = 1.0;
    if (j + 1 < Ng) L(j, j + 1) = 1.0;
  }
  return L / (h * h);
}

TridiagEigen tridiag_eigen_oracle(int Ng) {
  if (Ng < 2) throw Error(ErrorKind::BadParams, "tridiag_eigen_oracle needs Ng >= 2");
  TridiagEigen t;
  t.h = grid_spacing(Ng);
  t.values.resize(Ng);
  t.vectors.resize(Ng, Ng);
  const double nrm = std::sqrt(2.0 / (Ng + 1));
  for (int k = 1; k <= Ng; ++k) {
    const double s = std::sin(k * t.h / 2.0);
    t.values(k - 1) = 4.0 / (t.h * t.h) * s * s;
    for (int j = 1; j <= Ng; ++j) t.vectors(j - 1, k - 1) = nrm * std::sin(j * k * t.h);
  }
  return t;
}

namespace {

ProblemDef make_pitchfork(double eps) {
  ProblemDef p;
  p.name = eps == 0.0 ? "pitchfork" : "perturbed_pitchfork";
  p.m = 1;
  p.N = 1;
  p.F = [eps](const Vec& l, const Vec& u) { return Vec::Constant(1, l(0) * u(0) - u(0) * u(0) * u(0) - eps); };
  p.DF = [](const Vec& l, const Vec& u) {
    Mat J(1, 2);
    J << u(0), l(0) - 3.0 * u(0) * u(0);
    return J;
  };
  p.D2F = [](const Vec&, const Vec& u, const Vec& a, const Vec& b) {
    return Vec::Constant(1, a(0) * b(1) + a(1) * b(0) - 6.0 * u(0) * a(1) * b(1));
  };
  return p;
}

ProblemDef make_transcritical() {
  ProblemDef p;
  p.name = "transcritical";
  p.m = 1;
  p.N = 1;
  p.F = [](const Vec& l, const Vec& u) { return Vec::Constant(1, l(0) * u(0) - u(0) * u(0)); };
  p.DF = [](const Vec& l, const Vec& u) {
    Mat J(1, 2);
    J << u(0), l(0) - 2.0 * u(0);
    return J;
  };
  p.D2F = [](const Vec&, const Vec&, const Vec& a, const Vec& b) {
    return Vec::Constant(1, a(0) * b(1) + a(1) * b(0) - 2.0 * a(1) * b(1));
  };
  return p;
}

// F(lambda, u) = c*lambda + A u with A = diag(1, 0), c = e_1: one-dimensional
// cokernel and kernel everywhere.
ProblemDef make_linear() {
  ProblemDef p;
  p.name = "linear";
  p.m = 1;
  p.N = 2;
  p.F = [](const Vec& l, const Vec& u) {
    Vec r(2);
    r << l(0) + u(0), 0.0;
    return r;
  };
  p.DF = [](const Vec&, const Vec&) {
    Mat J = Mat::Zero(2, 3);
    J(0, 0) = 1.0;
    J(0, 1) = 1.0;
    return J;
  };
  p.D2F = [](const Vec&, const Vec&, const Vec&, const Vec&) { return Vec::Zero(2); };
  return p;
}

// L_h u + lambda (u - u^3) + eps e_j
ProblemDef make_ci_laplacian(int Ng, double eps) {
  auto L = std::make_shared<const Mat>(dirichlet_laplacian(Ng));
  const int j = asym_node(Ng);
  ProblemDef p;
  p.name = eps == 0.0 ? "chafee_infante" : "chafee_infante_asym";
  p.m = 1;
  p.N = Ng;
  p.F = [L, eps, j](const Vec& l, const Vec& u) -> Vec {
    Vec r = (*L) * u + l(0) * (u - u.cwiseProduct(u).cwiseProduct(u));
    if (eps != 0.0) r(j) += eps;
    return r;
  };
  p.DF = [L](const Vec& l, const Vec& u) -> Mat {
    const int n = static_cast<int>(u.size());
    Mat J(n, n + 1);
    J.col(0) = u - u.cwiseProduct(u).cwiseProduct(u);
    J.rightCols(n) = *L;
    J.rightCols(n).diagonal().array() += l(0) * (1.0 - 3.0 * u.array().square());
    return J;
  };
  p.D2F = [](const Vec& l, const Vec& u, const Vec& a, const Vec& b) -> Vec {
    const int n = static_cast<int>(u.size());
    const Vec wa = a.tail(n), wb = b.tail(n);
    const Eigen::ArrayXd g = 1.0 - 3.0 * u.array().square();
    return (a(0) * (g * wb.array()) + b(0) * (g * wa.array()) - 6.0 * l(0) * u.array() * wa.array() * wb.array()).matrix();
  };
  return p;
}

// Compact form in L2-scaled coordinates v = sqrt(h) u:
//   v - lambda K (v - v^3 / h) - eps sqrt(h) K e_j,  K = (-L_h)^{-1}.
// Same zero set and singular points as the Laplacian form, but a bounded
// operator, which keeps the projection differences small on every mode.
ProblemDef make_ci_compact(int Ng, double eps) {
  const double h = grid_spacing(Ng);
  Mat negL = -dirichlet_laplacian(Ng);
  auto K = std::make_shared<const Mat>(negL.llt().solve(Mat::Identity(Ng, Ng)));
  const int j = asym_node(Ng);
  const Vec bump = eps == 0.0 ? Vec::Zero(Ng) : Vec(eps * std::sqrt(h) * K->col(j));
  ProblemDef p;
  p.name = eps == 0.0 ? "chafee_infante" : "chafee_infante_asym";
  p.m = 1;
  p.N = Ng;
  p.F = [K, h, bump](const Vec& l, const Vec& v) -> Vec {
    const Vec s = v - v.cwiseProduct(v).cwiseProduct(v) / h;
    return v - l(0) * ((*K) * s) - bump;
  };
  p.DF = [K, h](const Vec& l, const Vec& v) -> Mat {
    const int n = static_cast<int>(v.size());
    Mat J(n, n + 1);
    J.col(0) = -((*K) * (v - v.cwiseProduct(v).cwiseProduct(v) / h));
    const Eigen::ArrayXd g = 1.0 - 3.0 * v.array().square() / h;
    J.rightCols(n) = -l(0) * ((*K) * g.matrix().asDiagonal());
    J.rightCols(n).diagonal().array() += 1.0;
    return J;
  };
  p.D2F = [K, h](const Vec& l, const Vec& v, const Vec& a, const Vec& b) -> Vec {
    const int n = static_cast<int>(v.size());
    const Eigen::ArrayXd wa = a.tail(n).array(), wb = b.tail(n).array();
    const Eigen::ArrayXd g = 1.0 - 3.0 * v.array().square() / h;
    const Eigen::ArrayXd inner = a(0) * g * wb + b(0) * g * wa - 6.0 * l(0) * v.array() * wa * wb / h;
    return -((*K) * inner.matrix());
  };
  return p;
}

}  // namespace

std::vector<std::string> registry_names() {
  return {"chafee_infante", "chafee_infante_asym", "linear", "ns_lite", "perturbed_pitchfork", "pitchfork", "transcritical"};
}

RegistryEntry registry(const std::string& name, const Params& params) {
  RegistryEntry e;
  e.name = name;
  e.params = params;
  auto origin_truth = [](std::string oracle) {
    KnownTruth t;
    t.point = PointLU{Vec::Zero(1), Vec::Zero(1)};
    t.oracle = std::move(oracle);
    return t;
  };
  if (name == "pitchfork") {
    e.problem = make_pitchfork(0.0);
    e.truth = origin_truth("DF(0,0) = 0");
  } else if (name == "transcritical") {
    e.problem = make_transcritical();
    e.truth = origin_truth("DF(0,0) = 0");
  } else if (name == "perturbed_pitchfork") {
    const double eps = param_double(params, "eps", 1e-3);
    e.problem = make_pitchfork(eps);
    KnownTruth t = origin_truth("unperturbed normal form, shift -eps");
    t.rho = Vec::Constant(1, -eps);
    e.truth = t;
  } else if (name == "linear") {
    e.problem = make_linear();
    KnownTruth t;
    t.point = PointLU{Vec::Zero(1), Vec::Zero(2)};
    t.oracle = "constant rank-one Jacobian";
    e.truth = t;
  } else if (name == "chafee_infante" || name == "chafee_infante_asym") {
    const int Ng = param_int(params, "N", 32);
    if (Ng < 2) throw Error(ErrorKind::BadParams, "chafee_infante needs N >= 2");
    const double eps = name == "chafee_infante" ? 0.0 : param_double(params, "eps", 1e-3);
    const std::string form = param_string(params, "form", "laplacian");
    if (form == "laplacian") e.problem = make_ci_laplacian(Ng, eps);
    else if (form == "compact") e.problem = make_ci_compact(Ng, eps);
    else throw Error(ErrorKind::BadParams, "chafee_infante form must be laplacian or compact");
    KnownTruth t;
    t.point = PointLU{Vec::Constant(1, tridiag_eigen_oracle(Ng).values(0)), Vec::Zero(Ng)};
    t.oracle = eps == 0.0 ? "smallest eigenvalue of the tridiagonal Dirichlet Laplacian"
                          : "singular point of the symmetric part; shift absorbs the bump";
    e.truth = t;
  } else if (name == "ns_lite") {
    const int res = param_int(params, "res", 8);
    const double amp = param_double(params, "amplitude", 1.0);
    const std::string kind = param_string(params, "forcing", "smooth");
    if (res < 4) throw Error(ErrorKind::BadParams, "ns_lite needs res >= 4");
    if (kind != "smooth" && kind != "rough") throw Error(ErrorKind::BadParams, "ns_lite forcing must be smooth or rough");
    e.problem = ns_problem(res, kind == "smooth" ? Forcing::Smooth : Forcing::Rough, amp);
  } else {
    throw Error(ErrorKind::UnknownName, "no registry entry named " + name);
  }
  return e;
}

}  // namespace bif
