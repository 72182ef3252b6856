#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bifurcate/problem.hpp"

namespace bif {

using Params = std::map<std::string, std::string>;

struct KnownTruth {
  PointLU point;
  int n = 1;
  int q = 1;
  Vec rho;  // shift under which `point` is a bifurcation point; empty means zero
  std::string oracle;
};

struct RegistryEntry {
  std::string name;
  Params params;
  ProblemDef problem;
  std::optional<KnownTruth> truth;
};

std::vector<std::string> registry_names();
RegistryEntry registry(const std::string& name, const Params& params = {});

struct TridiagEigen {
  double h = 0.0;
  Vec values;   // increasing
  Mat vectors;  // orthonormal columns, matching values
};

// Closed-form eigenpairs of -L_h, the second-difference Dirichlet operator on
// (0, pi) with Ng interior nodes.
TridiagEigen tridiag_eigen_oracle(int Ng);

Mat dirichlet_laplacian(int Ng);
double grid_spacing(int Ng);
int asym_node(int Ng);

// Parameter helpers shared with the CLI.
double param_double(const Params& p, const std::string& key, double fallback);
int param_int(const Params& p, const std::string& key, int fallback);
std::string param_string(const Params& p, const std::string& key, const std::string& fallback);

}  // namespace bif
