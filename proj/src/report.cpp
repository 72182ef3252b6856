#include "bifurcate/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bifurcate/errors.hpp"

namespace bif {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vec_list(const std::vector<Vec>& vs) {
  Json a = Json::array();
  for (const Vec& v : vs) a.push_back(to_json(v));
  return a;
}

Json mat_rows(const Mat& m) {
  Json a = Json::array();
  for (int i = 0; i < m.rows(); ++i) a.push_back(to_json(Vec(m.row(i).transpose())));
  return a;
}

}  // namespace

const char* library_version() { return BIFURCATE_VERSION; }

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line, section = "run";
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::BadParams, "config line " + std::to_string(lineno));
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::BadParams, "config line " + std::to_string(lineno));
    c[section + "." + trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::IoFailure, "cannot read config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

RunConfig merge_config(const RunConfig& base, const RunConfig& flags) {
  RunConfig out = base;
  for (const auto& [k, v] : flags) out[k] = v;
  return out;
}

Json config_json(const RunConfig& c) {
  Json j = Json::object();
  for (const auto& [k, v] : c) {
    const auto dot = k.find('.');
    j[k.substr(0, dot)][k.substr(dot + 1)] = v;
  }
  return j;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(num(v(i)));
  return a;
}

Json to_json(const ClassifyReport& r) {
  return Json{{"n", r.n},
              {"q", r.q},
              {"bifurcation", r.bifurcation},
              {"sigma_DF", to_json(r.sigma_DF)},
              {"sigma_DuF", to_json(r.sigma_DuF)},
              {"kernel_DF", vec_list(r.kernel_DF)},
              {"kernel_DuF", vec_list(r.kernel_DuF)},
              {"cokernel_DF", vec_list(r.cokernel_DF)},
              {"cokernel_DuF", vec_list(r.cokernel_DuF)},
              {"rtol_used", num(r.rtol_used)},
              {"residual", num(r.residual)},
              {"tol_res", num(r.tol_res)},
              {"rank_ambiguity", r.rank_ambiguity},
              {"fredholm_index_note", r.fredholm_index_note}};
}

Json to_json(const VerifyReport& r) {
  return Json{{"residual_S", num(r.residual_S)},
              {"sigma_min_DS", num(r.sigma_min_DS)},
              {"zero_components_max", num(r.zero_components_max)},
              {"passes", r.passes},
              {"implied_type", Json{{"n", r.implied_type.n}, {"q", r.implied_type.q}}}};
}

Json to_json(const Frames& f) {
  return Json{{"q", f.q},
              {"n", f.n},
              {"a_bars", mat_rows(f.a_bars.transpose())},
              {"b_bars", mat_rows(f.b_bars.transpose())},
              {"B", mat_rows(f.B)},
              {"Bbar", mat_rows(f.Bbar)},
              {"theta0", to_json(f.theta0)},
              {"rank_ambiguity", f.rank_ambiguity}};
}

Json to_json(const RecoveryResult& r) {
  Json j{{"lambda0", to_json(r.point.lambda)},
         {"u0", to_json(r.point.u)},
         {"rho", to_json(r.rho)},
         {"rho_norm", num(r.rho.norm())},
         {"theta0_shifted", to_json(r.theta0_shifted)},
         {"ext_state", to_json(r.ext_state.data)},
         {"kernel_DF", vec_list(r.kernels.DF)},
         {"kernel_DuF", vec_list(r.kernels.DuF)},
         {"iterations", r.iterations},
         {"frame_refreshes", r.frame_refreshes},
         {"residual_history", to_json(Vec(Eigen::Map<const Vec>(r.residual_history.data(),
                                                                 static_cast<Eigen::Index>(r.residual_history.size()))))},
         {"converged", r.converged},
         {"verify", to_json(r.verify)}};
  if (r.mu_w_prime.size() > 0) j["mu_w_prime"] = to_json(r.mu_w_prime);
  if (r.ball_checked) {
    j["within_ball"] = r.within_ball;
    j["distance_to_anchor_state"] = num(r.distance_to_anchor_state);
  }
  return j;
}

Json to_json(const Certificate& c) {
  return Json{{"gamma", num(c.gamma)},
              {"kappa", num(c.kappa)},
              {"kappa_is_upper_bound", true},
              {"L_eps", num(c.L_eps)},
              {"L_S_eps", num(c.L_S_eps)},
              {"epsilon", num(c.epsilon)},
              {"alpha", num(c.alpha)},
              {"a_hat", num(c.a_hat)},
              {"M", num(c.M)},
              {"c", num(c.c)},
              {"tau", num(c.tau)},
              {"a_star", num(c.a_star)},
              {"b_star", num(c.b_star)},
              {"delta", num(c.delta)},
              {"cond_contraction", c.cond_contraction},
              {"cond_gamma", c.cond_gamma},
              {"cond_delta", c.cond_delta},
              {"certified", c.certified()},
              {"rho_bound_1", num(c.rho_bound_1)},
              {"rho_bound_2", num(c.rho_bound_2)},
              {"sample_count", c.sample_count},
              {"axis_samples", c.axis_samples},
              {"seed", c.seed},
              {"radii_mode", radii_mode_name(c.radii_mode)}};
}

Json to_json(const TransferReport& t) {
  return Json{{"eta1", num(t.eta.eta1)},
              {"eta2", num(t.eta.eta2)},
              {"eta3", num(t.eta.eta3)},
              {"eta4", num(t.eta.eta4)},
              {"q_G1", num(t.q_G1)},
              {"q_G2", num(t.q_G2)},
              {"q_G", num(t.q_G)},
              {"q_H1", num(t.q_H1)},
              {"q_H2", num(t.q_H2)},
              {"q_H", num(t.q_H)},
              {"inv_norm_exact_G", num(t.inv_norm_exact_G)},
              {"inv_norm_bound_G", num(t.inv_norm_bound_G)},
              {"inv_norm_actual_G", num(t.inv_norm_actual_G)},
              {"inv_norm_exact_H", num(t.inv_norm_exact_H)},
              {"inv_norm_bound_H", num(t.inv_norm_bound_H)},
              {"inv_norm_actual_H", num(t.inv_norm_actual_H)},
              {"admissible", t.admissible},
              {"bounds_hold", t.bounds_hold}};
}

Json to_json(const StudyTable& t) {
  Json rows = Json::array();
  for (const StudyRow& r : t.rows) {
    Json j{{"h_label", num(r.h_label)},
           {"N_h", r.N_h},
           {"C_est", num(r.C_est)},
           {"transfer", to_json(r.transfer)},
           {"delta_h", num(r.delta_h)},
           {"rho_norm", num(r.rho_norm)},
           {"lambda0h", num(r.lambda0h)},
           {"gap", num(r.gap)},
           {"bound", num(r.bound)},
           {"type_n", r.type_n},
           {"type_q", r.type_q},
           {"recovered", r.recovered}};
    if (!r.error.empty()) j["error"] = r.error;
    rows.push_back(j);
  }
  return Json{{"rows", rows},
              {"eta2_decreasing", t.eta2_decreasing},
              {"eta4_decreasing", t.eta4_decreasing},
              {"delta_decreasing", t.delta_decreasing}};
}

Json to_json(const TraceResult& t) {
  Json br = Json::array();
  for (const Branch& b : t.branches)
    br.push_back(Json{{"tangent_index", b.tangent_index},
                      {"sign", b.sign},
                      {"tangent", to_json(b.tangent)},
                      {"points", static_cast<int>(b.points.size())}});
  return Json{{"start_lambda", to_json(t.start.lambda)},
              {"start_u", to_json(t.start.u)},
              {"start_residual", num(t.start_residual)},
              {"tangents", vec_list(t.tangents)},
              {"branches", br},
              {"directions", static_cast<int>(t.branches.size())},
              {"crossing_gap", num(crossing_gap(t))}};
}

Json make_report(const std::string& command, const RunConfig& config, Json result) {
  return Json{{"schema", 1},
              {"version", library_version()},
              {"command", command},
              {"config", config_json(config)},
              {"result", std::move(result)}};
}

std::string dump_report(const Json& j) { return j.dump(2) + "\n"; }

std::string trace_csv(const TraceResult& t) {
  std::ostringstream os;
  const int N = static_cast<int>(t.start.u.size());
  os << "s,lambda,norm_u";
  for (int i = 0; i < N; ++i) os << ",u" << i;
  os << '\n';
  char buf[64];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf;
  };
  for (const Branch& b : t.branches) {
    for (const BranchPoint& p : b.points) {
      put(p.s);
      os << ',';
      put(p.lambda(0));
      os << ',';
      put(p.u.norm());
      for (int i = 0; i < N; ++i) {
        os << ',';
        put(p.u(i));
      }
      os << '\n';
    }
  }
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoFailure, "cannot write " + path);
  f << content;
  if (!f) throw Error(ErrorKind::IoFailure, "write failed for " + path);
}

}  // namespace bif
