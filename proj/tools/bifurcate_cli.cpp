#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "bifurcate/errors.hpp"
#include "bifurcate/report.hpp"
#include "bifurcate/testbeds.hpp"

using namespace bif;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNegative = 2;

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorKind::BadParams, "not a number list: '" + s + "'");
    }
  }
  return out;
}

std::string get(const RunConfig& c, const std::string& key, const std::string& fallback) {
  const auto it = c.find(key);
  return it == c.end() ? fallback : it->second;
}

double get_double(const RunConfig& c, const std::string& key, double fallback) {
  const auto it = c.find(key);
  if (it == c.end()) return fallback;
  const auto v = parse_list(it->second);
  if (v.size() != 1) throw Error(ErrorKind::BadParams, key + " must be a single number");
  return v[0];
}

int get_int(const RunConfig& c, const std::string& key, int fallback) {
  const double v = get_double(c, key, fallback);
  if (v != static_cast<int>(v)) throw Error(ErrorKind::BadParams, key + " must be an integer");
  return static_cast<int>(v);
}

bool get_bool(const RunConfig& c, const std::string& key, bool fallback) {
  const std::string v = get(c, key, fallback ? "true" : "false");
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error(ErrorKind::BadParams, key + " must be true or false");
}

RegistryEntry problem_of(const RunConfig& c) {
  Params params;
  for (const auto& [k, v] : c)
    if (k.rfind("problem.", 0) == 0 && k != "problem.name") params[k.substr(8)] = v;
  return registry(get(c, "problem.name", "pitchfork"), params);
}

PointLU anchor_of(const RunConfig& c, const RegistryEntry& e) {
  const auto it = c.find("run.anchor");
  if (it == c.end()) {
    if (!e.truth) throw Error(ErrorKind::BadParams, "no anchor given and the problem has no known point");
    return e.truth->point;
  }
  const auto v = parse_list(it->second);
  const int m = e.problem.m, N = e.problem.N;
  Vec z(m + N);
  if (static_cast<int>(v.size()) == m + N) {
    for (int i = 0; i < m + N; ++i) z(i) = v[i];
  } else if (static_cast<int>(v.size()) == m + 1) {
    for (int i = 0; i < m; ++i) z(i) = v[i];
    z.tail(N).setConstant(v[m]);
  } else {
    throw Error(ErrorKind::DimensionMismatch, "anchor needs m+N or m+1 values");
  }
  return PointLU::from_stacked(z, m);
}

TypeNQ type_of(const RunConfig& c, const RegistryEntry& e) {
  TypeNQ t = e.truth ? TypeNQ{e.truth->n, e.truth->q} : TypeNQ{1, 1};
  const auto it = c.find("run.type");
  if (it != c.end()) {
    const auto v = parse_list(it->second);
    if (v.size() != 2) throw Error(ErrorKind::BadParams, "type must be n,q");
    t = TypeNQ{static_cast<int>(v[0]), static_cast<int>(v[1])};
  }
  return t;
}

CertifyOptions certify_options(const RunConfig& c) {
  CertifyOptions o;
  o.epsilon = get_double(c, "certify.epsilon", o.epsilon);
  o.alpha = get_double(c, "certify.alpha", o.alpha);
  o.samples = get_int(c, "certify.samples", o.samples);
  o.seed = static_cast<unsigned>(get_int(c, "certify.seed", static_cast<int>(o.seed)));
  o.radii_mode = parse_radii_mode(get(c, "certify.radii_mode", "h_uniform"));
  return o;
}

void emit(const RunConfig& c, const std::string& command, Json result) {
  const std::string text = dump_report(make_report(command, c, std::move(result)));
  const std::string out = get(c, "output.json", "-");
  if (out == "-") std::cout << text;
  else write_file(out, text);
}

int run_list(const RunConfig& c) {
  Json names = Json::array();
  for (const auto& n : registry_names()) names.push_back(n);
  emit(c, "list", Json{{"problems", names}});
  return kExitOk;
}

int run_classify(const RunConfig& c) {
  const RegistryEntry e = problem_of(c);
  const PointLU pt = anchor_of(c, e);
  const double rtol = get_double(c, "run.rtol", kRankTol);
  const ClassifyReport r = classify(e.problem, pt, rtol);
  Json j = to_json(r);
  if (r.bifurcation) {
    const Frames fr = choose_frames(e.problem, pt, rtol);
    j["verify"] = to_json(verify_extended(e.problem, fr, build_extended_solution(e.problem, fr, pt)));
  }
  emit(c, "classify", j);
  return kExitOk;
}

int run_recover(const RunConfig& c) {
  const RegistryEntry e = problem_of(c);
  const PointLU anchor = anchor_of(c, e);
  const double rtol = get_double(c, "run.rtol", kRankTol);
  const Frames fr = choose_frames(e.problem, anchor, rtol, type_of(c, e));
  RecoveryOptions o;
  o.rtol = rtol;
  o.max_iter = get_int(c, "recover.max_iter", o.max_iter);
  o.alpha = get_double(c, "certify.alpha", o.alpha);
  Json j;
  bool certificate_ok = true;
  if (get_bool(c, "recover.functional", false)) {
    j = to_json(recover_functional(e.problem, fr, anchor, o));
  } else {
    std::optional<double> a_star;
    Json cert;
    if (get_bool(c, "recover.certify", false)) {
      const Certificate ce = certificate(e.problem, fr, anchor, certify_options(c));
      a_star = ce.a_star;
      cert = to_json(ce);
      certificate_ok = ce.certified();
    }
    j = to_json(recover(e.problem, fr, anchor, o, a_star));
    if (a_star) {
      j["certificate"] = cert;
      certificate_ok = certificate_ok && j["within_ball"].get<bool>();
    }
  }
  j["frames"] = to_json(fr);
  const bool ok = j["converged"].get<bool>() && certificate_ok;
  emit(c, "recover", j);
  return ok ? kExitOk : kExitNegative;
}

int run_certify(const RunConfig& c) {
  const RegistryEntry e = problem_of(c);
  const PointLU anchor = anchor_of(c, e);
  const double rtol = get_double(c, "run.rtol", kRankTol);
  const Frames fr = choose_frames(e.problem, anchor, rtol, type_of(c, e));
  const Certificate ce = certificate(e.problem, fr, anchor, certify_options(c));
  emit(c, "certify", to_json(ce));
  return ce.certified() ? kExitOk : kExitNegative;
}

int run_discretize(const RunConfig& c) {
  const std::string name = get(c, "problem.name", "chafee_infante");
  if (name != "chafee_infante") throw Error(ErrorKind::BadParams, "discretize supports chafee_infante only");
  const int fine = get_int(c, "discretize.fine", 64);
  std::vector<int> coarse;
  for (double v : parse_list(get(c, "discretize.coarse", "16,24,32,48"))) coarse.push_back(static_cast<int>(v));
  StudyOptions o;
  o.projected_B = get_bool(c, "discretize.projected_b", false);
  o.samples = get_int(c, "certify.samples", o.samples);
  o.seed = static_cast<unsigned>(get_int(c, "certify.seed", static_cast<int>(o.seed)));
  const StudyTable t = ci_h_study(fine, coarse, parse_projection_kind(get(c, "discretize.kind", "truncation")), o);
  const std::string csv = get(c, "output.csv", "");
  if (!csv.empty()) write_file(csv, study_csv(t));
  bool sound = true;
  for (const auto& r : t.rows) sound = sound && r.transfer.bounds_hold;
  emit(c, "discretize", to_json(t));
  return sound ? kExitOk : kExitNegative;
}

int run_trace(const RunConfig& c) {
  const RegistryEntry e = problem_of(c);
  const PointLU anchor = anchor_of(c, e);
  const double rtol = get_double(c, "run.rtol", kRankTol);
  const Frames fr = choose_frames(e.problem, anchor, rtol, type_of(c, e));
  const RecoveryResult rec = recover(e.problem, fr, anchor);
  const bool shift = get_bool(c, "trace.shift", true);
  const Vec rho = shift ? rec.rho : Vec(Vec::Zero(e.problem.N));
  const TraceResult t =
      trace_branches(e.problem, rho, rec.point, get_int(c, "trace.steps", 20), get_double(c, "trace.ds", 0.05));
  const std::string csv = get(c, "output.csv", "");
  if (!csv.empty()) write_file(csv, trace_csv(t));
  Json j = to_json(t);
  j["rho"] = to_json(rho);
  emit(c, "trace", j);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bifurcation classification, shift recovery and certificates"};
  app.require_subcommand(1);
  RunConfig flags;
  std::string config_path;

  auto flag = [&flags](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  // Boolean switches: a bare flag means true, and --flag=false is accepted.
  auto toggle = [&flags](CLI::App* sub, const std::string& name, const std::string& key, const std::string& help) {
    sub->add_flag_function(
        name, [&flags, key](std::int64_t v) { flags[key] = v > 0 ? "true" : "false"; }, help);
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Configuration file");
    flag(sub, "--out", "output.json", "JSON report path (default stdout)");
    flag(sub, "--problem", "problem.name", "Registry problem");
    flag(sub, "--eps", "problem.eps", "Perturbation size");
    flag(sub, "--N", "problem.N", "Grid size");
    flag(sub, "--form", "problem.form", "Chafee-Infante form: laplacian|compact");
    flag(sub, "--res", "problem.res", "NS-lite resolution");
    flag(sub, "--forcing", "problem.forcing", "NS-lite forcing: smooth|rough");
    sub->add_option_function<std::vector<std::string>>(
        "--param",
        [&flags](const std::vector<std::string>& kvs) {
          for (const auto& kv : kvs) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw CLI::ValidationError("--param", "expected key=value");
            flags["problem." + kv.substr(0, eq)] = kv.substr(eq + 1);
          }
        },
        "Extra problem parameter key=value");
    flag(sub, "--point,--anchor", "run.anchor", "Point or anchor, comma separated (lambda first)");
    flag(sub, "--rtol", "run.rtol", "Relative rank tolerance");
    flag(sub, "--type", "run.type", "Forced type n,q for frames");
    flag(sub, "--epsilon", "certify.epsilon", "Certificate ball radius");
    flag(sub, "--alpha", "certify.alpha", "Alpha in (0,1)");
    flag(sub, "--samples", "certify.samples", "Sample count");
    flag(sub, "--seed", "certify.seed", "Sampling seed");
  };

  app.add_subcommand("list", "List registry problems");
  common(app.get_subcommand("list"));
  auto* cl = app.add_subcommand("classify", "Classify a point");
  common(cl);
  auto* rc = app.add_subcommand("recover", "Recover the shift and bifurcation point");
  common(rc);
  toggle(rc, "--functional", "recover.functional", "Functional shift mode (true|false)");
  toggle(rc, "--certify", "recover.certify", "Also certify and check the ball (true|false)");
  flag(rc, "--max-iter", "recover.max_iter", "Gauss-Newton iteration cap");
  auto* ce = app.add_subcommand("certify", "Compute the certificate at an anchor");
  common(ce);
  flag(ce, "--radii-mode", "certify.radii_mode", "h_uniform|general");
  auto* di = app.add_subcommand("discretize", "Chafee-Infante transfer study");
  common(di);
  flag(di, "--fine", "discretize.fine", "Fine grid size");
  flag(di, "--coarse", "discretize.coarse", "Coarse grid sizes, comma separated");
  flag(di, "--kind", "discretize.kind", "truncation|injection|interpolation");
  toggle(di, "--projected-b", "discretize.projected_b", "Use transported borderings (true|false)");
  flag(di, "--csv", "output.csv", "CSV table path");
  auto* tr = app.add_subcommand("trace", "Recover, then trace the branches");
  common(tr);
  flag(tr, "--steps", "trace.steps", "Points per direction");
  flag(tr, "--ds", "trace.ds", "Arclength step");
  toggle(tr, "--shift", "trace.shift", "Apply the recovered shift (true|false)");
  flag(tr, "--csv", "output.csv", "CSV branch table path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    cfg = merge_config(cfg, flags);
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (cmd == "list") return run_list(cfg);
    if (cmd == "classify") return run_classify(cfg);
    if (cmd == "recover") return run_recover(cfg);
    if (cmd == "certify") return run_certify(cfg);
    if (cmd == "discretize") return run_discretize(cfg);
    return run_trace(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
