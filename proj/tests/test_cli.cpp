#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args) {
  const std::string cmd = std::string(BIFURCATE_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* f = popen(cmd.c_str(), "r");
  REQUIRE(f != nullptr);
  char buf[4096];
  size_t k;
  while ((k = fread(buf, 1, sizeof buf, f)) > 0) r.out.append(buf, k);
  const int st = pclose(f);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir() {
  const fs::path d = fs::temp_directory_path() / "bifurcate_cli_test";
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("list") {
  const Run r = run("list");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["schema"] == 1);
  CHECK(j["command"] == "list");
  CHECK(j["result"]["problems"].size() == 7);
}

TEST_CASE("classify the pitchfork origin") {
  const Run r = run("classify --problem pitchfork --point 0,0");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["result"]["n"] == 1);
  CHECK(j["result"]["q"] == 1);
  CHECK(j["result"]["bifurcation"] == true);
  CHECK(j["config"]["problem"]["name"] == "pitchfork");
  CHECK(j.contains("version"));
}

TEST_CASE("recover the perturbed pitchfork") {
  const Run r = run("recover --problem perturbed_pitchfork --eps 1e-3 --anchor 0.05,0.05");
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  CHECK(j["result"]["converged"] == true);
  CHECK(std::abs(j["result"]["rho"][0].get<double>() + 1e-3) <= 1e-9);
}

TEST_CASE("certify exit codes") {
  const Run ok = run("certify --problem pitchfork --anchor 0,0");
  CHECK(ok.code == 0);
  CHECK(json::parse(ok.out)["result"]["certified"] == true);
  const Run far = run("certify --problem pitchfork --anchor 0.5,0.5");
  CHECK(far.code == 2);
  const json j = json::parse(far.out);
  CHECK(j["result"]["cond_delta"] == false);
  CHECK(j["result"]["seed"] == 7);
}

TEST_CASE("recover with a certificate") {
  const Run ok = run("recover --problem perturbed_pitchfork --eps 1e-4 --anchor 0,0 --certify");
  CHECK(ok.code == 0);
  const json j = json::parse(ok.out);
  CHECK(j["result"]["within_ball"] == true);
  CHECK(j["result"]["certificate"]["certified"] == true);
  CHECK(run("recover --problem perturbed_pitchfork --eps 1e-2 --anchor 0.3,0.3 --certify").code == 2);
}

TEST_CASE("errors exit with 1") {
  CHECK(run("classify --problem nope").code == 1);
  CHECK(run("classify --problem pitchfork --point 2,1").code == 1);
  CHECK(run("recover --problem pitchfork --anchor 0.5,0.5 --max-iter 1").code == 1);
  CHECK(run("frobnicate").code != 0);
  CHECK(run("certify --problem pitchfork --radii-mode sideways").code == 1);
}

TEST_CASE("determinism and report files") {
  const fs::path d = scratch_dir();
  const std::string base = "certify --problem perturbed_pitchfork --eps 1e-4 --anchor 0,0 --samples 32 --seed 3 --out ";
  // The output path is part of the embedded config, so both runs write the same file.
  CHECK(run(base + (d / "c.json").string()).code == 0);
  const std::string a = slurp(d / "c.json");
  fs::remove(d / "c.json");
  CHECK(run(base + (d / "c.json").string()).code == 0);
  CHECK(!a.empty());
  CHECK(a == slurp(d / "c.json"));
  CHECK(json::parse(a)["result"]["sample_count"] == 32);
}

TEST_CASE("config file with flags taking precedence") {
  const fs::path d = scratch_dir();
  {
    std::ofstream cfg(d / "run.cfg");
    cfg << "[problem]\nname = perturbed_pitchfork\neps = 0.01\n[run]\nanchor = 0.05,0.05\n";
  }
  const Run a = run("recover --config " + (d / "run.cfg").string());
  CHECK(a.code == 0);
  CHECK(std::abs(json::parse(a.out)["result"]["rho"][0].get<double>() + 0.01) <= 1e-9);
  const Run b = run("recover --config " + (d / "run.cfg").string() + " --eps 0.001");
  CHECK(b.code == 0);
  CHECK(std::abs(json::parse(b.out)["result"]["rho"][0].get<double>() + 0.001) <= 1e-9);
}

TEST_CASE("trace CSV schema") {
  const fs::path d = scratch_dir();
  const fs::path csv = d / "trace.csv";
  const Run r = run("trace --problem perturbed_pitchfork --eps 1e-3 --anchor 0.05,0.05 --steps 5 --csv " + csv.string());
  CHECK(r.code == 0);
  const json j = json::parse(r.out);
  const int directions = j["result"]["directions"];
  CHECK(directions == 4);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "s,lambda,norm_u,u0");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5 * directions);
  CHECK(j["result"]["crossing_gap"].get<double>() <= 1e-6);
}

TEST_CASE("discretize CSV schema") {
  const fs::path d = scratch_dir();
  const fs::path csv = d / "study.csv";
  const Run r = run("discretize --fine 32 --coarse 12,16,24 --csv " + csv.string());
  CHECK(r.code == 0);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "h_label,C_est,eta1,eta2,eta3,eta4,qG,qH,delta_h,rho_norm,lambda0h,gap,bound,type_n,type_q");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 3);
}
