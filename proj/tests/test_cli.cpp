#include "doctest.h"
#include "skewflow/cli.hpp"
#include "skewflow/error.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace skewflow;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "skewflow_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string write_spec(const std::string& name, const std::string& body) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << body;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(SKEWFLOW_CLI_PATH) + " " + args + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json report(const std::string& dir) { return Json::parse(slurp(scratch() / dir / "report.json")); }

const char* kRotation = R"({"operator": {"kind": "matrix", "data": [[0, 1], [-1, 0]]}})";
const char* kInterval = R"({"operator": {"kind": "minimal_derivative", "n": 32}})";

}  // namespace

TEST_CASE("analyze reports deficiency indices") {
  const std::string j = write_spec("j.json", kRotation);
  CHECK(cli("analyze --input " + j + " --out " + (scratch() / "a1").string()) == 0);
  const Json r = report("a1");
  CHECK(r["d_plus"] == 0);
  CHECK(r["d_minus"] == 0);
  const std::string m = write_spec("m.json", kInterval);
  CHECK(cli("analyze --input " + m + " --out " + (scratch() / "a2").string()) == 0);
  CHECK(report("a2")["d_minus"] == 2);
  CHECK(fs::exists(scratch() / "a2" / "deficiency.csv"));
}

TEST_CASE("witness on a maximal operator exits 2") {
  const std::string j = write_spec("j.json", kRotation);
  CHECK(cli("witness --input " + j + " --out " + (scratch() / "w1").string()) == 2);
  CHECK(report("w1")["error"] == "forward problem unique (d_minus = 0)");
}

TEST_CASE("witness and multiplicity on the minimal operator pass") {
  const std::string m = write_spec("m.json", kInterval);
  CHECK(cli("witness --input " + m + " --horizon 1 --t0 0.3 --out " + (scratch() / "w2").string()) == 0);
  CHECK(report("w2")["distance_exp_vs_semigroup"].get<double>() > 0.1);
  CHECK(cli("multiplicity --input " + m + " --horizon 1 --dt 2e-3 --out " + (scratch() / "mu").string()) == 0);
  CHECK(report("mu")["separation_relative"].get<double>() > 0.1);
}

TEST_CASE("verify and evolve write their artifacts") {
  const std::string m = write_spec("m.json", kInterval);
  CHECK(cli("verify --input " + m + " --horizon 1 --dt 1e-3 --method exact --out " + (scratch() / "v").string()) == 0);
  CHECK(fs::exists(scratch() / "v" / "residuals.csv"));
  CHECK(cli("evolve --input " + m + " --theta -1 --stride 10 --out " + (scratch() / "e").string()) == 0);
  CHECK(report("e")["trajectory"]["samples"] == 201);
}

TEST_CASE("transport-run and oracle-check") {
  const std::string t = write_spec("t.json", R"({"operator": {"kind": "transport", "rotation": 16}})");
  CHECK(cli("transport-run --input " + t + " --horizon 0.5 --dt 1e-2 --out " + (scratch() / "t").string()) == 0);
  const std::string h = write_spec("h.json", R"({"oracle": {"case": "halfline_left"}})");
  CHECK(cli("oracle-check --input " + h + " --out " + (scratch() / "h").string()) == 0);
  CHECK(report("h")["d_minus"] == 1);
}

TEST_CASE("runs are deterministic") {
  const std::string m = write_spec("m.json", kInterval);
  REQUIRE(cli("verify --input " + m + " --horizon 0.5 --seed 3 --out " + (scratch() / "d1").string()) == 0);
  REQUIRE(cli("verify --input " + m + " --horizon 0.5 --seed 3 --out " + (scratch() / "d2").string()) == 0);
  CHECK(slurp(scratch() / "d1" / "report.json") == slurp(scratch() / "d2" / "report.json"));
}

TEST_CASE("usage and spec errors exit 1") {
  const std::string j = write_spec("j.json", kRotation);
  CHECK(cli("nonsense --input " + j) == 1);
  CHECK(cli("analyze --input " + j + " --dt -1") == 1);
  CHECK(cli("analyze") == 1);
  const std::string bad = write_spec("bad.json", "{\"operator\": {\n  \"kind\": \"matrix\",\n  \"data\": [[0, 1], [2]]}}");
  std::ostringstream log;
  RunConfig cfg;
  cfg.command = "analyze";
  cfg.input = bad;
  cfg.output_dir = (scratch() / "bad").string();
  CHECK(run(cfg, log) == 1);
  CHECK(log.str().find("bad.json:3") != std::string::npos);
  CHECK(log.str().find("/operator/data/1") != std::string::npos);
}

TEST_CASE("spec parsing defaults") {
  const LoadedSpec s = parse_operator_spec(write_spec("m.json", kInterval));
  REQUIRE(s.op);
  CHECK(s.op->domain.size() == 30);
  CHECK(s.u0.size() == 32);
  const LoadedSpec f = parse_operator_spec(
      write_spec("f.json", R"({"operator": {"kind": "matrix", "data": [[0, 1], [-1, 0]]}, "domain": {"mode": "indices", "indices": [0]}})"));
  CHECK(f.op->domain.size() == 1);
  CHECK_THROWS_AS(parse_operator_spec(write_spec("k.json", R"({"operator": {"kind": "laplace"}})")), SpecError);
}
