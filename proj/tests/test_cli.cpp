#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "weakkam/io.hpp"

namespace {

std::string data(const std::string& name) {
  return std::string(WEAKKAM_TEST_DATA_DIR) + "/" + name;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

struct cli_run {
  int status = -1;
  std::string out;
  std::string err;
};

// Shell out to the built binary, capturing both streams.  The env prefix
// lets tests exercise WEAKKAM_TOL without mutating this process.
cli_run run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const std::string base = "/tmp/weakkam_cli_" + std::to_string(::getpid()) + "_" +
                           std::to_string(counter++);
  const std::string out_path = base + ".out", err_path = base + ".err";
  std::string cmd;
  if (!env_prefix.empty()) cmd += env_prefix + " ";
  cmd += std::string(WEAKKAM_CLI_PATH) + " " + args + " > " + out_path + " 2> " + err_path;
  const int raw = std::system(cmd.c_str());
  cli_run r;
  r.status = WEXITSTATUS(raw);
  r.out = slurp(out_path);
  r.err = slurp(err_path);
  std::remove(out_path.c_str());
  std::remove(err_path.c_str());
  return r;
}

std::string temp_file(const std::string& suffix, const std::string& content) {
  static int counter = 0;
  const std::string path = "/tmp/weakkam_fixture_" + std::to_string(::getpid()) + "_" +
                           std::to_string(counter++) + suffix;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("critical command prints alpha and a witness cycle") {
  const auto r = run_cli("critical --input " + data("g2.json"));
  CHECK(r.status == 0);
  CHECK(r.out == "{\"alpha\": -2, \"witness\": [0, 1]}\n");

  // byte-identical across runs
  const auto again = run_cli("critical --input " + data("g2.json"));
  CHECK(again.out == r.out);

  // every mode agrees on the fixture
  for (const std::string mode : {"bisect", "brute"}) {
    const auto m = run_cli("critical --input " + data("g2.json") + " --mode " + mode);
    CHECK(m.status == 0);
    CHECK(m.out.find("\"alpha\": -2") != std::string::npos);
  }
}

TEST_CASE("usage and file errors exit 2, computation errors exit 1") {
  CHECK(run_cli("critical --input /nonexistent/missing.json").status == 2);
  CHECK(run_cli("critical").status == 2);               // missing required flag
  CHECK(run_cli("").status == 2);                       // no subcommand
  CHECK(run_cli("frobnicate --input x").status == 2);   // unknown subcommand
  CHECK(run_cli("critical --input " + data("g2.json") + " --mode junk").status == 2);
  CHECK(run_cli("--help").status == 0);

  const auto truncated = temp_file(".json", "{\"n\": 2,");
  CHECK(run_cli("critical --input " + truncated).status == 2);

  // parses fine but fails the strong-connectivity precondition
  const auto disconnected = temp_file(
      ".json", "{\"n\": 2, \"edges\": [{\"from\": 0, \"to\": 1, \"cost\": 1}]}");
  const auto r = run_cli("critical --input " + disconnected);
  CHECK(r.status == 1);
  CHECK(!r.err.empty());

  CHECK(run_cli("critical --input " + data("g2.json"), "WEAKKAM_TOL=abc").status == 2);
  CHECK(run_cli("critical --input " + data("g2.json"), "WEAKKAM_TOL=1e-6").status == 0);
}

TEST_CASE("weak-kam command emits value CSV for both signs") {
  const auto minus = run_cli("weak-kam --input " + data("g2.json"));
  CHECK(minus.status == 0);
  CHECK(minus.out == "state,value\n0,0\n1,-1\n");

  const auto plus = run_cli("weak-kam --input " + data("g2.json") + " --sign plus");
  CHECK(plus.status == 0);
  CHECK(plus.out == "state,value\n0,1\n1,0\n");
}

TEST_CASE("aubry command lists nodes and pairs") {
  const auto r = run_cli("aubry --input " + data("g2.json"));
  CHECK(r.status == 0);
  CHECK(r.out == "{\"nodes\": [0, 1], \"pairs\": [[0, 1], [1, 0]]}\n");
}

TEST_CASE("strict command emits values and an optional audit") {
  const auto plain = run_cli("strict --input " + data("g2.json"));
  CHECK(plain.status == 0);
  CHECK(plain.out == "state,value\n0,0.5\n1,-0.5\n");

  const auto audited = run_cli("strict --input " + data("g2.json") + " --audit");
  CHECK(audited.status == 0);
  CHECK(audited.out ==
        "state,value\n0,0.5\n1,-0.5\n"
        "{\"min_slack_off_aubry\": 2, \"max_abs_slack_on_aubry\": 0, \"pass\": true}\n");

  // with --output the CSV moves to the file and stdout keeps the audit
  const std::string out_path = temp_file(".csv", "");
  const auto split = run_cli("strict --input " + data("g2.json") + " --audit --output " + out_path);
  CHECK(split.status == 0);
  CHECK(slurp(out_path) == "state,value\n0,0.5\n1,-0.5\n");
  CHECK(split.out == "{\"min_slack_off_aubry\": 2, \"max_abs_slack_on_aubry\": 0, \"pass\": true}\n");
}

TEST_CASE("pin and regularize round value functions through CSV") {
  const auto pinned = run_cli("pin --input " + data("g3.json") + " --audit");
  CHECK(pinned.status == 0);
  CHECK(pinned.out.find("state,value\n") == 0);
  CHECK(pinned.out.find("\"pass\": true") != std::string::npos);

  // pinning an already strict function through --values leaves it alone
  const auto values = temp_file(".csv", "state,value\n0,0\n1,-1\n");
  const auto idem = run_cli("pin --input " + data("g2.json") + " --values " + values);
  CHECK(idem.status == 0);
  CHECK(idem.out == "state,value\n0,0\n1,-1\n");

  const auto incomplete = temp_file(".csv", "state,value\n0,0\n");
  CHECK(run_cli("pin --input " + data("g2.json") + " --values " + incomplete).status == 2);

  const auto reg = run_cli("regularize --input " + data("g3.json"));
  CHECK(reg.status == 0);
  CHECK(reg.out.find("state,value\n") == 0);
  const auto reg2 = run_cli("regularize --input " + data("g3.json"));
  CHECK(reg2.out == reg.out);
}

TEST_CASE("alpha-sweep emits the curve plus a shape audit") {
  const std::string cmd = "alpha-sweep --input " + data("c3.json") +
                          " --h-min -6 --h-max 6 --steps 13";
  const auto r = run_cli(cmd);
  CHECK(r.status == 0);
  CHECK(r.out.find("h,alpha\n-6,1\n") == 0);
  CHECK(r.out.find("\n0,-1\n") != std::string::npos);
  CHECK(r.out.find("\n6,1\n") != std::string::npos);
  CHECK(r.out.find("\"convexity_violations\": []") != std::string::npos);
  CHECK(r.out.find("\"minimizer\": [0]") != std::string::npos);
  CHECK(r.out.find("\"min_alpha\": -1") != std::string::npos);
  CHECK(r.out.find("\"superlinear_c\": [1, 5, 11]") != std::string::npos);
  CHECK(r.out.find("\"pass\": true") != std::string::npos);

  CHECK(run_cli(cmd).out == r.out);

  // sweeping a windingless graph is a computation error
  CHECK(run_cli("alpha-sweep --input " + data("g2.json") + " --h-min 0 --h-max 1").status == 1);
}

TEST_CASE("equivariant emits lifted values and a verdict") {
  const auto r = run_cli("equivariant --input " + data("c3.json") + " --h 3 --copies 3");
  CHECK(r.status == 0);
  CHECK(r.out.find("state,deck,value\n") == 0);
  // 9 lifted rows plus header plus report
  CHECK(r.out.find("\"alpha\": 0") != std::string::npos);
  CHECK(r.out.find("\"excluded_states\": 2") != std::string::npos);
  CHECK(r.out.find("\"generator_identity_ok\": true") != std::string::npos);
  CHECK(r.out.find("\"pass\": true") != std::string::npos);

  CHECK(run_cli("equivariant --input " + data("c3.json") + " --h 1 --copies 2").status == 1);
  CHECK(run_cli("equivariant --input " + data("c3.json") + " --h 1,2 --copies 3").status == 1);
}

TEST_CASE("lagrangian commands run from config files") {
  const std::string out_path = temp_file(".json", "");
  const auto r = run_cli("lagrangian-cost --input " + data("free.json") + " --output " + out_path);
  CHECK(r.status == 0);
  const auto sys = weakkam::load_system(out_path);
  CHECK(sys.n() == 8);
  CHECK(sys.winding_dim() == 1);
  CHECK(sys.cost(0, 2) == 0.03125);
  CHECK(sys.coords[1][0] == 0.125);

  const auto twist = run_cli("twist-audit --input " + data("free.json") + " --samples 16");
  CHECK(twist.status == 0);
  CHECK(twist.out.find("\"pass\": true") != std::string::npos);

  const auto star = run_cli("aubry-star --input " + data("free.json"));
  CHECK(star.status == 0);
  CHECK(star.out.find("\"nodes\": [0, 1, 2, 3, 4, 5, 6, 7]") != std::string::npos);
  CHECK(star.out.find("\"graph_property\": true") != std::string::npos);
}

TEST_CASE("audit command runs the whole property suite") {
  for (const std::string name : {"g2.json", "g3.json", "c3.json"}) {
    const auto r = run_cli("audit --input " + data(name));
    INFO(name << ": " << r.out);
    CHECK(r.status == 0);
    CHECK(r.out.find("\"properties\": [") != std::string::npos);
    CHECK(r.out.rfind("\"pass\": true}\n") == r.out.size() - 14);
  }

  const auto random = run_cli("audit --input " + data("g3.json") + " --random 5 --seed 7");
  CHECK(random.status == 0);
  CHECK(random.out.find("random_mixtures") != std::string::npos);
}
