// Copyright 2026 The pwlopt Authors
// SPDX-License-Identifier: Apache-2.0

// Runs the pwl-bench binary on fixture files and checks output and exit codes.

#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path fixture_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("pwl_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string fixture(const std::string& name, const std::string& body) {
  const fs::path path = fixture_dir() / name;
  std::ofstream(path) << body;
  return path.string();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Result bench(const std::string& args) {
  const fs::path err = fixture_dir() / "stderr.txt";
  const std::string command = std::string(PWL_BENCH_PATH) + " " + args + " 2>" + err.string();
  Result r;
  std::FILE* pipe = ::popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

bool contains(const std::string& text, const std::string& part) {
  return text.find(part) != std::string::npos;
}

const std::string kInstance = "capacity,4\nv,s\n0.3,3\n0.2,2\n0.1,1\n";
const std::string kMatrix = "0,1,3,4\n1,0,4,3\n3,4,0,1.5\n4,3,1.5,0\n";

}  // namespace

TEST_CASE("knapsack subcommand") {
  const std::string inst = fixture("inst.csv", kInstance);
  const Result r = bench("knapsack -i " + inst + " --range 1 --search-eps 1e-6");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "selected: 0 2\n"));
  CHECK(contains(r.out, "loss: 3.6000000000000001\n"));
  CHECK(contains(r.out, "scaled_loss: 0.90000000000000002\n"));
  CHECK(contains(r.out, "feedback: [0.000000, 1.000000)\n"));
  CHECK(contains(r.out, "evaluations: "));

  const Result crit = bench("knapsack -i " + inst + " --range 1 --critical");
  CHECK(crit.code == 0);
  CHECK(contains(crit.out, "critical_value\n"));

  CHECK(bench("knapsack -i " + inst + " --rho 5 --range 1").code == 2);
  const std::string broken = fixture("broken.csv", "capacity,4\nv,s\n0.3,abc\n");
  const Result bad = bench("knapsack -i " + broken);
  CHECK(bad.code == 2);
  CHECK(contains(bad.err, "pwl-bench: "));
  CHECK(bench("knapsack -i /nonexistent/inst.csv").code != 0);
}

TEST_CASE("linkage subcommand") {
  const std::string matrix = fixture("d.csv", kMatrix);
  const std::string labels = fixture("labels.txt", "a\na\nb\nb\n");
  const Result r = bench("linkage -m " + matrix + " --rho 0.5 --labels " + labels + " --k 2");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "  4 = 0 + 1\n  5 = 2 + 3\n  6 = 4 + 5\n"));
  CHECK(contains(r.out, "cost: 0\n"));

  const Result cells = bench("linkage -m " + matrix + " --cells");
  CHECK(cells.code == 0);
  CHECK(cells.out == "[0.000000, 1.000000]\n");

  const std::string short_labels = fixture("short.txt", "a\nb\n");
  const Result mismatch = bench("linkage -m " + matrix + " --labels " + short_labels);
  CHECK(mismatch.code == 2);
  CHECK(contains(mismatch.err, "2 labels for 4 points"));
  CHECK(bench("linkage -m " + matrix + " --rho 1.5").code == 2);
}

TEST_CASE("run subcommand") {
  const std::string config = fixture("exp.toml",
                                     "env = \"knapsack\"\nT = [20]\nseeds = [1, 2]\n"
                                     "timing = false\n[knapsack]\nn = 4\n");
  const fs::path out = fixture_dir() / "regret.csv";
  const fs::path trace = fixture_dir() / "trace.csv";
  const Result r = bench("run -c " + config + " -o " + out.string() + " --trace " + trace.string());
  CHECK(r.code == 0);
  const std::string csv = slurp(out);
  CHECK(contains(csv, "seed,T,learner_loss,opt_loss,regret,us_per_round\n"));
  CHECK(contains(csv, "\n1,20,"));
  CHECK(contains(csv, "\n2,20,"));
  CHECK_FALSE(slurp(trace).empty());

  // The same run written to stdout is identical.
  const Result again = bench("run -c " + config);
  CHECK(again.out == csv);

  const Result overridden = bench("run -c " + config + " --T 10 --seeds 3 --no-timing");
  CHECK(overridden.code == 0);
  CHECK(contains(overridden.out, "\n3,10,"));
}

TEST_CASE("config errors exit with code 2") {
  const std::string syntax = fixture("syntax.toml", "env = \"knapsack\"\nT = [10,\n");
  const Result r = bench("run -c " + syntax);
  CHECK(r.code == 2);
  CHECK(contains(r.err, "syntax.toml:"));
  const std::string unknown = fixture("unknown.toml", "[knapsack]\nwidth = 3\n");
  CHECK(bench("run -c " + unknown).code == 2);
  CHECK(bench("run --T abc").code == 2);
  CHECK(bench("run --set colour=red").code == 2);
  CHECK(bench("run --set nonsense").code == 2);
  CHECK(bench("dispersion --env synthetic").code == 2);
}

TEST_CASE("dispersion subcommand") {
  const Result r = bench("dispersion --T 20 --seeds 1 --set dispersion.eps_count=2 --set knapsack.n=3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "epsilon,empirical_mean,empirical_stderr,bound_statement,bound_proof\n"));
  CHECK(contains(r.out, "fitted_additive_constant="));
}

TEST_CASE("densities subcommand") {
  const Result r = bench("densities --samples 100000 --kappa 2 --M 3 --B 3");
  CHECK(r.code == 0);
  CHECK(contains(r.out, "name,max_density,bound,allowed,pass\n"));
  CHECK_FALSE(contains(r.out, ",no\n"));
  CHECK(bench("densities --samples 10").code == 2);
}

TEST_CASE("usage errors") {
  CHECK(bench("").code != 0);
  CHECK(bench("frobnicate").code != 0);
  const Result v = bench("--version");
  CHECK(v.code == 0);
  CHECK_FALSE(v.out.empty());
}
