// Exercises the installed command-line binary end to end. The binary path
// arrives as the last command-line argument (wired up by ctest).

#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

namespace {

std::string g_binary;

struct RunResult {
  int exit_code;
  std::string stdout_text;
  std::string stderr_text;
};

RunResult run_cli(const std::string& args) {
  const std::string out = "cli_stdout.tmp";
  const std::string err = "cli_stderr.tmp";
  const std::string cmd = "\"" + g_binary + "\" " + args + " > " + out +
                          " 2> " + err;
  const int raw = std::system(cmd.c_str());
  const int code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  const auto slurp = [](const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
  };
  return RunResult{code, slurp(out), slurp(err)};
}

std::string slurp_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cols;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) cols.push_back(tok);
    rows.push_back(std::move(cols));
  }
  return rows;
}

}  // namespace

TEST_CASE("gallager command: headers, memory scaling, zero above capacity") {
  const RunResult one =
      run_cli("gallager --channel z:0.101 --rates 0.1:0.2:0.9 --memory 1");
  REQUIRE(one.exit_code == 0);
  auto rows = parse_csv(one.stdout_text);
  REQUIRE(rows.size() >= 2);
  CHECK(rows[0] ==
        std::vector<std::string>{"rate", "rho_star", "exponent", "input_0",
                                 "input_1"});

  const RunResult two =
      run_cli("gallager --channel z:0.101 --rates 0.1:0.2:0.9 --memory 2");
  REQUIRE(two.exit_code == 0);
  auto rows2 = parse_csv(two.stdout_text);
  REQUIRE(rows2.size() == rows.size());
  double prev = 1e300;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double e1 = std::stod(rows[r][2]);
    const double e2 = std::stod(rows2[r][2]);
    CHECK(e2 == doctest::Approx(2.0 * e1).epsilon(1e-10));
    CHECK(e1 <= prev + 1e-12);  // nonincreasing column
    prev = e1;
  }
  // 0.9 is above capacity (~0.76): exponent column exactly zero there.
  CHECK(std::stod(rows.back()[2]) == 0.0);
}

TEST_CASE("async command: slots ordering and oracle columns") {
  const std::string base =
      " --channel z:0.101 --rates 0.2:0.2:0.4 --restarts 6 --iterations 800"
      " --seed 5";
  const RunResult k3 = run_cli("async --slots 3" + base);
  const RunResult k5 = run_cli("async --slots 5" + base);
  REQUIRE(k3.exit_code == 0);
  REQUIRE(k5.exit_code == 0);
  const auto r3 = parse_csv(k3.stdout_text);
  const auto r5 = parse_csv(k5.stdout_text);
  CHECK(r3[0] == std::vector<std::string>{"rate", "exponent", "l_star",
                                          "branch", "solver_residual"});
  for (std::size_t r = 1; r < r3.size(); ++r) {
    CHECK(std::stod(r5[r][1]) <= std::stod(r3[r][1]) + 1e-6);
  }

  const RunResult with_oracle =
      run_cli("async --slots 3 --oracle" + base);
  REQUIRE(with_oracle.exit_code == 0);
  const auto ro = parse_csv(with_oracle.stdout_text);
  CHECK(ro[0].size() == 7);
  CHECK(ro[0][5] == "oracle");
  CHECK(ro[0][6] == "oracle_slack");
}

TEST_CASE("compare command emits two series and summary comments") {
  const RunResult res = run_cli(
      "compare --channel z:0.101 --slots 3 --rates 0.1:0.2:0.3 --restarts 4 "
      "--iterations 400 --seed 9");
  REQUIRE(res.exit_code == 0);
  const auto rows = parse_csv(res.stdout_text);
  CHECK(rows[0] == std::vector<std::string>{"plotted_rate", "forney_memory1",
                                            "async_scaled"});
  CHECK(rows.size() == 3);  // header + 2 data rows
  CHECK(res.stdout_text.find("# summary,max_low_rate_rel_gap=") !=
        std::string::npos);
  CHECK(res.stdout_text.find("# summary,high_rate_rel_gap=") !=
        std::string::npos);
  // Plotted rate is twice the per-window rate.
  CHECK(std::stod(rows[1][0]) == doctest::Approx(0.2));
}

TEST_CASE("simulate command reports stats as deterministic json") {
  const RunResult res = run_cli(
      "simulate --channel z:0.101 --half-block 4 --slots 3 --rate 0.125 "
      "--trials 300 --seed 11 --out sim_a.json");
  REQUIRE(res.exit_code == 0);
  const std::string a = slurp_file("sim_a.json");
  CHECK(a.find("\"frame_error_rate\"") != std::string::npos);
  CHECK(a.find("\"realized_rate\"") != std::string::npos);
  CHECK(a.find("wall") == std::string::npos);  // wall time only on stderr
  CHECK(res.stderr_text.find("wall_time_s=") != std::string::npos);
}

TEST_CASE("verify-packing command summarizes the counting check") {
  const RunResult res = run_cli(
      "verify-packing --half-block 2 --slots 3 --messages 2 --trials 10 "
      "--slack-exp 8 --seed 3 --summary-only");
  REQUIRE(res.exit_code == 0);
  CHECK(res.stdout_text.find("\"cells\"") != std::string::npos);
  CHECK(res.stdout_text.find("\"mean_pass_fraction\"") != std::string::npos);
  CHECK(res.stdout_text.find("\"delta_n\"") != std::string::npos);
  CHECK(res.stdout_text.find("rate_hypothesis_warning") != std::string::npos);
}

TEST_CASE("byte determinism under a fixed seed") {
  const std::vector<std::pair<std::string, std::string>> cases = {
      {"gallager --channel z:0.101 --rates 0.1:0.3:0.7 --seed 21",
       "det_gallager"},
      {"async --channel z:0.101 --slots 3 --rates 0.2:0.2:0.4 --restarts 4 "
       "--iterations 400 --seed 21",
       "det_async"},
      {"compare --channel z:0.101 --slots 3 --rates 0.15:0.2:0.35 --restarts 3 "
       "--iterations 300 --seed 21",
       "det_compare"},
      {"simulate --channel z:0.101 --half-block 4 --slots 3 --rate 0.125 "
       "--trials 200 --seed 21",
       "det_simulate"},
      {"verify-packing --half-block 2 --slots 3 --messages 2 --trials 10 "
       "--slack-exp 8 --seed 21",
       "det_packing"},
  };
  for (const auto& [args, stem] : cases) {
    CAPTURE(args);
    const RunResult first = run_cli(args + " --out " + stem + "_1.out");
    const RunResult second = run_cli(args + " --out " + stem + "_2.out");
    REQUIRE(first.exit_code == 0);
    REQUIRE(second.exit_code == 0);
    CHECK(slurp_file(stem + "_1.out") == slurp_file(stem + "_2.out"));
  }
}

TEST_CASE("channel spec files work and malformed input is diagnosed") {
  {
    std::ofstream spec("chan.json");
    spec << R"({"input_alphabet": 2, "output_alphabet": 2,
                "rows": [1.0, 0.0, 0.101, 0.899], "op": "xor"})";
  }
  const RunResult ok =
      run_cli("gallager --channel chan.json --rates 0.2:0.2:0.4");
  CHECK(ok.exit_code == 0);

  const RunResult bad = run_cli("gallager --channel z:oops --rates 0.2:0.2:0.4");
  CHECK(bad.exit_code != 0);
  CHECK(bad.stderr_text.find("error: channel-spec:") != std::string::npos);

  const RunResult bad_rows = run_cli(
      "gallager --channel '{\"input_alphabet\":1,\"output_alphabet\":2,"
      "\"rows\":[0.7,0.5]}' --rates 0.1:0.1:0.2");
  CHECK(bad_rows.exit_code != 0);
  CHECK(bad_rows.stderr_text.find("error: channel-spec:") != std::string::npos);

  const RunResult bad_grid =
      run_cli("gallager --channel z:0.1 --rates 0.5:-0.1:0.2");
  CHECK(bad_grid.exit_code != 0);
  CHECK(bad_grid.stderr_text.find("error: invalid-argument:") !=
        std::string::npos);

  const RunResult bad_cmd = run_cli("frobnicate");
  CHECK(bad_cmd.exit_code != 0);
  CHECK(bad_cmd.stderr_text.find("error: usage:") != std::string::npos);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: test_cli [doctest options] <exponent binary>\n");
    return 1;
  }
  g_binary = argv[argc - 1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv);
  return ctx.run();
}
