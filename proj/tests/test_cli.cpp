#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "chameleon/bounds.hpp"
#include "chameleon/cli.hpp"
#include "chameleon/exact.hpp"
#include "chameleon/report.hpp"

using namespace chameleon;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "chameleon_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable table(const std::string& s) {
  std::istringstream is(s);
  return read_csv_table(is);
}

// Worst TV to uniform of the single rate-1 walker on the cycle, by bisection on the kernel.
double single_walker_mixing(int L) {
  const auto tv = [&](double t) {
    const auto k = heat_kernel_cycle(L, t / 2);
    double s = 0.0;
    for (double x : k) s += std::abs(x - 1.0 / L);
    return 0.5 * s;
  };
  double lo = 0.0, hi = 1.0;
  while (tv(hi) > 0.25) hi *= 2;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (tv(mid) > 0.25 ? lo : hi) = mid;
  }
  return hi;
}

}  // namespace

TEST_CASE("config file parsing") {
  std::istringstream is("# comment\n\n graph = torus:L=4,d=1 \n--t=2\nL = 4,6\n");
  const auto kv = cli::parse_config_file(is);
  REQUIRE(kv.size() == 3);
  CHECK(kv[0].first == "graph");
  CHECK(kv[0].second == "torus:L=4,d=1");
  CHECK(kv[1].first == "t");
  CHECK(kv[2].second == "4,6");
  std::istringstream bad("graph\n");
  CHECK_THROWS_AS(cli::parse_config_file(bad), std::invalid_argument);
}

TEST_CASE("usage errors exit 2") {
  CHECK(run({}).code == cli::kUsage);
  CHECK(run({"frobnicate"}).code == cli::kUsage);
  const auto missing = run({"lower-bound", "--L", "16", "--k", "8"});
  CHECK(missing.code == cli::kUsage);
  CHECK(missing.err.find("--t-grid is required") != std::string::npos);
  CHECK(missing.err.find("Usage:") != std::string::npos);
  const auto graph = run({"simulate", "--graph", "nonsense", "--t", "1"});
  CHECK(graph.code == cli::kUsage);
  CHECK_FALSE(graph.err.empty());
  CHECK(run({"mixing", "--L", "4"}).code == cli::kUsage);
  CHECK(run({"bound-eval", "--L", "4", "--d", "1", "--k", "3"}).code == cli::kUsage);
  CHECK(run({"simulate", "--graph", "cycle:L=4", "--t", "-1"}).code == cli::kUsage);
  CHECK(run({"--help"}).code == cli::kPass);
}

TEST_CASE("simulate is deterministic and writes a parseable trace") {
  const auto trace = scratch("trace.csv");
  const std::vector<std::string> args{"simulate", "--graph", "torus:L=4,d=1", "--process", "chameleon", "--b", "0",
                                      "--t", "2", "--seed", "7", "--trace", trace.string()};
  const auto a = run(args);
  REQUIRE(a.code == cli::kPass);
  const std::string first_trace = slurp(trace);
  const auto b = run(args);
  CHECK(a.out == b.out);
  CHECK(slurp(trace) == first_trace);

  std::istringstream ts(first_trace);
  const EventTrace tr = read_trace_csv(ts);
  REQUIRE(tr.initial.has_value());
  CHECK(tr.initial->r == 1);
  const auto j = nlohmann::ordered_json::parse(a.out);
  CHECK(j["rows"][0]["events"].get<std::size_t>() == tr.events.size());
  CHECK(table(first_trace).run_config == j["run_config"]);

  auto serial = args;
  serial.insert(serial.end(), {"--jobs", "1"});
  CHECK(run(serial).out == a.out);
}

TEST_CASE("simulate rows") {
  for (const char* process : {"chameleon", "interchange", "exclusion"}) {
    const auto r = run({"simulate", "--graph", "cycle:L=5", "--process", process, "--t", "1", "--trials", "100",
                        "--k", "2", "--seed", "3"});
    REQUIRE(r.code == cli::kPass);
    const auto j = nlohmann::ordered_json::parse(r.out);
    CHECK(j["rows"].size() == 100);
    CHECK(j["run_config"]["trials"] == 100);
  }
  const auto one = run({"simulate", "--graph", "cycle:L=5", "--t", "1"});
  CHECK(nlohmann::ordered_json::parse(one.out)["rows"].size() == 1);
}

TEST_CASE("verify lemma1") {
  const auto r = run({"verify", "lemma1", "--graph", "torus:L=4,d=1", "--b", "1", "--t", "1"});
  CHECK(r.code == cli::kPass);
  const auto rep = report_from_json(nlohmann::ordered_json::parse(r.out));
  CHECK(rep.estimate("discrepancy").point <= 1e-8);
  CHECK(rep.verdict("lemma1").pass);
  CHECK(rep.run_config["subcommand"] == "verify lemma1");
  CHECK(to_json(rep).dump(2) + "\n" == r.out);

  CHECK(run({"verify", "lemma1", "--graph", "torus:L=4,d=1", "--b", "1", "--cap", "10"}).code == cli::kCap);
  CHECK(run({"verify", "lemma1", "--graph", "hypercube:d=4", "--b", "4"}).code == cli::kCap);
}

TEST_CASE("verify prop9, prop11, lemma12, martingale") {
  const auto p9 = run({"verify", "prop9", "--d", "2", "--L", "6"});
  CHECK(p9.code == cli::kPass);
  const std::vector<int> d{2}, L{6};
  CHECK(report_from_json(nlohmann::ordered_json::parse(p9.out)).estimate("D").point == prop9_grid(d, L).D);
  CHECK(run({"verify", "prop9", "--d", "2", "--L", "6", "--reference", "0.001"}).code == cli::kRuntime);

  const auto p11 = run({"verify", "prop11"});
  CHECK(p11.code == cli::kPass);
  CHECK(report_from_json(nlohmann::ordered_json::parse(p11.out)).run_config["graph"] == "cycle:L=3");

  CHECK(run({"verify", "lemma12", "--pairs", "20", "--seed", "5"}).code == cli::kPass);

  const auto m = run({"verify", "martingale", "--graph", "cycle:L=5", "--trials", "2000"});
  CHECK(m.code == cli::kPass);
  CHECK(run({"verify", "martingale", "--graph", "cycle:L=5", "--trials", "10"}).code == cli::kUsage);
}

TEST_CASE("mixing table") {
  const auto r = run({"mixing", "--d", "1", "--L", "4,6,8,10,12", "--k", "2"});
  REQUIRE(r.code == cli::kPass);
  const auto t = table(r.out);
  REQUIRE(t.rows.size() == 5);
  std::vector<double> ratio;
  for (const auto& row : t.rows) ratio.push_back(std::stod(row[t.column("ratio")]));
  std::vector<double> sorted = ratio;
  std::sort(sorted.begin(), sorted.end());
  for (double x : ratio) CHECK(std::abs(x / sorted[2] - 1.0) <= 0.25);
  CHECK(t.run_config["parameters"]["L"].size() == 5);

  const auto single = run({"mixing", "--L", "5,8", "--k", "1", "--precision", "1e-8"});
  REQUIRE(single.code == cli::kPass);
  const auto s = table(single.out);
  for (const auto& row : s.rows) {
    const int Lv = std::stoi(row[s.column("L")]);
    CHECK(std::stod(row[s.column("tau_mix")]) == doctest::Approx(single_walker_mixing(Lv)).epsilon(1e-6));
  }
}

TEST_CASE("bound-eval passes theorem7_bound through") {
  const auto r = run({"bound-eval", "--C", "1", "--L", "8", "--d", "2", "--k", "4"});
  REQUIRE(r.code == cli::kPass);
  const auto t = table(r.out);
  REQUIRE(t.rows.size() == 1);
  BoundParams p;
  p.L = 8;
  p.d = 2;
  p.k = 4;
  CHECK(std::stod(t.rows[0][t.column("theorem7")]) == theorem7_bound(p));
  CHECK(std::stod(t.rows[0][t.column("total")]) == integral_decomposition(p).total);
}

TEST_CASE("lower-bound golden output and seed sources") {
  const std::vector<std::string> args{"lower-bound", "--L", "16", "--k", "8", "--t-grid", "0,7.68",
                                      "--trials", "2000", "--seed", "3"};
  const auto r = run(args);
  REQUIRE(r.code == cli::kPass);
  CHECK(r.out == slurp(fs::path(CHAMELEON_TEST_DATA) / "lower_bound_seed3.csv"));
  auto serial = args;
  serial.insert(serial.end(), {"--jobs", "1"});
  CHECK(run(serial).out == r.out);

  const auto t = table(r.out);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][t.column("p_hat")] == "0");
  CHECK(t.rows[1][t.column("verdict")] == "1");

  // Config file fills unset flags; the command line wins.
  const auto cfg = scratch("lb.cfg");
  {
    std::ofstream f(cfg);
    f << "# pinned\nL = 16\nk = 8\nt-grid = 0,7.68\ntrials = 2000\nseed = 3\n";
  }
  const auto fromfile = run({"lower-bound", "--config", cfg.string()});
  CHECK(fromfile.code == cli::kPass);
  CHECK(table(fromfile.out).rows == t.rows);
  CHECK(run({"lower-bound", "--config", cfg.string(), "--seed", "4"}).out != r.out);

  ::setenv(cli::kSeedEnv, "3", 1);
  const auto env = run({"lower-bound", "--L", "16", "--k", "8", "--t-grid", "0,7.68", "--trials", "2000"});
  CHECK(table(env.out).rows == t.rows);
  ::setenv(cli::kSeedEnv, "x", 1);
  CHECK(run({"lower-bound", "--L", "16", "--k", "8", "--t-grid", "0", "--trials", "20"}).code == cli::kUsage);
  ::unsetenv(cli::kSeedEnv);

  {
    std::ofstream f(cfg);
    f << "bogus = 1\n";
  }
  CHECK(run({"lower-bound", "--config", cfg.string()}).code == cli::kUsage);
}

TEST_CASE("absorb and output files") {
  const auto out = scratch("absorb.json");
  const auto rows = scratch("absorb.csv");
  const auto r = run({"absorb", "--graph", "cycle:L=5", "--trials", "4000", "--seed", "2", "--output", out.string(),
                      "--rows", rows.string()});
  REQUIRE(r.code == cli::kPass);
  CHECK(r.out.empty());
  const auto rep = report_from_json(nlohmann::ordered_json::parse(slurp(out)));
  CHECK(rep.estimate("P(A)").agrees_with(0.2));
  const auto t = table(slurp(rows));
  CHECK(t.rows.size() == 4000);
  CHECK(t.run_config == rep.run_config);
}
