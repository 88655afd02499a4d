#include "chameleon/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "chameleon/analysis.hpp"
#include "chameleon/bounds.hpp"
#include "chameleon/exact.hpp"
#include "chameleon/graph.hpp"
#include "chameleon/lowerbound.hpp"
#include "chameleon/parallel.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/report.hpp"

namespace chameleon::cli {

nlohmann::ordered_json RunConfig::to_json() const {
  nlohmann::ordered_json j;
  j["subcommand"] = subcommand;
  j["graph"] = graph;
  j["parameters"] = parameters;
  j["seed"] = seed;
  j["trials"] = trials;
  j["output"] = output;
  j["tolerances"] = tolerances;
  return j;
}

std::vector<std::pair<std::string, std::string>> parse_config_file(std::istream& is) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return std::string();
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
  };
  while (std::getline(is, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument(fmt::format("config line {}: expected key = value", lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.rfind("--", 0) == 0) key = key.substr(2);
    if (key.empty()) throw std::invalid_argument(fmt::format("config line {}: empty key", lineno));
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

namespace {

/// A configuration problem detected after parsing (exit code 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

nlohmann::ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

template <class T>
nlohmann::ordered_json list(const std::vector<T>& xs) {
  nlohmann::ordered_json a = nlohmann::ordered_json::array();
  for (const auto& x : xs) a.push_back(x);
  return a;
}

/// Options shared by every leaf command.
struct Common {
  std::uint64_t seed = 0;
  std::string output;
  std::string config;
  int jobs = 0;
  std::size_t trials = 0;
  std::string graph;
};

/// One leaf command: its CLI11 app, required flags, and the action to run.
struct Leaf {
  CLI::App* app = nullptr;
  std::string path;
  std::vector<std::string> required;
  std::size_t default_trials = 0;
  std::function<int(RunConfig&, std::ostream&, std::ostream&)> run;
};

struct Output {
  std::ostream* os = nullptr;
  std::unique_ptr<std::ofstream> file;
};

Output open_output(const std::string& path, std::ostream& fallback) {
  Output o;
  if (path.empty() || path == "-") {
    o.os = &fallback;
    return o;
  }
  o.file = std::make_unique<std::ofstream>(path);
  if (!*o.file) throw UsageError(fmt::format("cannot open output file '{}'", path));
  o.os = o.file.get();
  return o;
}

void write_json(std::ostream& os, const nlohmann::ordered_json& j) { os << j.dump(2) << '\n'; }

int verdict_exit(const ExperimentReport& r) { return r.all_pass() ? kPass : kRuntime; }

ExperimentReport with_config(ExperimentReport r, const RunConfig& cfg) {
  r.run_config = cfg.to_json();
  return r;
}

void require_positive(double x, const char* name) {
  if (!(x > 0)) throw UsageError(fmt::format("--{} must be positive", name));
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateOpts {
  std::string process = "chameleon";
  int b = 0;
  int k = 1;
  double t = 0.0;
  std::string trace;
};

int cmd_simulate(const Common& c, const SimulateOpts& o, RunConfig& cfg, std::ostream& out) {
  const Graph g = parse_graph_spec(c.graph);
  if (!(o.t >= 0)) throw UsageError("--t must be >= 0");
  if (c.trials < 1) throw UsageError("--trials must be >= 1");
  cfg.parameters["process"] = o.process;
  cfg.parameters["t"] = o.t;
  if (o.process == "chameleon") cfg.parameters["b"] = o.b;
  if (o.process == "exclusion") cfg.parameters["k"] = o.k;
  if (!o.trace.empty()) cfg.parameters["trace"] = o.trace;
  if (o.process == "exclusion" && !o.trace.empty()) throw UsageError("--trace needs --process chameleon or interchange");

  const RngSeed seed{c.seed};
  const Exec exec = default_exec();
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  EventTrace first;
  if (o.process == "chameleon") {
    const ChameleonState st0 = initial_chameleon(g, o.b);
    struct Row {
      ColorCounts counts;
      std::size_t events = 0;
      std::size_t depinkings = 0;
    };
    std::vector<Row> res(c.trials);
    for_each_trial(c.trials, exec, [&](std::size_t i) {
      Rng rng(seed, i);
      ChameleonRun run = simulate_chameleon(g, st0, o.t, rng);
      res[i] = {run.state.counts(), run.trace.events.size(), run.trace.depink_times.size()};
      if (i == 0) first = std::move(run.trace);
    });
    for (std::size_t i = 0; i < res.size(); ++i) {
      const auto& cnt = res[i].counts;
      rows.push_back({{"trial", i},
                      {"events", res[i].events},
                      {"depinkings", res[i].depinkings},
                      {"r", cnt.r},
                      {"w", cnt.w},
                      {"p", cnt.p},
                      {"b", cnt.b},
                      {"S", num(cnt.S())}});
    }
  } else if (o.process == "interchange") {
    std::vector<InterchangeResult> res(c.trials);
    for_each_trial(c.trials, exec, [&](std::size_t i) {
      Rng rng(seed, i);
      res[i] = simulate_interchange(g, o.t, rng);
    });
    for (std::size_t i = 0; i < res.size(); ++i)
      rows.push_back({{"trial", i}, {"events", res[i].trace.events.size()}, {"position", list(res[i].position)}});
    first = std::move(res[0].trace);
  } else if (o.process == "exclusion") {
    if (o.k < 1 || o.k >= g.vertex_count()) throw UsageError("--k must lie in [1, n-1]");
    std::vector<Vertex> start(static_cast<std::size_t>(o.k));
    for (int i = 0; i < o.k; ++i) start[static_cast<std::size_t>(i)] = i;
    const ExclusionConfig c0 = make_exclusion_config(g, start);
    const auto res = map_trials<ExclusionConfig>(c.trials, exec, [&](std::size_t i) {
      Rng rng(seed, i);
      return simulate_exclusion(g, c0, o.t, rng);
    });
    for (std::size_t i = 0; i < res.size(); ++i)
      rows.push_back({{"trial", i}, {"occupied", list(occupied_vertices(res[i]))}});
  } else {
    throw UsageError(fmt::format("unknown --process '{}'", o.process));
  }

  if (!o.trace.empty()) {
    std::ofstream tf(o.trace);
    if (!tf) throw UsageError(fmt::format("cannot open trace file '{}'", o.trace));
    write_run_config_comment(tf, cfg.to_json());
    write_trace_csv(tf, first);
  }
  nlohmann::ordered_json j;
  j["schema"] = "chameleon.simulate/1";
  j["run_config"] = cfg.to_json();
  j["rows"] = rows;
  write_json(out, j);
  return kPass;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct Lemma1Opts {
  int b = 1;
  double t = 1.0;
  double tol = 1e-8;
  std::size_t cap = kDefaultStateCap;
};

int cmd_lemma1(const Common& c, const Lemma1Opts& o, RunConfig& cfg, std::ostream& out) {
  const Graph g = parse_graph_spec(c.graph);
  if (!(o.t >= 0)) throw UsageError("--t must be >= 0");
  cfg.parameters["b"] = o.b;
  cfg.parameters["t"] = o.t;
  cfg.parameters["cap"] = o.cap;
  cfg.tolerances["discrepancy"] = o.tol;
  const Lemma1Result r = verify_lemma1(g, o.b, o.t, 1e-13, {}, 1e-9, o.cap);
  ExperimentReport rep;
  rep.experiment = "verify-lemma1";
  rep.graph = c.graph;
  rep.seed = c.seed;
  rep.add_parameter("b", o.b);
  rep.add_parameter("t", o.t);
  rep.add_estimate("discrepancy", {r.max_discrepancy, 0.0, 0, WeightKind::plain});
  rep.add_estimate("conditioning_events", {static_cast<double>(r.conditioning_events), 0.0, 0, WeightKind::plain});
  rep.add_estimate("skipped_events", {static_cast<double>(r.skipped_events), 0.0, 0, WeightKind::plain});
  rep.add_verdict({"lemma1", "discrepancy", o.tol, "discrepancy <= tol", r.max_discrepancy <= o.tol});
  rep = with_config(std::move(rep), cfg);
  write_json(out, to_json(rep));
  return verdict_exit(rep);
}

struct Lemma12Opts {
  int n = 4;
  int k = 2;
  int pairs = 20;
  double zero_prob = 0.3;
  double slack = 1e-12;
};

int cmd_lemma12(const Common& c, const Lemma12Opts& o, RunConfig& cfg, std::ostream& out) {
  if (o.pairs < 1) throw UsageError("--pairs must be >= 1");
  if (o.k < 1 || o.k > o.n || o.n > 8) throw UsageError("need 1 <= k <= n <= 8");
  cfg.parameters["n"] = o.n;
  cfg.parameters["k"] = o.k;
  cfg.parameters["pairs"] = o.pairs;
  cfg.parameters["zero-prob"] = o.zero_prob;
  cfg.tolerances["slack"] = o.slack;
  ExperimentReport rep;
  rep.experiment = "verify-lemma12";
  rep.graph = "";
  rep.seed = c.seed;
  rep.add_parameter("n", o.n);
  rep.add_parameter("k", o.k);
  for (int i = 0; i < o.pairs; ++i) {
    Rng rng(RngSeed{c.seed}, static_cast<std::uint64_t>(i));
    const auto mu = random_tuple_distribution(o.n, o.k, o.zero_prob, rng);
    const auto nu = random_tuple_distribution(o.n, o.k, o.zero_prob, rng);
    const Lemma12Result r = lemma12_gap(mu, nu);
    const std::string name = fmt::format("gap[{}]", i);
    rep.add_estimate(fmt::format("lhs[{}]", i), {r.lhs, 0.0, 0, WeightKind::plain});
    rep.add_estimate(fmt::format("rhs[{}]", i), {r.rhs, 0.0, 0, WeightKind::plain});
    rep.add_estimate(name, {r.rhs - r.lhs, 0.0, 0, WeightKind::plain});
    rep.add_verdict({fmt::format("pair[{}]", i), name, -o.slack, "rhs - lhs >= -slack", r.rhs - r.lhs >= -o.slack});
  }
  rep = with_config(std::move(rep), cfg);
  write_json(out, to_json(rep));
  return verdict_exit(rep);
}

struct MartingaleOpts {
  int b = 0;
};

int cmd_martingale(const Common& c, const MartingaleOpts& o, RunConfig& cfg, std::ostream& out) {
  const Graph g = parse_graph_spec(c.graph);
  cfg.parameters["b"] = o.b;
  const ChameleonState st0 = initial_chameleon(g, o.b);
  const RngSeed seed{c.seed};
  std::vector<EventTrace> traces(c.trials);
  for_each_trial(c.trials, default_exec(), [&](std::size_t i) {
    Rng rng(seed, i);
    run_to_absorption(g, st0, rng, &traces[i]);
  });
  ExperimentReport rep = martingale_report(traces);
  rep.graph = c.graph;
  rep.seed = c.seed;
  rep.add_parameter("b", o.b);
  rep.add_parameter("trials", static_cast<double>(c.trials));
  rep = with_config(std::move(rep), cfg);
  write_json(out, to_json(rep));
  return verdict_exit(rep);
}

struct Prop9Opts {
  std::vector<int> d;
  std::vector<int> L;
  double reference = 0.0;
};

int cmd_prop9(const Common& c, const Prop9Opts& o, RunConfig& cfg, std::ostream& out) {
  for (int d : o.d)
    if (d < 1) throw UsageError("--d entries must be >= 1");
  for (int L : o.L)
    if (L < 2) throw UsageError("--L entries must be >= 2");
  cfg.parameters["d"] = list(o.d);
  cfg.parameters["L"] = list(o.L);
  if (o.reference > 0) cfg.tolerances["reference-D"] = o.reference;
  const Prop9Result r = prop9_grid(o.d, o.L);
  ExperimentReport rep;
  rep.experiment = "verify-prop9";
  rep.graph = "torus";
  rep.seed = c.seed;
  rep.add_estimate("D", {r.D, 0.0, r.entries.size(), WeightKind::plain});
  std::map<std::pair<int, int>, double> worst;
  for (const auto& e : r.entries) worst[{e.d, e.L}] = std::max(worst[{e.d, e.L}], e.ratio);
  for (const auto& [key, v] : worst)
    rep.add_estimate(fmt::format("max_ratio(d={},L={})", key.first, key.second), {v, 0.0, 0, WeightKind::plain});
  bool covered = true;
  for (const auto& e : r.entries) {
    const double logd = std::max(std::log(static_cast<double>(e.d)), 1.0);
    covered = covered && e.tau <= std::pow(e.eps, -2.0 / e.d) * r.D * logd * (1 + 1e-12);
  }
  rep.add_verdict({"bound", "D", r.D, "tau_eps <= eps^(-2/d) D logd+ on every grid point",
                   covered && std::isfinite(r.D) && r.D > 0});
  if (o.reference > 0)
    rep.add_verdict({"reference", "D", o.reference, "D <= reference", r.D <= o.reference});
  rep = with_config(std::move(rep), cfg);
  write_json(out, to_json(rep));
  return verdict_exit(rep);
}

struct Prop11Opts {
  int b = 0;
  std::vector<double> eps{1e-2, 1e-3};
  double slope_const = 5.0;
};

int cmd_prop11(const Common& c, const Prop11Opts& o, RunConfig& cfg, std::ostream& out) {
  const Graph g = parse_graph_spec(c.graph);
  for (double e : o.eps) require_positive(e, "eps");
  cfg.parameters["b"] = o.b;
  cfg.parameters["eps"] = list(o.eps);
  cfg.tolerances["slope-const"] = o.slope_const;
  const DepinkWait wait = depinking_wait_all(g, o.b);
  const auto pts = prop11_slopes(wait, wait.chain.start, o.eps);
  ExperimentReport rep;
  rep.experiment = "verify-prop11";
  rep.graph = c.graph;
  rep.seed = c.seed;
  rep.add_parameter("b", o.b);
  rep.add_estimate("states", {static_cast<double>(wait.chain.chain.size()), 0.0, 0, WeightKind::plain});
  rep.add_estimate("W(x)", {wait.W[static_cast<std::size_t>(wait.chain.start)], 0.0, 0, WeightKind::plain});
  for (const auto& p : pts) {
    const std::string e = format_number(p.eps);
    rep.add_estimate("slope(eps=" + e + ")", {p.slope, 0.0, 0, WeightKind::plain});
    rep.add_estimate("error(eps=" + e + ")", {p.error, 0.0, 0, WeightKind::plain});
    rep.add_verdict({"slope(eps=" + e + ")", "error(eps=" + e + ")", o.slope_const * p.eps,
                     "|slope + 1| <= slope_const * eps", p.error <= o.slope_const * p.eps});
  }
  rep = with_config(std::move(rep), cfg);
  write_json(out, to_json(rep));
  return verdict_exit(rep);
}

// ---------------------------------------------------------------------------
// mixing
// ---------------------------------------------------------------------------

struct MixingOpts {
  int d = 1;
  std::vector<int> L;
  std::vector<int> k;
  double threshold = 0.25;
  double precision = 1e-4;
  std::size_t cap = kDefaultStateCap;
};

int cmd_mixing(const Common&, const MixingOpts& o, RunConfig& cfg, std::ostream& out) {
  if (o.L.empty() || o.k.empty()) throw UsageError("empty grid: give --L and --k");
  cfg.parameters["d"] = o.d;
  cfg.parameters["L"] = list(o.L);
  cfg.parameters["k"] = list(o.k);
  cfg.parameters["cap"] = o.cap;
  cfg.tolerances["threshold"] = o.threshold;
  cfg.tolerances["precision"] = o.precision;

  struct Row {
    int L, k;
    int states;
    double mix, relax, ratio;
  };
  std::vector<Row> rows;
  for (int L : o.L)
    for (int k : o.k) {
      const Graph g = make_torus(L, o.d);
      if (k < 1 || k >= g.vertex_count()) throw UsageError(fmt::format("k = {} outside [1, n-1] for L = {}", k, L));
      const ExactChain ch = enumerate_exclusion(g, k, o.cap);
      const double mix = mixing_time_exact(ch, o.threshold, o.precision);
      const double relax = 1.0 / spectral_gap(ch);
      const double scale = static_cast<double>(L) * L * std::max(std::log(static_cast<double>(k)), 1.0);
      rows.push_back({L, k, ch.size(), mix, relax, mix / scale});
    }

  write_run_config_comment(out, cfg.to_json());
  out << "L,d,k,states,tau_mix,tau_relax,ratio\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{}\n", r.L, o.d, r.k, r.states, format_number(r.mix), format_number(r.relax),
                       format_number(r.ratio));

  std::vector<double> ratios;
  for (const auto& r : rows) ratios.push_back(r.ratio);
  std::vector<double> sorted = ratios;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t h = sorted.size() / 2;
  const double median = sorted.size() % 2 ? sorted[h] : 0.5 * (sorted[h - 1] + sorted[h]);
  double dev = 0.0;
  for (double x : ratios) dev = std::max(dev, std::abs(x / median - 1.0));
  out << fmt::format("# summary ratio_median={} ratio_max_rel_dev={}\n", format_number(median), format_number(dev));
  for (int L : o.L) {
    std::vector<double> x, y;
    for (const auto& r : rows)
      if (r.L == L) {
        x.push_back(std::log(static_cast<double>(r.k)));
        y.push_back(r.mix);
      }
    if (x.size() < 2) continue;
    const LinearFit f = fit_line(x, y);
    out << fmt::format("# summary L={} lnk_slope={} lnk_intercept={} r2={}\n", L, format_number(f.slope),
                       format_number(f.intercept), format_number(f.r_squared));
  }
  return kPass;
}

// ---------------------------------------------------------------------------
// lower-bound, bound-eval, absorb
// ---------------------------------------------------------------------------

struct LowerBoundOpts {
  int L = 16;
  int d = 1;
  int k = 8;
  std::vector<double> t_grid;
};

int cmd_lowerbound(const Common& c, const LowerBoundOpts& o, RunConfig& cfg, std::ostream& out) {
  if (o.t_grid.empty()) throw UsageError("--t-grid is empty");
  if (c.trials < 2) throw UsageError("--trials must be >= 2");
  cfg.graph = fmt::format("torus:L={},d={}", o.L, o.d);
  cfg.parameters["L"] = o.L;
  cfg.parameters["d"] = o.d;
  cfg.parameters["k"] = o.k;
  cfg.parameters["t-grid"] = list(o.t_grid);
  std::vector<ExperimentReport> reps;
  for (double t : o.t_grid) reps.push_back(run_lowerbound(o.L, o.d, o.k, t, c.trials, RngSeed{c.seed}));
  write_run_config_comment(out, cfg.to_json());
  out << "t,p_hat,stderr,baseline,gap,verdict,mean_N,var_N,variance_ok,chebyshev_ok\n";
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const auto& r = reps[i];
    const auto& p = r.estimate("P(N_t>=k/2)");
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", format_number(o.t_grid[i]), format_number(p.point),
                       format_number(p.std_error), format_number(r.estimate("baseline").point),
                       format_number(r.estimate("gap").point), r.verdict("distinguished").pass ? 1 : 0,
                       format_number(r.estimate("E(N_t)").point), format_number(r.estimate("var(N_t)").point),
                       r.verdict("variance").pass ? 1 : 0, r.verdict("chebyshev").pass ? 1 : 0);
  }
  return kPass;
}

struct BoundEvalOpts {
  double C = 1.0;
  double c = 1.0;
  std::vector<int> L;
  std::vector<int> d;
  std::vector<int> k;
  std::vector<int> b{0};
};

int cmd_bound_eval(const Common&, const BoundEvalOpts& o, RunConfig& cfg, std::ostream& out) {
  if (o.L.empty() || o.d.empty() || o.k.empty() || o.b.empty()) throw UsageError("empty grid");
  cfg.parameters["C"] = o.C;
  cfg.parameters["c"] = o.c;
  cfg.parameters["L"] = list(o.L);
  cfg.parameters["d"] = list(o.d);
  cfg.parameters["k"] = list(o.k);
  cfg.parameters["b"] = list(o.b);
  std::ostringstream body;
  std::vector<std::string> skipped;
  int valid = 0;
  for (int L : o.L)
    for (int d : o.d)
      for (int k : o.k)
        for (int b : o.b) {
          BoundParams p;
          p.C = o.C;
          p.c = o.c;
          p.L = L;
          p.d = d;
          p.k = k;
          p.b = b;
          try {
            p.validate();
          } catch (const std::invalid_argument& e) {
            skipped.push_back(fmt::format("# skipped L={} d={} k={} b={}: {}", L, d, k, b, e.what()));
            continue;
          }
          ++valid;
          const auto r = integral_decomposition(p);
          body << fmt::format("{},{},{},{},{},{},{},{},{}\n", L, d, k, b, format_number(r.I1), format_number(r.I2),
                              format_number(r.I3), format_number(r.total), format_number(theorem7_bound(p)));
        }
  if (valid == 0) throw UsageError("no valid (L, d, k, b) combination in the grid");
  write_run_config_comment(out, cfg.to_json());
  out << "L,d,k,b,I1,I2,I3,total,theorem7\n" << body.str();
  for (const auto& s : skipped) out << s << '\n';
  return kPass;
}

struct AbsorbOpts {
  int b = 0;
  std::string rows;
};

int cmd_absorb(const Common& c, const AbsorbOpts& o, RunConfig& cfg, std::ostream& out) {
  const Graph g = parse_graph_spec(c.graph);
  if (c.trials < 2) throw UsageError("--trials must be >= 2");
  cfg.parameters["b"] = o.b;
  if (!o.rows.empty()) cfg.parameters["rows"] = o.rows;
  const ChameleonState st0 = initial_chameleon(g, o.b);
  const RngSeed seed{c.seed};
  const auto res = map_trials<AbsorptionResult>(c.trials, default_exec(), [&](std::size_t i) {
    Rng rng(seed, i);
    return run_to_absorption(g, st0, rng);
  });
  std::vector<double> red, time, index;
  for (const auto& r : res) {
    red.push_back(r.absorbed == Color::red ? 1.0 : 0.0);
    time.push_back(r.absorption_time);
    index.push_back(r.absorption_index);
  }
  ExperimentReport rep;
  rep.experiment = "absorb";
  rep.graph = c.graph;
  rep.seed = c.seed;
  rep.add_parameter("b", o.b);
  rep.add_parameter("trials", static_cast<double>(c.trials));
  const WeightedEstimate pa = make_estimate(summarize(red));
  const double target = 1.0 / st0.m();
  rep.add_estimate("P(A)", pa);
  rep.add_estimate("absorption_time", make_estimate(summarize(time)));
  rep.add_estimate("absorption_index", make_estimate(summarize(index)));
  rep.add_verdict({"absorption", "P(A)", target, "|P(A) - 1/m| <= 3 stderr", pa.agrees_with(target)});
  rep = with_config(std::move(rep), cfg);

  if (!o.rows.empty()) {
    std::ofstream rf(o.rows);
    if (!rf) throw UsageError(fmt::format("cannot open rows file '{}'", o.rows));
    write_run_config_comment(rf, cfg.to_json());
    rf << "trial,absorbed,absorption_index,absorption_time\n";
    for (std::size_t i = 0; i < res.size(); ++i)
      rf << fmt::format("{},{},{},{}\n", i, res[i].absorbed == Color::red ? "red" : "white", res[i].absorption_index,
                        format_number(res[i].absorption_time));
  }
  write_json(out, to_json(rep));
  return kPass;
}

// ---------------------------------------------------------------------------
// Wiring
// ---------------------------------------------------------------------------

void add_common(CLI::App* app, Common& c, bool graph, bool trials, std::size_t default_trials = 0) {
  app->add_option("--seed", c.seed, fmt::format("Root seed (default: ${} or 1)", kSeedEnv));
  app->add_option("--output,-o", c.output, "Output file (default: stdout)");
  app->add_option("--config", c.config, "key = value file mirroring the flags");
  app->add_option("--jobs,-j", c.jobs, "Worker threads; 1 runs the serial reference")->check(CLI::NonNegativeNumber);
  if (graph) app->add_option("--graph", c.graph, "Graph spec, e.g. torus:L=8,d=2, hypercube:d=4, cycle:L=5, edges:file.txt");
  if (trials) app->add_option("--trials", c.trials, fmt::format("Independent trials (default: {})", default_trials));
}

/// Fills options the command line left unset from the config file.
void apply_config(CLI::App* app, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError(fmt::format("cannot open config file '{}'", path));
  for (const auto& [key, value] : parse_config_file(in)) {
    if (key == "config") throw UsageError("config files cannot include other config files");
    CLI::Option* opt = app->get_option_no_throw("--" + key);
    if (opt == nullptr) throw UsageError(fmt::format("config file: unknown key '{}' for '{}'", key, app->get_name()));
    if (opt->count() > 0) continue;
    opt->add_result(value);
    opt->run_callback();
  }
}

std::uint64_t seed_from_env() {
  const char* s = std::getenv(kSeedEnv);
  if (s == nullptr || *s == '\0') return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used, 0);
    if (used != std::string(s).size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw UsageError(fmt::format("{}='{}' is not an unsigned integer", kSeedEnv, s));
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Simulation and verification lab for the exclusion, interchange and chameleon processes",
               "chameleon");
  app.require_subcommand(1);
  app.fallthrough(false);

  Common common;
  std::vector<Leaf> leaves;

  SimulateOpts sim;
  auto* simulate = app.add_subcommand("simulate", "Simulate a process and write per-trial summaries");
  add_common(simulate, common, true, true, 1);
  simulate->add_option("--process", sim.process, "chameleon, interchange or exclusion")
      ->check(CLI::IsMember({"chameleon", "interchange", "exclusion"}))
      ->capture_default_str();
  simulate->add_option("--b", sim.b, "Black balls (chameleon)")->capture_default_str();
  simulate->add_option("--k", sim.k, "Black balls (exclusion)")->capture_default_str();
  simulate->add_option("--t", sim.t, "End time");
  simulate->add_option("--trace", sim.trace, "Write the event trace of trial 0 as CSV");
  leaves.push_back({simulate, "simulate", {"graph", "t"}, 1,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_simulate(common, sim, cfg, os); }});

  auto* verify = app.add_subcommand("verify", "Exact and statistical checks with named verdicts");
  verify->require_subcommand(1);

  Lemma1Opts l1;
  auto* lemma1 = verify->add_subcommand("lemma1", "Interchange red-ball law vs chameleon redness, given the blacks");
  add_common(lemma1, common, true, false);
  lemma1->add_option("--b", l1.b, "Black balls")->capture_default_str();
  lemma1->add_option("--t", l1.t, "Time")->capture_default_str();
  lemma1->add_option("--tol", l1.tol, "Maximum allowed discrepancy")->capture_default_str();
  lemma1->add_option("--cap", l1.cap, "State cap (exit 3 when exceeded)")->capture_default_str();
  leaves.push_back({lemma1, "verify lemma1", {"graph"}, 0,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_lemma1(common, l1, cfg, os); }});

  Lemma12Opts l12;
  auto* lemma12 = verify->add_subcommand("lemma12", "Prefix-conditioning TV bound on random tuple laws");
  add_common(lemma12, common, false, false);
  lemma12->add_option("--n", l12.n, "Vertices")->capture_default_str();
  lemma12->add_option("--k", l12.k, "Tuple length")->capture_default_str();
  lemma12->add_option("--pairs", l12.pairs, "Random distribution pairs")->capture_default_str();
  lemma12->add_option("--zero-prob", l12.zero_prob, "Chance a tuple gets no mass")->capture_default_str();
  lemma12->add_option("--slack", l12.slack, "Arithmetic slack")->capture_default_str();
  leaves.push_back({lemma12, "verify lemma12", {}, 0,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_lemma12(common, l12, cfg, os); }});

  MartingaleOpts mart;
  auto* martingale = verify->add_subcommand("martingale", "Depinking arithmetic, increments and absorption law");
  add_common(martingale, common, true, true, 1000);
  martingale->add_option("--b", mart.b, "Black balls")->capture_default_str();
  leaves.push_back({martingale, "verify martingale", {"graph"}, 1000, [&](RunConfig& cfg, std::ostream& os, std::ostream&) {
                      return cmd_martingale(common, mart, cfg, os);
                    }});

  Prop9Opts p9;
  auto* prop9 = verify->add_subcommand("prop9", "Fit D in tau_eps <= eps^(-2/d) D logd+");
  add_common(prop9, common, false, false);
  prop9->add_option("--d", p9.d, "Dimensions (comma separated)")->delimiter(',');
  prop9->add_option("--L", p9.L, "Side lengths (comma separated)")->delimiter(',');
  prop9->add_option("--reference", p9.reference, "Fail if the fitted D exceeds this value");
  leaves.push_back({prop9, "verify prop9", {"d", "L"}, 0,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_prop9(common, p9, cfg, os); }});

  Prop11Opts p11;
  auto* prop11 = verify->add_subcommand("prop11", "Finite-difference drift of the depinking wait");
  add_common(prop11, common, true, false);
  prop11->add_option("--b", p11.b, "Black balls")->capture_default_str();
  prop11->add_option("--eps", p11.eps, "Step sizes (comma separated)")->delimiter(',')->capture_default_str();
  prop11->add_option("--slope-const", p11.slope_const, "Allowed |slope + 1| / eps")->capture_default_str();
  leaves.push_back({prop11, "verify prop11", {}, 0, [&](RunConfig& cfg, std::ostream& os, std::ostream&) {
                      if (common.graph.empty()) common.graph = "cycle:L=3";
                      cfg.graph = common.graph;
                      return cmd_prop11(common, p11, cfg, os);
                    }});

  MixingOpts mix;
  auto* mixing = app.add_subcommand("mixing", "Exact mixing and relaxation times of the exclusion process");
  add_common(mixing, common, false, false);
  mixing->add_option("--d", mix.d, "Dimension")->capture_default_str();
  mixing->add_option("--L", mix.L, "Side lengths (comma separated)")->delimiter(',');
  mixing->add_option("--k", mix.k, "Black-ball counts (comma separated)")->delimiter(',');
  mixing->add_option("--threshold", mix.threshold, "TV threshold")->capture_default_str();
  mixing->add_option("--precision", mix.precision, "Relative bisection precision")->capture_default_str();
  mixing->add_option("--cap", mix.cap, "State cap (exit 3 when exceeded)")->capture_default_str();
  leaves.push_back({mixing, "mixing", {"L", "k"}, 0,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_mixing(common, mix, cfg, os); }});

  LowerBoundOpts lb;
  auto* lower = app.add_subcommand("lower-bound", "Half-space occupation test against the uniform baseline");
  add_common(lower, common, false, true, 10000);
  lower->add_option("--L", lb.L, "Side length (multiple of 8)");
  lower->add_option("--d", lb.d, "Dimension")->capture_default_str();
  lower->add_option("--k", lb.k, "Black balls");
  lower->add_option("--t-grid", lb.t_grid, "Times (comma separated)")->delimiter(',');
  leaves.push_back({lower, "lower-bound", {"L", "k", "t-grid"}, 10000, [&](RunConfig& cfg, std::ostream& os, std::ostream&) {
                      return cmd_lowerbound(common, lb, cfg, os);
                    }});

  BoundEvalOpts be;
  auto* bound = app.add_subcommand("bound-eval", "Tabulate the integral decomposition and the mixing bound");
  add_common(bound, common, false, false);
  bound->add_option("--C", be.C, "Constant of the mixing bound")->capture_default_str();
  bound->add_option("--c", be.c, "Constant of g")->capture_default_str();
  bound->add_option("--L", be.L, "Side lengths (comma separated)")->delimiter(',');
  bound->add_option("--d", be.d, "Dimensions (comma separated)")->delimiter(',');
  bound->add_option("--k", be.k, "Black-ball counts (comma separated)")->delimiter(',');
  bound->add_option("--b", be.b, "Black balls in the chameleon (comma separated)")->delimiter(',')->capture_default_str();
  leaves.push_back({bound, "bound-eval", {"L", "d", "k"}, 0, [&](RunConfig& cfg, std::ostream& os, std::ostream&) {
                      return cmd_bound_eval(common, be, cfg, os);
                    }});

  AbsorbOpts ab;
  auto* absorb = app.add_subcommand("absorb", "Run the chameleon process to absorption in batches");
  add_common(absorb, common, true, true, 1000);
  absorb->add_option("--b", ab.b, "Black balls")->capture_default_str();
  absorb->add_option("--rows", ab.rows, "Write per-trial rows as CSV");
  leaves.push_back({absorb, "absorb", {"graph"}, 1000,
                    [&](RunConfig& cfg, std::ostream& os, std::ostream&) { return cmd_absorb(common, ab, cfg, os); }});

  // CLI11 parses a reversed argument vector.
  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kUsage;
  }

  const Leaf* leaf = nullptr;
  for (const auto& l : leaves)
    if (l.app->parsed()) leaf = &l;
  if (leaf == nullptr) {
    err << app.help();
    return kUsage;
  }

  try {
    const auto seed_opt = leaf->app->get_option("--seed");
    if (!common.config.empty()) apply_config(leaf->app, common.config);
    for (const auto& r : leaf->required)
      if (leaf->app->get_option("--" + r)->count() == 0)
        throw UsageError(fmt::format("--{} is required", r));
    if (seed_opt->count() == 0) common.seed = seed_from_env();
    if (const auto* t = leaf->app->get_option_no_throw("--trials"); t != nullptr && t->count() == 0)
      common.trials = leaf->default_trials;

    if (common.jobs == 1) {
      set_default_exec(Exec::serial);
    } else {
      set_default_exec(Exec::openmp);
      set_thread_count(common.jobs);
    }

    RunConfig cfg;
    cfg.subcommand = leaf->path;
    cfg.graph = common.graph;
    cfg.seed = common.seed;
    cfg.trials = common.trials;
    cfg.output = common.output;
    Output o = open_output(common.output, out);
    const int code = leaf->run(cfg, *o.os, err);
    o.os->flush();
    if (!*o.os) {
      err << "error: failed writing output\n";
      return kRuntime;
    }
    return code;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << leaf->app->help();
    return kUsage;
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kCap;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

}  // namespace chameleon::cli
