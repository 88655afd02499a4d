#include "chameleon/lowerbound.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <stdexcept>

#include <boost/math/distributions/hypergeometric.hpp>
#include <fmt/format.h>

#include "chameleon/stats.hpp"

namespace chameleon {

HalfSpaceSets half_space_sets(const Graph& g) {
  if (g.kind() != GraphKind::torus) throw std::invalid_argument("half_space_sets: torus graphs only");
  const int L = g.side();
  HalfSpaceSets h;
  for (Vertex v = 0; v < g.vertex_count(); ++v) {
    const int c = g.coordinates(v)[0];
    if (8 * c >= L && 8 * c <= 3 * L) h.S_set.push_back(v);
    if (2 * c >= L) h.U_set.push_back(v);
  }
  return h;
}

ExclusionConfig initial_config_concentrated(int L, int d, int k) {
  if (L <= 0 || L % 8 != 0) throw std::invalid_argument(fmt::format("L = {} is not a positive multiple of 8", L));
  const Graph g = make_torus(L, d);
  const int n = g.vertex_count();
  if (k < 1 || 2 * k > n) throw std::invalid_argument(fmt::format("k = {} outside [1, n/2]", k));
  std::vector<int> slabs(static_cast<std::size_t>(L / 2));
  for (int c = 0; c < L / 2; ++c) slabs[static_cast<std::size_t>(c)] = c;
  std::stable_sort(slabs.begin(), slabs.end(),
                   [&](int a, int b) { return std::abs(4 * a - L) < std::abs(4 * b - L); });
  std::vector<Vertex> chosen;
  for (int c : slabs) {
    // Vertices with first coordinate c are c + L j in ascending order.
    for (Vertex v = c; v < n && static_cast<int>(chosen.size()) < k; v += L) chosen.push_back(v);
    if (static_cast<int>(chosen.size()) == k) break;
  }
  return make_exclusion_config(g, chosen);
}

double uniform_baseline(int n, int k) {
  if (n <= 0 || n % 2 != 0) throw std::invalid_argument("uniform_baseline: n must be positive and even");
  if (k < 1 || k > n) throw std::invalid_argument("uniform_baseline: k outside [1, n]");
  const unsigned need = static_cast<unsigned>((k + 1) / 2);  // N >= k/2
  boost::math::hypergeometric_distribution<double> h(static_cast<unsigned>(n / 2), static_cast<unsigned>(k),
                                                     static_cast<unsigned>(n));
  if (need == 0) return 1.0;
  return boost::math::cdf(boost::math::complement(h, need - 1));
}

namespace {

struct LowerBoundSetup {
  Graph g;
  std::vector<Vertex> blacks;  // ball ids (identity start)
  int L;
  int k;
};

LowerBoundSetup setup(int L, int d, int k) {
  const ExclusionConfig c = initial_config_concentrated(L, d, k);
  return {make_torus(L, d), occupied_vertices(c), L, k};
}

/// Vertices of the black balls after time t.
std::vector<Vertex> run_trial(const LowerBoundSetup& s, double t, RngSeed seed, std::size_t i) {
  Rng rng(seed, i);
  InterchangeState st(s.g);
  st.advance(t, rng);
  std::vector<Vertex> out;
  out.reserve(s.blacks.size());
  for (Vertex ball : s.blacks) out.push_back(st.position_of(ball));
  return out;
}

int count_in_U(const LowerBoundSetup& s, const std::vector<Vertex>& pos) {
  int N = 0;
  for (Vertex v : pos)
    if (2 * (v % s.L) >= s.L) ++N;
  return N;
}

/// Standard error of the sample variance, from the fourth central moment.
double variance_stderr(const std::vector<double>& xs, double mean, double var) {
  const double n = static_cast<double>(xs.size());
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - mean, 4);
  m4 /= n;
  return std::sqrt(std::max(0.0, m4 - var * var) / n);
}

void add_variance_verdict(ExperimentReport& rep, const std::vector<double>& N) {
  const RunningStats s = summarize(N);
  const double se_var = variance_stderr(N, s.mean(), s.variance());
  rep.add_estimate("E(N_t)", make_estimate(s));
  rep.add_estimate("var(N_t)", {s.variance(), se_var, s.count(), WeightKind::plain});
  const double se = std::hypot(se_var, s.stderr_of_mean());
  rep.add_verdict({"variance", "var(N_t)", s.mean() + 3.0 * se, "var(N_t) <= E(N_t) + 3 stderr",
                   s.variance() <= s.mean() + 3.0 * se});
}

void common_header(ExperimentReport& rep, const std::string& name, int L, int d, int k, double t,
                   std::size_t trials, RngSeed seed) {
  rep.experiment = name;
  rep.graph = fmt::format("torus:L={},d={}", L, d);
  rep.seed = seed.seed;
  rep.add_parameter("L", L);
  rep.add_parameter("d", d);
  rep.add_parameter("k", k);
  rep.add_parameter("t", t);
  rep.add_parameter("trials", static_cast<double>(trials));
}

}  // namespace

ExperimentReport run_lowerbound(int L, int d, int k, double t, std::size_t trials, RngSeed seed, Exec exec) {
  if (trials < 2) throw std::invalid_argument("run_lowerbound: need at least 2 trials");
  if (!(t >= 0)) throw std::invalid_argument("run_lowerbound: t must be >= 0");
  const LowerBoundSetup s = setup(L, d, k);
  const auto N = map_trials<double>(trials, exec, [&](std::size_t i) {
    return static_cast<double>(count_in_U(s, run_trial(s, t, seed, i)));
  });
  std::vector<double> hit(N.size());
  std::transform(N.begin(), N.end(), hit.begin(), [&](double x) { return 2.0 * x >= k ? 1.0 : 0.0; });

  ExperimentReport rep;
  common_header(rep, "lower-bound", L, d, k, t, trials, seed);
  const double baseline = uniform_baseline(s.g.vertex_count(), k);
  const WeightedEstimate p = make_estimate(summarize(hit));
  rep.add_estimate("P(N_t>=k/2)", p);
  rep.add_estimate("baseline", {baseline, 0.0, trials, WeightKind::plain});
  const double gap = baseline - p.point - 3.0 * p.std_error;
  rep.add_estimate("gap", {baseline - p.point, p.std_error, trials, WeightKind::plain});
  rep.add_verdict({"distinguished", "gap", 0.25, "baseline - P - 3 stderr > 1/4", gap > 0.25});

  add_variance_verdict(rep, N);
  const double EN = rep.estimate("E(N_t)").point;
  const double var = rep.estimate("var(N_t)").point;
  if (2.0 * EN < k) {
    const double bound = var / std::pow(k / 2.0 - EN, 2);
    rep.add_verdict({"chebyshev", "P(N_t>=k/2)", bound, "P - 3 stderr <= var / (k/2 - E N)^2",
                     p.point - 3.0 * p.std_error <= bound});
  } else {
    rep.add_verdict({"chebyshev", "P(N_t>=k/2)", 0.0, "vacuous (E N_t >= k/2)", true});
    rep.notes.push_back("E(N_t) >= k/2: Chebyshev check is vacuous");
  }
  return rep;
}

ExperimentReport negative_correlation_check(int L, int d, int k, double t, std::size_t trials, RngSeed seed,
                                            int pairs, Exec exec) {
  if (trials < 2) throw std::invalid_argument("negative_correlation_check: need at least 2 trials");
  if (pairs < 1) throw std::invalid_argument("negative_correlation_check: need at least one pair");
  const LowerBoundSetup s = setup(L, d, k);
  const auto U = half_space_sets(s.g).U_set;
  const long max_pairs = static_cast<long>(U.size()) * (static_cast<long>(U.size()) - 1) / 2;
  if (pairs > max_pairs) throw std::invalid_argument("negative_correlation_check: U has too few vertex pairs");

  std::mt19937_64 pick(splitmix64(seed.seed ^ 0x5a17ULL));
  std::set<std::pair<Vertex, Vertex>> chosen;
  while (static_cast<int>(chosen.size()) < pairs) {
    std::uniform_int_distribution<std::size_t> ix(0, U.size() - 1);
    Vertex a = U[ix(pick)], b = U[ix(pick)];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    chosen.insert({a, b});
  }
  const std::vector<std::pair<Vertex, Vertex>> vp(chosen.begin(), chosen.end());

  // Per trial: occupancy of every vertex of U (as a bitmap over n) and N_t.
  const auto occ = map_trials<std::vector<std::uint8_t>>(trials, exec, [&](std::size_t i) {
    std::vector<std::uint8_t> o(static_cast<std::size_t>(s.g.vertex_count()), 0);
    for (Vertex v : run_trial(s, t, seed, i)) o[static_cast<std::size_t>(v)] = 1;
    return o;
  });

  ExperimentReport rep;
  common_header(rep, "negative-correlation", L, d, k, t, trials, seed);
  const double n = static_cast<double>(trials);
  for (std::size_t q = 0; q < vp.size(); ++q) {
    const auto [u, v] = vp[q];
    double mu = 0, mv = 0;
    for (const auto& o : occ) {
      mu += o[static_cast<std::size_t>(u)];
      mv += o[static_cast<std::size_t>(v)];
    }
    mu /= n;
    mv /= n;
    std::vector<double> centered;
    centered.reserve(trials);
    for (const auto& o : occ) centered.push_back((o[static_cast<std::size_t>(u)] - mu) * (o[static_cast<std::size_t>(v)] - mv));
    const RunningStats cs = summarize(centered);
    const double cov = cs.mean() * n / (n - 1);
    const double se = cs.stderr_of_mean();
    const std::string name = fmt::format("cov({},{})", u, v);
    rep.add_estimate(name, {cov, se, trials, WeightKind::plain});
    rep.add_verdict({fmt::format("negative_correlation({},{})", u, v), name, 3.0 * se, "cov <= 3 stderr",
                     cov <= 3.0 * se});
  }

  std::vector<double> N;
  N.reserve(trials);
  for (const auto& o : occ) {
    int c = 0;
    for (Vertex v : U) c += o[static_cast<std::size_t>(v)];
    N.push_back(c);
  }
  add_variance_verdict(rep, N);
  return rep;
}

}  // namespace chameleon
