// Acceptance suite: one PASS/FAIL line per criterion; exits 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "chameleon/analysis.hpp"
#include "chameleon/bounds.hpp"
#include "chameleon/exact.hpp"
#include "chameleon/lowerbound.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/stats.hpp"

using namespace chameleon;

namespace {

// Pinned tolerances.
constexpr double kLemma1Tol = 1e-8;
constexpr double kZ = 3.0;                 // sigma multiplier for statistical checks
constexpr double kChiLevel = 1e-3;         // chi-square significance level
constexpr double kExactAgreement = 1e-8;   // exact vs exact laws
constexpr double kMixingFlatness = 0.25;   // |ratio / median - 1|
constexpr double kMixingR2 = 0.9;
constexpr double kProp9Stability = 1e-6;
constexpr double kLemma12Slack = 1e-12;
constexpr double kI1Tol = 1e-6;            // relative
constexpr double kProp11Const = 5.0;       // |slope + 1| <= kProp11Const * eps
constexpr double kLowerBoundT = 7.68;      // 0.03 L^2 for L = 16

struct Outcome {
  bool pass = false;
  std::string detail;
};

// ---------------------------------------------------------------------------

Outcome c1_lemma1() {
  double worst = 0.0;
  int instances = 0;
  for (const Graph& g : {make_cycle(4), make_cycle(5), make_path(4)})
    for (int b : {0, 1})
      for (double t : {0.3, 1.0, 3.0}) {
        worst = std::max(worst, verify_lemma1(g, b, t).max_discrepancy);
        ++instances;
      }
  return {worst <= kLemma1Tol, fmt::format("max discrepancy {:.3g} over {} instances (tol {:g})", worst, instances,
                                           kLemma1Tol)};
}

/// Traces of run_to_absorption shared by criteria 2 to 4.
struct AbsorptionBatch {
  std::string name;
  int m = 0;
  std::vector<EventTrace> traces;
  std::vector<double> red;
};

const std::vector<AbsorptionBatch>& absorption_batches() {
  static const std::vector<AbsorptionBatch> batches = [] {
    std::vector<AbsorptionBatch> out;
    struct Inst {
      const char* name;
      Graph g;
      int b;
      std::uint64_t seed;
    };
    for (const auto& in : {Inst{"cycle 5, b=0", make_cycle(5), 0, 201}, Inst{"cycle 6, b=1", make_cycle(6), 1, 202}}) {
      AbsorptionBatch batch;
      batch.name = in.name;
      const ChameleonState st0 = initial_chameleon(in.g, in.b);
      batch.m = st0.m();
      const std::size_t trials = 100000;
      batch.traces.resize(trials);
      batch.red.resize(trials);
      for_each_trial(trials, default_exec(), [&](std::size_t i) {
        Rng rng(RngSeed{in.seed}, i);
        batch.red[i] = run_to_absorption(in.g, st0, rng, &batch.traces[i]).absorbed == Color::red ? 1.0 : 0.0;
      });
      out.push_back(std::move(batch));
    }
    return out;
  }();
  return batches;
}

Outcome c2_absorption() {
  Outcome o{true, ""};
  for (const auto& b : absorption_batches()) {
    const WeightedEstimate e = make_estimate(summarize(b.red));
    const double target = 1.0 / b.m;
    const bool ok = e.agrees_with(target, kZ);
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}: P(A) = {:.4f} +- {:.4f} vs 1/m = {:.4f}; ", b.name, e.point, e.std_error, target);
  }
  return o;
}

Outcome c3_depinking() {
  Outcome o{true, ""};
  for (const auto& b : absorption_batches()) {
    std::size_t pairs = 0, bad = 0;
    for (const auto& tr : b.traces) {
      const auto r = tr.depinking_r_sequence();
      for (std::size_t j = 0; j + 1 < r.size(); ++j) {
        ++pairs;
        if (std::abs(r[j + 1] - r[j]) != delta(r[j], b.m)) ++bad;
      }
    }
    const ExperimentReport rep = martingale_report(b.traces);
    const bool ok = bad == 0 && pairs > 0 && rep.verdict("delta_rule").pass;
    o.pass = o.pass && ok;
    o.detail += fmt::format("{}: {} violations in {} depinking pairs; ", b.name, bad, pairs);
  }
  return o;
}

Outcome c4_martingale() {
  Outcome o{true, ""};
  int checks = 0, failed = 0;
  struct Inst {
    Graph g;
    int b;
  };
  for (const auto& in : {Inst{make_cycle(5), 0}, Inst{make_torus(3, 2), 1}}) {
    const ChameleonState st0 = initial_chameleon(in.g, in.b);
    const double s0 = st0.counts().s();
    for (double t : {0.5, 2.0, 8.0}) {
      const std::size_t trials = 40000;
      const RngSeed seed{static_cast<std::uint64_t>(400 + 10 * t + in.b)};
      const auto s = map_trials<double>(trials, default_exec(), [&](std::size_t i) {
        Rng rng(seed, i);
        return advance_chameleon(in.g, st0, t, rng).counts().s();
      });
      const WeightedEstimate es = make_estimate(summarize(s));
      const WeightedEstimate ew = conditional_mean_given_A(
          in.g, in.b, t, [](const ChameleonState&) { return 1.0; }, trials, RngSeed{seed.seed + 1});
      checks += 2;
      if (!es.agrees_with(s0, kZ)) ++failed;
      if (!ew.agrees_with(1.0, kZ)) ++failed;
    }
  }
  int inc_checks = 0, inc_failed = 0;
  for (const auto& b : absorption_batches()) {
    const ExperimentReport rep = martingale_report(b.traces);
    for (const auto& v : rep.verdicts)
      if (v.name.rfind("increments_r=", 0) == 0) {
        ++inc_checks;
        if (!v.pass) ++inc_failed;
      }
  }
  o.pass = failed == 0 && inc_failed == 0 && inc_checks > 0;
  o.detail = fmt::format("E(s_t) and E(weight): {}/{} within {}sigma; increment means: {}/{} within {}sigma",
                         checks - failed, checks, kZ, inc_checks - inc_failed, inc_checks, kZ);
  return o;
}

Outcome c5_consistency() {
  const Graph g = make_cycle(4);
  const double t = 1.0;
  const int n = 4;
  // Exact exclusion law.
  const ExactChain ex = enumerate_exclusion(g, 2);
  const std::vector<Vertex> start{0, 1};
  const DistVector de = transient_distribution(ex, point_mass(ex, ex.find(exclusion_key(n, start))), t);
  // Exact black-set marginal of the chameleon chain with the two black balls.
  const ChameleonChain ch = enumerate_chameleon(g, 2);
  const DistVector dc = transient_distribution(ch.chain, point_mass(ch.chain, ch.start), t);
  std::vector<double> marginal(static_cast<std::size_t>(ex.size()), 0.0);
  for (int i = 0; i < ch.chain.size(); ++i) {
    const auto& blacks = ch.decoded[static_cast<std::size_t>(i)].blacks;
    marginal[static_cast<std::size_t>(ex.find(exclusion_key(n, blacks)))] += dc[static_cast<std::size_t>(i)];
  }
  const double exact_gap = 2.0 * tv_distance(de, marginal);

  const std::size_t trials = 100000;
  auto counts_of = [&](auto&& black_set_of_trial) {
    std::vector<double> c(static_cast<std::size_t>(ex.size()), 0.0);
    const auto keys = map_trials<int>(trials, default_exec(), [&](std::size_t i) {
      return ex.find(exclusion_key(n, black_set_of_trial(i)));
    });
    for (int k : keys) c[static_cast<std::size_t>(k)] += 1.0;
    return c;
  };
  const ExclusionConfig c0 = make_exclusion_config(g, start);
  const auto obs_ex = counts_of([&](std::size_t i) {
    Rng rng(RngSeed{501}, i);
    return occupied_vertices(simulate_exclusion(g, c0, t, rng));
  });
  const auto obs_in = counts_of([&](std::size_t i) {
    Rng rng(RngSeed{502}, i);
    const auto r = simulate_interchange(g, t, rng);
    return std::vector<Vertex>{r.position[0], r.position[1]};
  });
  const ChameleonState st0 = initial_chameleon(g, 2);
  const auto obs_ch = counts_of([&](std::size_t i) {
    Rng rng(RngSeed{503}, i);
    return advance_chameleon(g, st0, t, rng).black_positions();
  });
  const double p1 = chi_square_gof(obs_ex, de).p_value;
  const double p2 = chi_square_gof(obs_in, de).p_value;
  const double p3 = chi_square_gof(obs_ch, de).p_value;
  const bool ok = exact_gap <= kExactAgreement && p1 > kChiLevel && p2 > kChiLevel && p3 > kChiLevel;
  return {ok, fmt::format("exact L1 gap {:.2g}; chi-square p: exclusion {:.3f}, interchange {:.3f}, chameleon {:.3f}",
                          exact_gap, p1, p2, p3)};
}

Outcome c6_mixing() {
  std::vector<double> ratio;
  for (int L : {4, 6, 8, 10, 12}) {
    const ExactChain ch = enumerate_exclusion(make_torus(L, 1), 2);
    ratio.push_back(mixing_time_exact(ch) / (static_cast<double>(L) * L));
  }
  std::vector<double> sorted = ratio;
  std::sort(sorted.begin(), sorted.end());
  const double median = sorted[2];
  double dev = 0.0;
  for (double r : ratio) dev = std::max(dev, std::abs(r / median - 1.0));

  std::vector<double> x, y;
  for (int k = 2; k <= 6; ++k) {
    const ExactChain ch = enumerate_exclusion(make_torus(12, 1), k);
    x.push_back(std::log(static_cast<double>(k)));
    y.push_back(mixing_time_exact(ch));
  }
  const LinearFit fit = fit_line(x, y);
  const bool ok = dev <= kMixingFlatness && fit.slope > 0 && fit.r_squared >= kMixingR2;
  return {ok, fmt::format("tau/L^2 median {:.4f}, max deviation {:.1f}%; L=12 tau vs ln k slope {:.3f}, R^2 {:.3f}",
                          median, 100 * dev, fit.slope, fit.r_squared)};
}

Outcome c7_prop9() {
  const std::vector<int> dims{2, 3}, sides{4, 6, 8};
  const Prop9Result a = prop9_grid(dims, sides);
  const Prop9Result b = prop9_grid(dims, sides);
  bool covered = true;
  for (const auto& e : a.entries) {
    const double logd = std::max(std::log(static_cast<double>(e.d)), 1.0);
    covered = covered && e.tau <= std::pow(e.eps, -2.0 / e.d) * a.D * logd * (1 + 1e-12);
  }
  const bool ok = covered && std::isfinite(a.D) && a.D > 0 && std::abs(a.D - b.D) <= kProp9Stability;
  return {ok, fmt::format("D = {:.12f} over {} grid points; rerun difference {:.1g}", a.D, a.entries.size(),
                          std::abs(a.D - b.D))};
}

Outcome c8_lemma2() {
  Outcome o{true, ""};
  const Graph g = make_cycle(4);
  for (double t : {0.5, 1.0}) {
    const double lhs = lemma2_lhs_exact(g, 1, t);
    const WeightedEstimate rhs = lemma2_rhs(g, 1, t, 100000, RngSeed{800 + static_cast<std::uint64_t>(10 * t)});
    const bool ok = lhs <= rhs.point + kZ * rhs.std_error;
    o.pass = o.pass && ok;
    o.detail += fmt::format("t={}: LHS {:.4f} <= RHS {:.4f} + 3*{:.4f}; ", t, lhs, rhs.point, rhs.std_error);
  }
  return o;
}

Outcome c9_lemma12() {
  int ok = 0;
  double worst = INFINITY;
  for (int i = 0; i < 20; ++i) {
    Rng rng(RngSeed{900}, static_cast<std::uint64_t>(i));
    const int n = 4 + i % 2, k = 2 + i % 2;
    const auto mu = random_tuple_distribution(n, k, 0.3, rng);
    const auto nu = random_tuple_distribution(n, k, 0.3, rng);
    const Lemma12Result r = lemma12_gap(mu, nu);
    worst = std::min(worst, r.rhs - r.lhs);
    if (r.lhs <= r.rhs + kLemma12Slack) ++ok;
  }
  return {ok == 20, fmt::format("{}/20 pairs with lhs <= rhs; min(rhs - lhs) = {:.3g}", ok, worst)};
}

Outcome c10_lowerbound() {
  const std::size_t trials = 10000;
  const ExperimentReport small = run_lowerbound(16, 1, 8, kLowerBoundT, trials, RngSeed{1001});
  const ExperimentReport large = run_lowerbound(16, 1, 8, 10.0 * 16 * 16, trials, RngSeed{1002});
  const ExperimentReport corr = negative_correlation_check(16, 1, 8, kLowerBoundT, trials, RngSeed{1003});
  const bool ok = small.verdict("distinguished").pass && small.verdict("variance").pass &&
                  !large.verdict("distinguished").pass && corr.all_pass();
  const auto& ps = small.estimate("P(N_t>=k/2)");
  const auto& pl = large.estimate("P(N_t>=k/2)");
  return {ok, fmt::format("t={}: P = {:.4f} +- {:.4f} vs baseline {:.4f}; t=2560: P = {:.4f} (verdict {}); "
                          "negative correlation and variance checks {}",
                          kLowerBoundT, ps.point, ps.std_error, small.estimate("baseline").point, pl.point,
                          large.verdict("distinguished").pass ? "true" : "false", corr.all_pass() ? "pass" : "fail")};
}

Outcome c11_bounds() {
  const double gam = gamma_const();
  const bool gamma_ok = gam > 0 && gam < std::sqrt(2.0) - 1 && (1 + gam) * (1 + gam) <= 2.0;

  std::size_t states = 0, violations = 0;
  double worst_ratio = 0.0;
  for (const Graph& g : {make_cycle(4), make_cycle(5), make_path(4)})
    for (int b : {0, 1}) {
      const DepinkWait wait = depinking_wait_all(g, b);
      BoundParams p;
      p.L = g.vertex_count();
      p.d = 1;
      p.k = std::max(1, g.vertex_count() / 2);
      p.b = b;
      p.c = calibrate_c(wait, p);
      const FZCheck chk = check_f_of_Z(wait, p);
      states += chk.states;
      violations += chk.violations;
      worst_ratio = std::max(worst_ratio, chk.worst_ratio);
    }

  double worst_i1 = 0.0;
  for (int d : {1, 2, 3})
    for (int L : {4, 8, 16})
      for (int k : {1, 2, 8}) {
        BoundParams p;
        p.L = L;
        p.d = d;
        p.k = k;
        if (2.0 * k > p.n()) continue;
        const auto r = integral_decomposition(p);
        worst_i1 = std::max(worst_i1, std::abs(r.I1 / r.I1_closed_form - 1.0));
      }
  const Lemma4Summary l4 = lemma4_spot_check(1000, 1101);
  const bool ok = gamma_ok && violations == 0 && states > 0 && worst_i1 <= kI1Tol && l4.violations == 0;
  return {ok, fmt::format("gamma = {:.17g}; f(Z) violations {}/{} (max f(Z)*4g(S) = {:.3f}); I1 rel. error {:.2g}; "
                          "lemma 4 violations {}/{}",
                          gam, violations, states, worst_ratio, worst_i1, l4.violations, l4.instances)};
}

Outcome c12_prop11() {
  const Graph g = make_cycle(3);
  std::vector<ChameleonExactState> starts;
  for (int rot = 0; rot < 3; ++rot) {
    ChameleonExactState s;
    s.colors = {Color::white, Color::white, Color::white};
    s.colors[static_cast<std::size_t>(rot)] = Color::red;
    starts.push_back(s);
  }
  const DepinkWait wait = depinking_wait(g, 0, starts);
  const std::vector<double> eps{1e-2, 1e-3};
  const auto pts = prop11_slopes(wait, wait.chain.start, eps);
  bool ok = wait.chain.chain.size() == 6;
  for (const auto& p : pts) ok = ok && p.error <= kProp11Const * p.eps;
  const double shrink = pts[0].error / pts[1].error;
  ok = ok && shrink >= 5.0 && shrink <= 20.0;
  return {ok, fmt::format("{} states; |slope+1| = {:.3g} at 1e-2, {:.3g} at 1e-3 (ratio {:.2f})",
                          wait.chain.chain.size(), pts[0].error, pts[1].error, shrink)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"Lemma 1 exactness", c1_lemma1},
      {"Absorption law", c2_absorption},
      {"Depinking arithmetic", c3_depinking},
      {"Martingale suite", c4_martingale},
      {"Exclusion/interchange/chameleon consistency", c5_consistency},
      {"Mixing-time scaling", c6_mixing},
      {"Heat-kernel grid constant", c7_prop9},
      {"Lemma 2 inequality", c8_lemma2},
      {"Lemma 12", c9_lemma12},
      {"Lower bound", c10_lowerbound},
      {"Bounds module", c11_bounds},
      {"Depinking-wait drift", c12_prop11},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    while (!o.detail.empty() && (o.detail.back() == ' ' || o.detail.back() == ';')) o.detail.pop_back();
    std::printf("%s %2zu %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
