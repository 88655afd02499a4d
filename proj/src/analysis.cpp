#include "chameleon/analysis.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <fmt/format.h>

namespace chameleon {

namespace {

void require_trials(std::size_t trials, std::size_t minimum) {
  if (trials < minimum) throw std::invalid_argument(fmt::format("need at least {} trials, got {}", minimum, trials));
}

RunningStats reduce(const std::vector<double>& xs) { return summarize(xs); }

}  // namespace

WeightedEstimate conditional_mean_given_A(const Graph& g, int b, double t, const StateFunctional& h,
                                          std::size_t trials, RngSeed seed, std::span<const Vertex> placement,
                                          Exec exec) {
  require_trials(trials, 100);
  if (!(t >= 0)) throw std::invalid_argument("conditional_mean_given_A: t must be >= 0");
  const ChameleonState st0 = initial_chameleon(g, b, placement);
  const double s0 = st0.counts().s();
  const auto terms = map_trials<double>(trials, exec, [&](std::size_t i) {
    Rng rng(seed, i);
    const ChameleonState st = advance_chameleon(g, st0, t, rng);
    return st.counts().s() / s0 * h(st);
  });
  return make_estimate(reduce(terms), WeightKind::s_ratio);
}

WeightedEstimate lemma2_rhs(const Graph& g, int b, double t, std::size_t trials, RngSeed seed,
                            std::span<const Vertex> placement, Exec exec) {
  const int m = g.vertex_count() - b;
  const auto white_paint = [m](const ChameleonState& st) {
    const auto& c = st.counts();
    return (c.w + 0.5 * c.p) / m;
  };
  return conditional_mean_given_A(g, b, t, white_paint, trials, seed, placement, exec);
}

WeightedEstimate estimate_T1(const Graph& g, const ChameleonState& st0, std::size_t trials, RngSeed seed,
                             Exec exec) {
  require_trials(trials, 2);
  const ColorCounts c0 = st0.counts();
  if (c0.S() <= 0 || c0.S() >= c0.m()) throw std::invalid_argument("estimate_T1: start is absorbed (S in {0, m})");
  const auto times = map_trials<double>(trials, exec, [&](std::size_t i) {
    Rng rng(seed, i);
    ChameleonState st = st0;
    double t1 = std::numeric_limits<double>::quiet_NaN();
    run_chameleon(g, st, std::numeric_limits<double>::infinity(), rng, [&](const StepInfo& s) {
      if (!s.depink_coin) return true;
      t1 = s.time;
      return false;
    });
    return t1;
  });
  return make_estimate(reduce(times));
}

double DepinkWait::at(const ChameleonExactState& s) const {
  const int i = chain.chain.find(s.key());
  if (i < 0) throw std::out_of_range(fmt::format("state {} is not in the enumerated chain", s.key()));
  return W[static_cast<std::size_t>(i)];
}

DepinkWait depinking_wait(const Graph& g, int b, std::span<const ChameleonExactState> starts, std::size_t cap) {
  DepinkWait out;
  out.chain = enumerate_chameleon_from(g, b, starts, RecolorMode::pinken_only, cap);
  std::vector<int> target;
  for (int i = 0; i < out.chain.chain.size(); ++i)
    if (depinking_triggered(out.chain.counts(i))) target.push_back(i);
  if (target.empty()) {
    // Nothing ever depinks (for instance r = 0 everywhere).
    out.W.assign(static_cast<std::size_t>(out.chain.chain.size()), std::numeric_limits<double>::infinity());
    return out;
  }
  out.W = hitting_time_solve(out.chain.chain, target, true);
  return out;
}

double exact_T1(const Graph& g, const ChameleonState& st0, std::size_t cap) {
  const ChameleonExactState s = ChameleonExactState::from_state(st0);
  const DepinkWait w = depinking_wait(g, st0.b(), std::span<const ChameleonExactState>(&s, 1), cap);
  return w.at(s);
}

WeightedEstimate conflicting_edges_at(const Graph& g, const ChameleonState& st0, double tau_max,
                                      std::size_t trials, RngSeed seed, Exec exec) {
  require_trials(trials, 2);
  if (!(tau_max >= 0)) throw std::invalid_argument("conflicting_edges_at: tau_max must be >= 0");
  // 1 for balls of R_0, 2 for balls of W_0.
  std::vector<std::uint8_t> group(static_cast<std::size_t>(st0.n()), 0);
  for (int ball = 0; ball < st0.n(); ++ball) {
    const Color c = st0.color_of(ball);
    if (c == Color::red) group[static_cast<std::size_t>(ball)] = 1;
    if (c == Color::white) group[static_cast<std::size_t>(ball)] = 2;
  }
  const auto counts = map_trials<double>(trials, exec, [&](std::size_t i) {
    Rng rng(seed, i);
    const double tau = rng.uniform() * tau_max;
    InterchangeState st(g, st0.position());
    st.advance(tau, rng);
    int conflicting = 0;
    for (const Edge& e : g.edges()) {
      const auto a = group[static_cast<std::size_t>(st.ball_at(e.u))];
      const auto b = group[static_cast<std::size_t>(st.ball_at(e.v))];
      if (a && b && a != b) ++conflicting;
    }
    return static_cast<double>(conflicting);
  });
  return make_estimate(reduce(counts));
}

ExperimentReport martingale_report(std::span<const EventTrace> traces, std::size_t min_traces) {
  if (traces.size() < std::max<std::size_t>(min_traces, 1))
    throw std::invalid_argument(fmt::format("martingale_report: need at least {} traces, got {}", min_traces, traces.size()));
  if (!traces.front().initial) throw std::invalid_argument("martingale_report: traces must record initial counts");
  const int m = traces.front().initial->m();
  const int b = traces.front().initial->b;

  std::size_t pairs = 0, violations = 0, absorbed = 0, red = 0;
  std::map<int, RunningStats> increments;
  RunningStats absorbed_red;
  for (const auto& tr : traces) {
    if (!tr.initial || tr.initial->m() != m || tr.initial->b != b)
      throw std::invalid_argument("martingale_report: traces come from different (m, b)");
    std::vector<int> r = tr.depinking_r_sequence();
    // The +-Delta rule starts from a state without pink balls.
    if (tr.initial->p != 0) r.erase(r.begin());
    for (std::size_t j = 0; j + 1 < r.size(); ++j) {
      const int d = delta(r[j], m);
      ++pairs;
      if (r[j + 1] != r[j] + d && r[j + 1] != r[j] - d) ++violations;
      increments[r[j]].push(r[j + 1] - r[j]);
    }
    const int last = tr.depink_times.empty() ? tr.initial->r : tr.depinking_r_sequence().back();
    const bool pink_left = !tr.events.empty() && tr.events.back().counts_after && tr.events.back().counts_after->p > 0;
    if ((last == 0 || last == m) && !(tr.depink_times.empty() && tr.initial->p > 0) && !pink_left) {
      ++absorbed;
      if (last == m) ++red;
      absorbed_red.push(last == m ? 1.0 : 0.0);
    }
  }

  ExperimentReport rep;
  rep.experiment = "martingale";
  rep.add_parameter("m", m);
  rep.add_parameter("b", b);
  rep.add_parameter("traces", static_cast<double>(traces.size()));

  rep.add_estimate("delta_rule_violations", {static_cast<double>(violations), 0.0, pairs, WeightKind::plain});
  rep.add_verdict({"delta_rule", "delta_rule_violations", 0.0, "violations == 0", violations == 0});
  if (pairs == 0) rep.notes.push_back("no consecutive depinkings observed: delta_rule and increment checks are vacuous");

  for (const auto& [x, s] : increments) {
    const std::string name = fmt::format("increment_r={}", x);
    rep.add_estimate(name, make_estimate(s));
    rep.add_verdict({fmt::format("increments_r={}", x), name, 3.0, "|mean| <= 3 stderr",
                     std::abs(s.mean()) <= 3.0 * s.stderr_of_mean()});
  }

  rep.add_estimate("P(A)", make_estimate(absorbed_red));
  if (absorbed == 0) {
    rep.notes.push_back("no absorbed traces: absorption check is vacuous");
    rep.add_verdict({"absorption", "P(A)", 1.0 / m, "vacuous (no absorbed traces)", true});
  } else {
    const double p = static_cast<double>(red) / static_cast<double>(absorbed);
    const double se = absorbed_red.stderr_of_mean();
    rep.add_verdict({"absorption", "P(A)", 1.0 / m, "|P(A) - 1/m| <= 3 stderr", std::abs(p - 1.0 / m) <= 3.0 * se});
    if (absorbed < traces.size())
      rep.notes.push_back(fmt::format("{} of {} traces absorbed; P(A) uses absorbed traces only", absorbed, traces.size()));
  }
  return rep;
}

}  // namespace chameleon
