#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "chameleon/exact.hpp"
#include "chameleon/graph.hpp"
#include "chameleon/parallel.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/report.hpp"
#include "chameleon/rng.hpp"
#include "chameleon/stats.hpp"

namespace chameleon {

using StateFunctional = std::function<double(const ChameleonState&)>;

/// Estimates E(h(M_t) | A) as the mean of (s_t / s_0) h(M_t) over independent
/// chameleon runs from initial_chameleon(g, b, placement). trials >= 100.
WeightedEstimate conditional_mean_given_A(const Graph& g, int b, double t, const StateFunctional& h,
                                          std::size_t trials, RngSeed seed, std::span<const Vertex> placement = {},
                                          Exec exec = default_exec());

/// (1/m) E(w_t + p_t/2 | A).
WeightedEstimate lemma2_rhs(const Graph& g, int b, double t, std::size_t trials, RngSeed seed,
                            std::span<const Vertex> placement = {}, Exec exec = default_exec());

/// Sample mean of the first depinking time from st0. Requires S_0 not in {0, m}.
WeightedEstimate estimate_T1(const Graph& g, const ChameleonState& st0, std::size_t trials, RngSeed seed,
                             Exec exec = default_exec());

/// Expected time to the next depinking for every state of the pinkening-only
/// chain reachable from the given stored states.
struct DepinkWait {
  ChameleonChain chain;
  std::vector<double> W;

  /// W at a stored state; throws std::out_of_range if the state was not enumerated.
  double at(const ChameleonExactState& s) const;
};

DepinkWait depinking_wait(const Graph& g, int b, std::span<const ChameleonExactState> starts,
                          std::size_t cap = kDefaultStateCap);

/// Exact E(T_1) from st0 by a hitting-time solve.
double exact_T1(const Graph& g, const ChameleonState& st0, std::size_t cap = kDefaultStateCap);

/// Mean number of edges joining a ball of R_0 and a ball of W_0 at a time
/// tau ~ uniform[0, tau_max], the ball sets being frozen at time 0.
WeightedEstimate conflicting_edges_at(const Graph& g, const ChameleonState& st0, double tau_max,
                                      std::size_t trials, RngSeed seed, Exec exec = default_exec());

/// Depinking diagnostics over recorded traces (each must carry initial counts):
///  delta_rule      - every consecutive depinking pair moves r by exactly +-Delta(r)
///  increments_r=x  - mean increment after a depinking at r = x is 0 within 3 stderr
///  absorption      - fraction of red absorptions among absorbed traces is 1/m within 3 stderr
/// Throws std::invalid_argument on fewer than min_traces traces or mismatched (m, b).
ExperimentReport martingale_report(std::span<const EventTrace> traces, std::size_t min_traces = 1000);

}  // namespace chameleon
