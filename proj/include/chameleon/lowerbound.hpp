#pragma once

#include <cstddef>
#include <vector>

#include "chameleon/graph.hpp"
#include "chameleon/parallel.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/report.hpp"
#include "chameleon/rng.hpp"

namespace chameleon {

/// S = {L/8 <= v^1 <= 3L/8}, U = {L/2 <= v^1 < L}, v^1 being coordinate 0.
struct HalfSpaceSets {
  std::vector<Vertex> S_set;
  std::vector<Vertex> U_set;
};

HalfSpaceSets half_space_sets(const Graph& g);

/// k black vertices on torus(L, d) minimizing sum |v^1 - L/4| subject to
/// v^1 < L/2: slabs of equal first coordinate are filled in order of
/// |c - L/4| (ties to the smaller c), each slab in ascending vertex order.
/// Requires L % 8 == 0 and 1 <= k <= n/2.
ExclusionConfig initial_config_concentrated(int L, int d, int k);

/// P(N >= k/2) for N ~ Hypergeometric(n, k, n/2). Requires n even.
double uniform_baseline(int n, int k);

/// Runs the interchange process from the identity on torus(L, d); the black
/// balls are those starting on initial_config_concentrated(L, d, k).
/// Estimates P(N_t >= k/2), E N_t and var N_t; verdicts:
///  distinguished - baseline - P - 3 stderr > 1/4
///  variance      - var N_t <= E N_t + 3 stderr
///  chebyshev     - P - 3 stderr <= var / (k/2 - E N_t)^2 (vacuous when E N_t >= k/2)
ExperimentReport run_lowerbound(int L, int d, int k, double t, std::size_t trials, RngSeed seed,
                                Exec exec = default_exec());

/// Same dynamics; for `pairs` vertex pairs u != v of U drawn from the seed,
/// checks cov(X_t(u), X_t(v)) <= 3 stderr, plus the variance verdict.
ExperimentReport negative_correlation_check(int L, int d, int k, double t, std::size_t trials, RngSeed seed,
                                            int pairs = 20, Exec exec = default_exec());

}  // namespace chameleon
