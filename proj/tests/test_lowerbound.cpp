#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chameleon/exact.hpp"
#include "chameleon/lowerbound.hpp"

using namespace chameleon;

namespace {

int cost(const Graph& g, const std::vector<Vertex>& vs) {
  int s = 0;
  for (Vertex v : vs) s += std::abs(4 * g.coordinates(v)[0] - g.side());
  return s;
}

// Minimum of sum |4 v^1 - L| over k-subsets of the left half, by brute force.
int brute_min(const Graph& g, int k) {
  std::vector<Vertex> left;
  for (Vertex v = 0; v < g.vertex_count(); ++v)
    if (2 * g.coordinates(v)[0] < g.side()) left.push_back(v);
  const int n = static_cast<int>(left.size());
  int best = 1 << 30;
  std::vector<bool> take(static_cast<std::size_t>(n), false);
  std::fill(take.end() - k, take.end(), true);
  do {
    std::vector<Vertex> pick;
    for (int i = 0; i < n; ++i)
      if (take[static_cast<std::size_t>(i)]) pick.push_back(left[static_cast<std::size_t>(i)]);
    best = std::min(best, cost(g, pick));
  } while (std::next_permutation(take.begin(), take.end()));
  return best;
}

double binom(int n, int r) {
  if (r < 0 || r > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(r + 1.0) - std::lgamma(n - r + 1.0));
}

}  // namespace

TEST_CASE("half-space sets") {
  const Graph g = make_torus(8, 2);
  const auto h = half_space_sets(g);
  CHECK(h.S_set.size() == 3 * 8);
  CHECK(h.U_set.size() == 4 * 8);
  for (Vertex v : h.U_set) CHECK(g.coordinates(v)[0] >= 4);
  CHECK_THROWS_AS(half_space_sets(make_hypercube(3)), std::invalid_argument);
}

TEST_CASE("concentrated initial configuration") {
  CHECK(occupied_vertices(initial_config_concentrated(8, 1, 1)) == std::vector<Vertex>{2});
  CHECK(occupied_vertices(initial_config_concentrated(8, 1, 3)) == std::vector<Vertex>{1, 2, 3});
  const Graph g = make_torus(8, 2);
  const auto slab = occupied_vertices(initial_config_concentrated(8, 2, 8));
  REQUIRE(slab.size() == 8);
  for (Vertex v : slab) CHECK(g.coordinates(v)[0] == 2);
  CHECK_THROWS_AS(initial_config_concentrated(6, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(initial_config_concentrated(8, 1, 5), std::invalid_argument);

  for (int k = 1; k <= 4; ++k) {
    const Graph c8 = make_torus(8, 1);
    CHECK(cost(c8, occupied_vertices(initial_config_concentrated(8, 1, k))) == brute_min(c8, k));
  }
  for (int k = 1; k <= 3; ++k)
    CHECK(cost(g, occupied_vertices(initial_config_concentrated(8, 2, k))) == brute_min(g, k));
}

TEST_CASE("uniform baseline") {
  CHECK(uniform_baseline(8, 1) == doctest::Approx(0.5));
  CHECK(uniform_baseline(8, 2) == doctest::Approx(11.0 / 14.0));
  for (int n : {8, 16, 64})
    for (int k = 1; 2 * k <= n; ++k) {
      double direct = 0.0;
      for (int j = (k + 1) / 2; j <= k; ++j) direct += binom(n / 2, j) * binom(n / 2, k - j) / binom(n, k);
      CHECK(uniform_baseline(n, k) == doctest::Approx(direct).epsilon(1e-10));
      CHECK(uniform_baseline(n, k) >= 0.5 - 1e-12);
    }
  CHECK_THROWS_AS(uniform_baseline(7, 1), std::invalid_argument);
}

TEST_CASE("lower bound at t = 0") {
  const auto r = run_lowerbound(16, 1, 8, 0.0, 200, RngSeed{1});
  CHECK(r.estimate("P(N_t>=k/2)").point == 0.0);
  CHECK(r.estimate("E(N_t)").point == 0.0);
  CHECK(r.verdict("distinguished").pass);
}

TEST_CASE("mean occupation of U matches the walk kernel") {
  // A black ball's first coordinate is a rate-1 walk on the cycle.
  struct Case {
    int L, d, k;
    double t;
  };
  for (const auto& c : {Case{16, 1, 8, 7.68}, Case{8, 2, 8, 3.0}, Case{8, 1, 4, 1.0}}) {
    const Graph g = make_torus(c.L, c.d);
    const auto K = heat_kernel_cycle(c.L, c.t / 2);
    double expect = 0.0;
    for (Vertex v : occupied_vertices(initial_config_concentrated(c.L, c.d, c.k))) {
      const int x = g.coordinates(v)[0];
      for (int y = c.L / 2; y < c.L; ++y) expect += K[static_cast<std::size_t>(((y - x) % c.L + c.L) % c.L)];
    }
    const auto r = run_lowerbound(c.L, c.d, c.k, c.t, 10000, RngSeed{2});
    CHECK(r.estimate("E(N_t)").agrees_with(expect));
    CHECK(r.verdict("variance").pass);
    CHECK(r.verdict("chebyshev").pass);
  }
}

TEST_CASE("pinned lower bound instance is distinguished") {
  const auto r = run_lowerbound(16, 1, 8, 7.68, 10000, RngSeed{3});
  CHECK(r.estimate("baseline").point == doctest::Approx(uniform_baseline(16, 8)));
  CHECK(r.all_pass());
}

TEST_CASE("negative correlation") {
  const auto r = negative_correlation_check(16, 1, 8, 7.68, 10000, RngSeed{4});
  CHECK(r.verdicts.size() == 21);
  CHECK(r.all_pass());
  CHECK_THROWS_AS(negative_correlation_check(8, 1, 4, 1.0, 100, RngSeed{4}, 7), std::invalid_argument);

  // Near stationarity the occupations are those of a uniform k-subset.
  const int n = 8, k = 4;
  const auto u = negative_correlation_check(8, 1, k, 200.0, 40000, RngSeed{5}, 6);
  const double target = -static_cast<double>(k) * (n - k) / (n * n * (n - 1.0));
  double sum = 0.0, se = 0.0;
  for (const auto& e : u.estimates)
    if (e.name.rfind("cov(", 0) == 0) {
      sum += e.estimate.point;
      se = std::max(se, e.estimate.std_error);
    }
  CHECK(std::abs(sum / 6 - target) <= 3.0 * se);
}
