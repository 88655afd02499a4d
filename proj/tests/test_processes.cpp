#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "chameleon/exact.hpp"
#include "chameleon/parallel.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/stats.hpp"

using namespace chameleon;

namespace {

std::vector<Color> parse_colors(const std::string& s) {
  std::vector<Color> out;
  for (char c : s) {
    switch (c) {
      case 'B': out.push_back(Color::black); break;
      case 'R': out.push_back(Color::red); break;
      case 'W': out.push_back(Color::white); break;
      case 'P': out.push_back(Color::pink); break;
      default: FAIL("bad color letter");
    }
  }
  return out;
}

}  // namespace

TEST_CASE("exclusion config validation") {
  const Graph g = make_cycle(6);
  const std::vector<Vertex> blacks{0, 3};
  const auto c = make_exclusion_config(g, blacks);
  CHECK(c.k == 2);
  CHECK(occupied_vertices(c) == blacks);
  validate_exclusion(g, c);
  ExclusionConfig bad = c;
  bad.occupancy[1] = 1;
  CHECK_THROWS_AS(validate_exclusion(g, bad), std::invalid_argument);
  const std::vector<Vertex> many{0, 1, 2, 3};
  CHECK_THROWS_AS(validate_exclusion(g, make_exclusion_config(g, many)), std::invalid_argument);
}

TEST_CASE("exclusion on a single edge") {
  const Graph g = make_hypercube(1);
  const std::vector<Vertex> start{0};
  const auto c0 = make_exclusion_config(g, start);
  Rng rng0(1);
  CHECK(simulate_exclusion(g, c0, 0.0, rng0) == c0);
  for (double t : {0.2, 0.7}) {
    const RngSeed seed{17};
    const std::size_t trials = 100000;
    const auto stay = map_trials<double>(trials, Exec::openmp, [&](std::size_t i) {
      Rng rng(seed, i);
      return simulate_exclusion(g, c0, t, rng).occupancy[0] ? 1.0 : 0.0;
    });
    const auto est = make_estimate(summarize(stay));
    CHECK(est.agrees_with(0.5 * (1.0 + std::exp(-2.0 * t))));
  }
}

TEST_CASE("exclusion on cycle 4 reaches uniform") {
  const Graph g = make_cycle(4);
  const std::vector<Vertex> start{0, 1};
  const auto c0 = make_exclusion_config(g, start);
  const RngSeed seed{5};
  const std::size_t trials = 60000;
  const auto keys = map_trials<std::string>(trials, Exec::openmp, [&](std::size_t i) {
    Rng rng(seed, i);
    return exclusion_key(simulate_exclusion(g, c0, 50.0, rng));
  });
  std::map<std::string, double> counts;
  for (const auto& k : keys) counts[k] += 1;
  REQUIRE(counts.size() == 6);
  std::vector<double> obs, probs;
  for (const auto& [_, c] : counts) {
    obs.push_back(c);
    probs.push_back(1.0 / 6);
  }
  CHECK(chi_square_gof(obs, probs).p_value > 1e-3);
}

TEST_CASE("interchange keeps a bijection and moves one ball like a walk") {
  const Graph g = make_cycle(5);
  Rng rng0(3);
  const auto r0 = simulate_interchange(g, 0.0, rng0);
  for (int i = 0; i < 5; ++i) CHECK(r0.position[static_cast<std::size_t>(i)] == i);

  const RngSeed seed{11};
  const std::size_t trials = 100000;
  const auto where = map_trials<int>(trials, Exec::openmp, [&](std::size_t i) {
    Rng rng(seed, i);
    InterchangeState st(g);
    st.advance(1.0, rng);
    for (Vertex v = 0; v < 5; ++v) REQUIRE(st.position_of(st.ball_at(v)) == v);
    return st.position_of(0);
  });
  std::vector<double> obs(5, 0.0);
  for (int v : where) obs[static_cast<std::size_t>(v)] += 1;
  // Each edge switches at rate 1, so a single ball performs the rate-1 walk.
  const auto kernel = heat_kernel_cycle(5, 0.5);
  CHECK(chi_square_gof(obs, kernel).p_value > 1e-3);
}

TEST_CASE("initial chameleon states") {
  const Graph c5 = make_cycle(5);
  const std::vector<Vertex> p0{0};
  const auto a = initial_chameleon(c5, 0, p0);
  CHECK(a.counts() == ColorCounts{1, 4, 0, 0});
  const std::vector<Vertex> p1{0, 1};
  const auto b = initial_chameleon(c5, 1, p1);
  CHECK(b.color_at(0) == Color::black);
  CHECK(b.color_at(1) == Color::red);
  CHECK(b.m() == 4);
  const auto c = initial_chameleon(make_torus(4, 2), 7);
  CHECK(c.m() == 9);
  CHECK(c.counts().s() == doctest::Approx(1.0 / 9));
  CHECK_THROWS_AS(initial_chameleon(c5, 4), std::invalid_argument);
  const std::vector<Vertex> dup{2, 2};
  CHECK_THROWS_AS(initial_chameleon(c5, 1, dup), std::invalid_argument);
}

TEST_CASE("chameleon transition rules") {
  const Graph c5 = make_cycle(5);
  const std::vector<Vertex> p1{0, 1};
  const auto st = initial_chameleon(c5, 1, p1);
  const EdgeId rw = c5.find_edge(1, 2);
  const auto up = chameleon_transition(c5, st, rw, false, true);
  CHECK(up.counts() == ColorCounts{2, 2, 0, 1});
  const auto down = chameleon_transition(c5, st, rw, true, false);
  CHECK(down.counts() == ColorCounts{0, 4, 0, 1});
  CHECK_THROWS_AS(chameleon_transition(c5, st, rw, false, std::nullopt), std::logic_error);

  const EdgeId bw = c5.find_edge(0, 4);
  const auto sw = chameleon_transition(c5, st, bw, true, std::nullopt);
  CHECK(sw.counts() == st.counts());
  CHECK(sw.color_at(4) == Color::black);
  CHECK(sw.color_at(0) == Color::white);
  CHECK_THROWS_AS(chameleon_transition(c5, st, bw, true, false), std::logic_error);

  // (r, w, p) = (6, 10, 2): pinkening gives (5, 9, 4) and no depinking.
  const Graph c20 = make_cycle(20);
  const auto colors = parse_colors("BBPPRRRRRRWWWWWWWWWW");
  const std::vector<Vertex> blacks{0, 1};
  const auto big = ChameleonState::from_vertex_colors(c20, colors, blacks);
  const auto after = chameleon_transition(c20, big, c20.find_edge(9, 10), false, std::nullopt);
  CHECK(after.counts() == ColorCounts{5, 9, 4, 2});
  after.check_invariants();
}

TEST_CASE("redness and delta") {
  const Graph c6 = make_cycle(6);
  const auto colors = parse_colors("BRPPWW");
  const std::vector<Vertex> blacks{0};
  const auto st = ChameleonState::from_vertex_colors(c6, colors, blacks, false);
  CHECK(redness(st, 0) == 0.0);
  CHECK(redness(st, 1) == 1.0);
  CHECK(redness(st, 2) == 0.5);
  CHECK(redness(st, 4) == 0.0);
  CHECK(delta(1, 10) == 1);
  CHECK(delta(6, 20) == 2);
  CHECK(delta(9, 10) == 1);
  CHECK(delta(0, 10) == 0);
  CHECK_THROWS_AS(delta(11, 10), std::invalid_argument);
}

TEST_CASE("all-white start never changes color") {
  const Graph c5 = make_cycle(5);
  const auto colors = parse_colors("WWWWW");
  const auto st = ChameleonState::from_vertex_colors(c5, colors, {});
  Rng rng(9);
  const auto run = simulate_chameleon(c5, st, 5.0, rng);
  CHECK(run.state.counts() == ColorCounts{0, 5, 0, 0});
  CHECK(run.trace.depink_times.empty());
}

TEST_CASE("depinking steps are plus or minus delta") {
  const Graph c6 = make_cycle(6);
  const RngSeed seed{23};
  std::size_t checked = 0;
  for (std::size_t i = 0; i < 2000; ++i) {
    Rng rng(seed, i);
    const auto run = simulate_chameleon(c6, initial_chameleon(c6, 1), 6.0, rng);
    const auto r = run.trace.depinking_r_sequence();
    for (std::size_t j = 0; j + 1 < r.size(); ++j) {
      const int d = delta(r[j], 5);
      CHECK((r[j + 1] == r[j] + d || r[j + 1] == r[j] - d));
      ++checked;
    }
    run.state.check_invariants();
  }
  CHECK(checked > 0);
}

TEST_CASE("red paint fraction is a martingale") {
  const Graph c5 = make_cycle(5);
  const auto st0 = initial_chameleon(c5, 0);
  for (double t : {0.5, 2.0}) {
    const RngSeed seed{101};
    const auto s = map_trials<double>(20000, Exec::openmp, [&](std::size_t i) {
      Rng rng(seed, i);
      return advance_chameleon(c5, st0, t, rng).counts().s();
    });
    CHECK(make_estimate(summarize(s)).agrees_with(0.2));
  }
}

TEST_CASE("absorption probability") {
  const Graph p3 = make_path(3);
  const auto st0 = initial_chameleon(p3, 1);
  const RngSeed seed{31};
  const auto red = map_trials<double>(20000, Exec::openmp, [&](std::size_t i) {
    Rng rng(seed, i);
    const auto res = run_to_absorption(p3, st0, rng);
    for (std::size_t j = 0; j + 1 < res.r_sequence.size(); ++j)
      REQUIRE(std::abs(res.r_sequence[j + 1] - res.r_sequence[j]) == delta(res.r_sequence[j], 2));
    return res.absorbed == Color::red ? 1.0 : 0.0;
  });
  CHECK(make_estimate(summarize(red)).agrees_with(0.5));

  const auto colors = parse_colors("WWW");
  const auto white = ChameleonState::from_vertex_colors(p3, colors, {});
  Rng rng(1);
  CHECK_THROWS_AS(run_to_absorption(p3, white, rng), std::invalid_argument);
}

TEST_CASE("trace csv round trip") {
  const Graph c5 = make_cycle(5);
  Rng rng(77);
  const auto run = simulate_chameleon(c5, initial_chameleon(c5, 0), 3.0, rng);
  std::stringstream ss;
  write_trace_csv(ss, run.trace);
  const auto back = read_trace_csv(ss);
  REQUIRE(back.events.size() == run.trace.events.size());
  for (std::size_t i = 0; i < back.events.size(); ++i) {
    const auto& a = run.trace.events[i];
    const auto& b = back.events[i];
    CHECK(a.time == b.time);
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    CHECK(a.switched == b.switched);
    CHECK(a.pinkened == b.pinkened);
    CHECK(a.depink_coin == b.depink_coin);
    CHECK(a.counts_after == b.counts_after);
  }
  CHECK(back.depink_times == run.trace.depink_times);
}

TEST_CASE("serial and OpenMP trial loops agree bitwise") {
  const Graph c6 = make_cycle(6);
  const auto st0 = initial_chameleon(c6, 1);
  const RngSeed seed{2024};
  auto run = [&](Exec e) {
    return map_trials<double>(3000, e, [&](std::size_t i) {
      Rng rng(seed, i);
      return advance_chameleon(c6, st0, 1.5, rng).counts().S();
    });
  };
  const auto serial = run(Exec::serial);
  set_thread_count(4);
  const auto parallel = run(Exec::openmp);
  CHECK(serial == parallel);
}
