#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "chameleon/graph.hpp"

using namespace chameleon;

namespace {

void check_simple(const Graph& g) {
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : g.edges()) {
    CHECK(e.u < e.v);
    CHECK(seen.insert({e.u, e.v}).second);
  }
  std::vector<std::vector<Vertex>> adj(static_cast<std::size_t>(g.vertex_count()));
  for (Vertex v = 0; v < g.vertex_count(); ++v) adj[static_cast<std::size_t>(v)] = g.neighbors(v);
  CHECK(is_connected(g.vertex_count(), adj));
}

}  // namespace

TEST_CASE("torus sizes") {
  struct Case {
    int L, d, n, edges;
  };
  for (auto c : {Case{4, 2, 16, 32}, Case{5, 1, 5, 5}, Case{3, 3, 27, 81}, Case{6, 2, 36, 72}}) {
    const Graph g = make_torus(c.L, c.d);
    CHECK(g.vertex_count() == c.n);
    CHECK(g.edge_count() == c.edges);
    CHECK(g.kind() == GraphKind::torus);
    for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(g.degree(v) == 2 * c.d);
    check_simple(g);
  }
  CHECK_THROWS_AS(make_torus(2, 3), std::invalid_argument);
  CHECK_THROWS_AS(make_torus(4, 0), std::invalid_argument);
}

TEST_CASE("hypercube sizes") {
  struct Case {
    int d, n, edges;
  };
  for (auto c : {Case{1, 2, 1}, Case{3, 8, 12}, Case{4, 16, 32}}) {
    const Graph g = make_hypercube(c.d);
    CHECK(g.vertex_count() == c.n);
    CHECK(g.edge_count() == c.edges);
    for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(g.degree(v) == c.d);
    check_simple(g);
  }
}

TEST_CASE("coordinates round trip") {
  const Graph g = make_torus(5, 3);
  for (Vertex v = 0; v < g.vertex_count(); ++v) CHECK(g.vertex_at(g.coordinates(v)) == v);
  CHECK(g.coordinates(1) == std::vector<int>{1, 0, 0});
  CHECK(g.coordinates(5) == std::vector<int>{0, 1, 0});
  CHECK(g.vertex_at({-1, 0, 0}) == 4);
  const Graph h = make_hypercube(3);
  CHECK(h.coordinates(6) == std::vector<int>{0, 1, 1});
}

TEST_CASE("edge neighbors") {
  const Graph c4 = make_cycle(4);
  const auto nb = edge_neighbors(c4, Edge{0, 1});
  REQUIRE(nb.size() == 2);
  CHECK(std::find(nb.begin(), nb.end(), Edge{1, 2}) != nb.end());
  CHECK(std::find(nb.begin(), nb.end(), Edge{0, 3}) != nb.end());

  const Graph t = make_torus(3, 2);
  for (EdgeId e = 0; e < t.edge_count(); ++e) CHECK(edge_neighbors(t, e).size() == 6);

  const Graph h = make_hypercube(2);
  CHECK(edge_neighbors(h, Edge{0, 1}).size() == 2);
  CHECK_THROWS_AS(edge_neighbors(c4, Edge{0, 2}), std::invalid_argument);
}

TEST_CASE("general graph validation") {
  CHECK_THROWS_AS(Graph(3, {{0, 0}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(3, {{0, 1}, {1, 0}, {1, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(4, {{0, 1}, {2, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(Graph(2, {{0, 5}}), std::invalid_argument);
  const Graph p = make_path(4);
  CHECK(p.edge_count() == 3);
  CHECK(p.kind() == GraphKind::general);
  CHECK(p.degree(0) == 1);
  CHECK(p.degree(1) == 2);
}

TEST_CASE("graph spec parsing") {
  CHECK(parse_graph_spec("torus:L=4,d=2").edge_count() == 32);
  CHECK(parse_graph_spec("cycle:L=5").vertex_count() == 5);
  CHECK(parse_graph_spec("hypercube:d=3").edge_count() == 12);
  CHECK(parse_graph_spec("path:n=4").edge_count() == 3);
  CHECK(parse_graph_spec("torus:L=4,d=2").describe() == "torus:L=4,d=2");
  CHECK_THROWS_AS(parse_graph_spec("torus:L=4"), std::invalid_argument);
  CHECK_THROWS_AS(parse_graph_spec("blob:n=3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_graph_spec("torus:L=x,d=1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_graph_spec("cycle"), std::invalid_argument);

  const char* path = "test_graph_edges.txt";
  {
    std::ofstream out(path);
    out << "0 1\n1 2\n2 0\n2 3\n";
  }
  const Graph g = parse_graph_spec(std::string("edges:") + path);
  CHECK(g.vertex_count() == 4);
  CHECK(g.edge_count() == 4);
  std::remove(path);
}
