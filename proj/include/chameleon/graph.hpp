#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chameleon {

using Vertex = int;
using EdgeId = int;

/// Unordered edge, stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphKind { torus, hypercube, general };

/// Simple connected undirected graph. Immutable once built.
///
/// Torus vertices are indexed row-major with coordinate 0 fastest:
/// index = c[0] + L*c[1] + L^2*c[2] + ...
/// Hypercube vertices are bit strings, bit i being coordinate i.
class Graph {
 public:
  /// Builds a general graph. Throws std::invalid_argument on self-loops,
  /// duplicate edges, out-of-range endpoints or a disconnected result.
  Graph(int vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges);

  int vertex_count() const { return n_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }
  GraphKind kind() const { return kind_; }
  /// Side length L (2 for hypercubes, 0 for general graphs).
  int side() const { return side_; }
  /// Dimension d (0 for general graphs).
  int dimension() const { return dim_; }

  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_[static_cast<std::size_t>(e)]; }
  const std::vector<Vertex>& neighbors(Vertex v) const { return adj_[static_cast<std::size_t>(v)]; }
  const std::vector<EdgeId>& incident_edges(Vertex v) const {
    return incident_[static_cast<std::size_t>(v)];
  }
  int degree(Vertex v) const { return static_cast<int>(adj_[static_cast<std::size_t>(v)].size()); }

  /// Edge id joining u and v, or -1.
  EdgeId find_edge(Vertex u, Vertex v) const;

  /// Coordinates of v (torus or hypercube kinds only).
  std::vector<int> coordinates(Vertex v) const;
  /// Inverse of coordinates(); coordinates are reduced mod L.
  Vertex vertex_at(const std::vector<int>& coords) const;

  /// Short human-readable description, e.g. "torus:L=4,d=2".
  std::string describe() const;

  friend Graph make_torus(int L, int d);
  friend Graph make_hypercube(int d);

 private:
  Graph() = default;
  void finalize();

  int n_ = 0;
  GraphKind kind_ = GraphKind::general;
  int side_ = 0;
  int dim_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
  std::vector<std::vector<EdgeId>> incident_;
};

/// Torus Z^d / L Z^d. L = 2 is rejected (use make_hypercube).
Graph make_torus(int L, int d);
/// Hypercube {0,1}^d.
Graph make_hypercube(int d);
/// Cycle C_L for L >= 3 (torus with d = 1).
Graph make_cycle(int L);
/// Path on n >= 2 vertices; a general-kind graph.
Graph make_path(int n);

/// All edges sharing an endpoint with e, excluding e itself, sorted by id.
std::vector<EdgeId> edge_neighbors(const Graph& g, EdgeId e);
/// Same, addressing the edge by its endpoints. Throws on an unknown edge.
std::vector<Edge> edge_neighbors(const Graph& g, Edge e);

/// True iff a breadth-first sweep from vertex 0 reaches every vertex.
bool is_connected(int vertex_count, const std::vector<std::vector<Vertex>>& adjacency);

/// Parses "torus:L=8,d=2", "hypercube:d=4", "cycle:L=5", "path:n=4" or
/// "edges:file.txt" (whitespace-separated 0-indexed vertex pairs).
/// Throws std::invalid_argument on malformed specs.
Graph parse_graph_spec(std::string_view spec);

}  // namespace chameleon
