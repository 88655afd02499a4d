#include "chameleon/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>

#include <fmt/format.h>

namespace chameleon {

namespace {

int ipow(int base, int exp) {
  long long r = 1;
  for (int i = 0; i < exp; ++i) {
    r *= base;
    if (r > (1LL << 30)) throw std::invalid_argument("graph too large");
  }
  return static_cast<int>(r);
}

}  // namespace

Graph::Graph(int vertex_count, const std::vector<std::pair<Vertex, Vertex>>& edges) {
  if (vertex_count < 1) throw std::invalid_argument("graph needs at least one vertex");
  n_ = vertex_count;
  std::set<std::pair<Vertex, Vertex>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_)
      throw std::invalid_argument(fmt::format("edge ({},{}) has an endpoint outside [0,{})", a, b, n_));
    if (a == b) throw std::invalid_argument(fmt::format("self-loop at vertex {}", a));
    const auto key = std::minmax(a, b);
    if (!seen.insert({key.first, key.second}).second)
      throw std::invalid_argument(fmt::format("duplicate edge ({},{})", key.first, key.second));
    edges_.push_back({key.first, key.second});
  }
  finalize();
}

void Graph::finalize() {
  adj_.assign(static_cast<std::size_t>(n_), {});
  incident_.assign(static_cast<std::size_t>(n_), {});
  for (EdgeId e = 0; e < edge_count(); ++e) {
    const auto [u, v] = edges_[static_cast<std::size_t>(e)];
    adj_[static_cast<std::size_t>(u)].push_back(v);
    adj_[static_cast<std::size_t>(v)].push_back(u);
    incident_[static_cast<std::size_t>(u)].push_back(e);
    incident_[static_cast<std::size_t>(v)].push_back(e);
  }
  if (!is_connected(n_, adj_)) throw std::invalid_argument("graph is not connected");
}

EdgeId Graph::find_edge(Vertex u, Vertex v) const {
  if (u < 0 || u >= n_ || v < 0 || v >= n_) return -1;
  for (EdgeId e : incident_[static_cast<std::size_t>(u)]) {
    const Edge& ed = edges_[static_cast<std::size_t>(e)];
    if ((ed.u == u && ed.v == v) || (ed.u == v && ed.v == u)) return e;
  }
  return -1;
}

std::vector<int> Graph::coordinates(Vertex v) const {
  if (kind_ == GraphKind::general) throw std::logic_error("general graphs carry no coordinates");
  std::vector<int> c(static_cast<std::size_t>(dim_));
  for (int i = 0; i < dim_; ++i) {
    c[static_cast<std::size_t>(i)] = v % side_;
    v /= side_;
  }
  return c;
}

Vertex Graph::vertex_at(const std::vector<int>& coords) const {
  if (kind_ == GraphKind::general) throw std::logic_error("general graphs carry no coordinates");
  if (static_cast<int>(coords.size()) != dim_) throw std::invalid_argument("coordinate arity mismatch");
  Vertex v = 0;
  for (int i = dim_ - 1; i >= 0; --i) {
    const int c = ((coords[static_cast<std::size_t>(i)] % side_) + side_) % side_;
    v = v * side_ + c;
  }
  return v;
}

std::string Graph::describe() const {
  switch (kind_) {
    case GraphKind::torus: return fmt::format("torus:L={},d={}", side_, dim_);
    case GraphKind::hypercube: return fmt::format("hypercube:d={}", dim_);
    case GraphKind::general: break;
  }
  return fmt::format("general:n={},m={}", n_, edges_.size());
}

Graph make_torus(int L, int d) {
  if (L < 3)
    throw std::invalid_argument(
        fmt::format("torus side L={} < 3 would create doubled edges; use make_hypercube for {{0,1}}^d", L));
  if (d < 1) throw std::invalid_argument("torus dimension must be >= 1");
  Graph g;
  g.n_ = ipow(L, d);
  g.kind_ = GraphKind::torus;
  g.side_ = L;
  g.dim_ = d;
  int stride = 1;
  for (int i = 0; i < d; ++i) {
    for (Vertex v = 0; v < g.n_; ++v) {
      const int c = (v / stride) % L;
      const Vertex w = c + 1 < L ? v + stride : v - (L - 1) * stride;
      g.edges_.push_back({std::min(v, w), std::max(v, w)});
    }
    stride *= L;
  }
  g.finalize();
  return g;
}

Graph make_hypercube(int d) {
  if (d < 1) throw std::invalid_argument("hypercube dimension must be >= 1");
  Graph g;
  g.n_ = ipow(2, d);
  g.kind_ = GraphKind::hypercube;
  g.side_ = 2;
  g.dim_ = d;
  for (int i = 0; i < d; ++i)
    for (Vertex v = 0; v < g.n_; ++v)
      if ((v & (1 << i)) == 0) g.edges_.push_back({v, v | (1 << i)});
  g.finalize();
  return g;
}

Graph make_cycle(int L) { return make_torus(L, 1); }

Graph make_path(int n) {
  if (n < 2) throw std::invalid_argument("path needs at least 2 vertices");
  std::vector<std::pair<Vertex, Vertex>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return Graph(n, e);
}

std::vector<EdgeId> edge_neighbors(const Graph& g, EdgeId e) {
  if (e < 0 || e >= g.edge_count()) throw std::invalid_argument(fmt::format("unknown edge id {}", e));
  const Edge& ed = g.edge(e);
  std::vector<EdgeId> out;
  for (Vertex end : {ed.u, ed.v})
    for (EdgeId f : g.incident_edges(end))
      if (f != e) out.push_back(f);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Edge> edge_neighbors(const Graph& g, Edge e) {
  const EdgeId id = g.find_edge(e.u, e.v);
  if (id < 0) throw std::invalid_argument(fmt::format("unknown edge {{{},{}}}", e.u, e.v));
  std::vector<Edge> out;
  for (EdgeId f : edge_neighbors(g, id)) out.push_back(g.edge(f));
  return out;
}

bool is_connected(int vertex_count, const std::vector<std::vector<Vertex>>& adjacency) {
  if (vertex_count <= 0) return false;
  std::vector<char> seen(static_cast<std::size_t>(vertex_count), 0);
  std::queue<Vertex> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    const Vertex v = q.front();
    q.pop();
    for (Vertex w : adjacency[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        q.push(w);
      }
    }
  }
  return reached == vertex_count;
}

namespace {

std::map<std::string, int> parse_int_fields(std::string_view body, std::string_view spec) {
  std::map<std::string, int> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    const std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(fmt::format("graph spec '{}': expected key=value, got '{}'", spec, item));
    const std::string key(item.substr(0, eq));
    const std::string_view val = item.substr(eq + 1);
    int parsed = 0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), parsed);
    if (ec != std::errc() || ptr != val.data() + val.size())
      throw std::invalid_argument(fmt::format("graph spec '{}': '{}' is not an integer", spec, val));
    out[key] = parsed;
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return out;
}

int require_field(const std::map<std::string, int>& f, const std::string& key, std::string_view spec) {
  const auto it = f.find(key);
  if (it == f.end()) throw std::invalid_argument(fmt::format("graph spec '{}' is missing '{}'", spec, key));
  return it->second;
}

}  // namespace

Graph parse_graph_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument(fmt::format("graph spec '{}' has no kind prefix", spec));
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view body = spec.substr(colon + 1);
  if (kind == "edges") {
    std::ifstream in{std::string(body)};
    if (!in) throw std::invalid_argument(fmt::format("cannot open edge file '{}'", body));
    std::vector<std::pair<Vertex, Vertex>> edges;
    int a = 0, b = 0, max_v = -1;
    while (in >> a >> b) {
      edges.emplace_back(a, b);
      max_v = std::max({max_v, a, b});
    }
    if (!in.eof()) throw std::invalid_argument(fmt::format("edge file '{}' is malformed", body));
    if (edges.empty()) throw std::invalid_argument(fmt::format("edge file '{}' has no edges", body));
    return Graph(max_v + 1, edges);
  }
  const auto fields = parse_int_fields(body, spec);
  if (kind == "torus") return make_torus(require_field(fields, "L", spec), require_field(fields, "d", spec));
  if (kind == "hypercube") return make_hypercube(require_field(fields, "d", spec));
  if (kind == "cycle") return make_cycle(require_field(fields, "L", spec));
  if (kind == "path") return make_path(require_field(fields, "n", spec));
  throw std::invalid_argument(fmt::format("unknown graph kind '{}'", kind));
}

}  // namespace chameleon
