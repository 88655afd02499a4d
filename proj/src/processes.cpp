#include "chameleon/processes.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

namespace chameleon {

// ---------------------------------------------------------------------------
// Exclusion
// ---------------------------------------------------------------------------

ExclusionConfig make_exclusion_config(const Graph& g, std::span<const Vertex> black_vertices) {
  ExclusionConfig c;
  c.occupancy.assign(static_cast<std::size_t>(g.vertex_count()), 0);
  for (Vertex v : black_vertices) {
    if (v < 0 || v >= g.vertex_count()) throw std::invalid_argument(fmt::format("vertex {} out of range", v));
    if (c.occupancy[static_cast<std::size_t>(v)]) throw std::invalid_argument(fmt::format("vertex {} listed twice", v));
    c.occupancy[static_cast<std::size_t>(v)] = 1;
  }
  c.k = static_cast<int>(black_vertices.size());
  validate_exclusion(g, c);
  return c;
}

void validate_exclusion(const Graph& g, const ExclusionConfig& c) {
  if (static_cast<int>(c.occupancy.size()) != g.vertex_count())
    throw std::invalid_argument(
        fmt::format("configuration length {} does not match n = {}", c.occupancy.size(), g.vertex_count()));
  const auto count = std::count_if(c.occupancy.begin(), c.occupancy.end(), [](auto x) { return x != 0; });
  if (count != c.k) throw std::invalid_argument(fmt::format("popcount {} does not match k = {}", count, c.k));
  if (c.k < 1 || 2 * c.k > g.vertex_count())
    throw std::invalid_argument(fmt::format("k = {} outside [1, n/2] for n = {}", c.k, g.vertex_count()));
}

std::vector<Vertex> occupied_vertices(const ExclusionConfig& c) {
  std::vector<Vertex> out;
  for (std::size_t v = 0; v < c.occupancy.size(); ++v)
    if (c.occupancy[v]) out.push_back(static_cast<Vertex>(v));
  return out;
}

ExclusionConfig simulate_exclusion(const Graph& g, const ExclusionConfig& c0, double t, Rng& rng) {
  if (!(t >= 0)) throw std::invalid_argument("simulate_exclusion: t must be >= 0");
  validate_exclusion(g, c0);
  ExclusionConfig c = c0;
  const double rate = g.edge_count();
  const auto edges = static_cast<std::uint64_t>(g.edge_count());
  double now = rng.exponential(rate);
  while (now <= t) {
    const Edge& e = g.edge(static_cast<EdgeId>(rng.below(edges)));
    std::swap(c.occupancy[static_cast<std::size_t>(e.u)], c.occupancy[static_cast<std::size_t>(e.v)]);
    now += rng.exponential(rate);
  }
  return c;
}

// ---------------------------------------------------------------------------
// Colors and traces
// ---------------------------------------------------------------------------

char color_letter(Color c) {
  switch (c) {
    case Color::black: return 'B';
    case Color::red: return 'R';
    case Color::white: return 'W';
    case Color::pink: return 'P';
  }
  return '?';
}

std::vector<int> EventTrace::depinking_r_sequence() const {
  std::vector<int> out;
  if (initial) out.push_back(initial->r);
  for (const auto& ev : events)
    if (ev.depinked() && ev.counts_after) out.push_back(ev.counts_after->r);
  return out;
}

// ---------------------------------------------------------------------------
// Interchange
// ---------------------------------------------------------------------------

namespace {

std::vector<int> invert(const std::vector<Vertex>& position) {
  std::vector<int> occ(position.size(), -1);
  for (std::size_t ball = 0; ball < position.size(); ++ball) {
    const Vertex v = position[ball];
    if (v < 0 || static_cast<std::size_t>(v) >= position.size() || occ[static_cast<std::size_t>(v)] != -1)
      throw std::invalid_argument("position array is not a bijection onto the vertices");
    occ[static_cast<std::size_t>(v)] = static_cast<int>(ball);
  }
  return occ;
}

std::vector<Vertex> identity_positions(int n) {
  std::vector<Vertex> p(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  return p;
}

}  // namespace

InterchangeState::InterchangeState(const Graph& g) : InterchangeState(g, identity_positions(g.vertex_count())) {}

InterchangeState::InterchangeState(const Graph& g, std::vector<Vertex> position)
    : g_(&g), position_(std::move(position)) {
  if (static_cast<int>(position_.size()) != g.vertex_count())
    throw std::invalid_argument("position array length does not match n");
  occupant_ = invert(position_);
}

void InterchangeState::advance(double dt, Rng& rng, EventTrace* trace) {
  if (!(dt >= 0)) throw std::invalid_argument("interchange: duration must be >= 0");
  const double rate = 2.0 * g_->edge_count();
  const auto edges = static_cast<std::uint64_t>(g_->edge_count());
  const double t0 = trace && !trace->events.empty() ? trace->events.back().time : 0.0;
  double now = rng.exponential(rate);
  while (now <= dt) {
    const auto id = static_cast<EdgeId>(rng.below(edges));
    const bool sw = rng.coin();
    const Edge& e = g_->edge(id);
    if (sw) {
      const int a = occupant_[static_cast<std::size_t>(e.u)];
      const int b = occupant_[static_cast<std::size_t>(e.v)];
      occupant_[static_cast<std::size_t>(e.u)] = b;
      occupant_[static_cast<std::size_t>(e.v)] = a;
      position_[static_cast<std::size_t>(a)] = e.v;
      position_[static_cast<std::size_t>(b)] = e.u;
    }
    if (trace) {
      TraceEvent ev;
      ev.time = t0 + now;
      ev.edge = id;
      ev.u = e.u;
      ev.v = e.v;
      ev.switched = sw;
      trace->events.push_back(ev);
    }
    now += rng.exponential(rate);
  }
}

InterchangeResult simulate_interchange(const Graph& g, double t, Rng& rng) {
  InterchangeState st(g);
  InterchangeResult out;
  st.advance(t, rng, &out.trace);
  out.position = st.position();
  return out;
}

// ---------------------------------------------------------------------------
// Chameleon
// ---------------------------------------------------------------------------

void ChameleonState::recount() {
  counts_ = {};
  pink_balls_.clear();
  for (std::size_t ball = 0; ball < color_.size(); ++ball) {
    switch (color_[ball]) {
      case Color::black: ++counts_.b; break;
      case Color::red: ++counts_.r; break;
      case Color::white: ++counts_.w; break;
      case Color::pink:
        ++counts_.p;
        pink_balls_.push_back(static_cast<int>(ball));
        break;
    }
  }
}

ChameleonState ChameleonState::from_vertex_colors(const Graph& g, std::span<const Color> colors_by_vertex,
                                                  std::span<const Vertex> black_positions, bool check_stored) {
  const int n = g.vertex_count();
  if (static_cast<int>(colors_by_vertex.size()) != n) throw std::invalid_argument("color vector length != n");
  const auto blacks = std::count(colors_by_vertex.begin(), colors_by_vertex.end(), Color::black);
  if (blacks != static_cast<long>(black_positions.size()))
    throw std::invalid_argument("black position list does not match the black vertices");
  ChameleonState st;
  st.position_.assign(static_cast<std::size_t>(n), -1);
  st.color_.assign(static_cast<std::size_t>(n), Color::white);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  int ball = 0;
  for (Vertex v : black_positions) {
    if (v < 0 || v >= n || colors_by_vertex[static_cast<std::size_t>(v)] != Color::black ||
        used[static_cast<std::size_t>(v)])
      throw std::invalid_argument(fmt::format("invalid black position {}", v));
    used[static_cast<std::size_t>(v)] = 1;
    st.position_[static_cast<std::size_t>(ball)] = v;
    st.color_[static_cast<std::size_t>(ball)] = Color::black;
    ++ball;
  }
  for (Vertex v = 0; v < n; ++v) {
    if (used[static_cast<std::size_t>(v)]) continue;
    st.position_[static_cast<std::size_t>(ball)] = v;
    st.color_[static_cast<std::size_t>(ball)] = colors_by_vertex[static_cast<std::size_t>(v)];
    ++ball;
  }
  st.occupant_ = invert(st.position_);
  st.recount();
  if (st.counts_.p % 2 != 0) throw std::invalid_argument("pink count must be even");
  if (check_stored && depinking_triggered(st.counts_))
    throw std::invalid_argument("stored state must have p = 0 or p < min(r, w)");
  return st;
}

std::vector<Vertex> ChameleonState::black_positions() const {
  return {position_.begin(), position_.begin() + counts_.b};
}

bool ChameleonState::swap_and_pinken(const Graph& g, EdgeId e, bool switch_coin, bool* pinkened) {
  const Edge& ed = g.edge(e);
  const int a = occupant_[static_cast<std::size_t>(ed.u)];
  const int c = occupant_[static_cast<std::size_t>(ed.v)];
  if (switch_coin) {
    occupant_[static_cast<std::size_t>(ed.u)] = c;
    occupant_[static_cast<std::size_t>(ed.v)] = a;
    position_[static_cast<std::size_t>(a)] = ed.v;
    position_[static_cast<std::size_t>(c)] = ed.u;
  }
  // The pair of endpoint balls is the same whether or not they swapped.
  Color& ca = color_[static_cast<std::size_t>(a)];
  Color& cc = color_[static_cast<std::size_t>(c)];
  const bool red_white =
      (ca == Color::red && cc == Color::white) || (ca == Color::white && cc == Color::red);
  if (pinkened) *pinkened = red_white;
  if (red_white) {
    ca = Color::pink;
    cc = Color::pink;
    --counts_.r;
    --counts_.w;
    counts_.p += 2;
    pink_balls_.push_back(a);
    pink_balls_.push_back(c);
  }
  return depinking_triggered(counts_);
}

void ChameleonState::depink(bool to_red) {
  const Color target = to_red ? Color::red : Color::white;
  for (int ball : pink_balls_) color_[static_cast<std::size_t>(ball)] = target;
  (to_red ? counts_.r : counts_.w) += counts_.p;
  counts_.p = 0;
  pink_balls_.clear();
  ++depink_count_;
}

void ChameleonState::recolor_white_to_red(std::span<const Vertex> vertices) {
  for (Vertex v : vertices) {
    if (v < 0 || v >= n()) throw std::invalid_argument(fmt::format("vertex {} out of range", v));
    Color& c = color_[static_cast<std::size_t>(occupant_[static_cast<std::size_t>(v)])];
    if (c != Color::white) throw std::invalid_argument(fmt::format("ball at vertex {} is not white", v));
    c = Color::red;
  }
  recount();
  if (depinking_triggered(counts_)) throw std::invalid_argument("recoloring produced an unstable pink count");
}

void ChameleonState::check_invariants() const {
  const std::size_t n = position_.size();
  for (std::size_t ball = 0; ball < n; ++ball)
    if (occupant_[static_cast<std::size_t>(position_[ball])] != static_cast<int>(ball))
      throw std::logic_error("position/occupant arrays disagree");
  ColorCounts c{};
  for (Color col : color_) {
    switch (col) {
      case Color::black: ++c.b; break;
      case Color::red: ++c.r; break;
      case Color::white: ++c.w; break;
      case Color::pink: ++c.p; break;
    }
  }
  if (!(c == counts_)) throw std::logic_error("cached color counts are stale");
  for (int ball = 0; ball < counts_.b; ++ball)
    if (color_[static_cast<std::size_t>(ball)] != Color::black) throw std::logic_error("black balls must be 0..b-1");
  if (counts_.p % 2 != 0) throw std::logic_error("pink count is odd");
  if (depinking_triggered(counts_)) throw std::logic_error("stored state has p >= min(r, w)");
}

ChameleonState initial_chameleon(const Graph& g, int b, std::span<const Vertex> placement) {
  const int n = g.vertex_count();
  if (b < 0 || b > n - 2)
    throw std::invalid_argument(fmt::format("b = {} outside [0, n-2] for n = {}", b, n));
  std::vector<Vertex> chosen;
  if (placement.empty()) {
    for (int i = 0; i <= b; ++i) chosen.push_back(i);
  } else {
    if (static_cast<int>(placement.size()) != b + 1)
      throw std::invalid_argument(fmt::format("placement must list b+1 = {} vertices", b + 1));
    chosen.assign(placement.begin(), placement.end());
  }
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (Vertex v : chosen) {
    if (v < 0 || v >= n) throw std::invalid_argument(fmt::format("placement vertex {} out of range", v));
    if (used[static_cast<std::size_t>(v)]) throw std::invalid_argument(fmt::format("duplicate placement vertex {}", v));
    used[static_cast<std::size_t>(v)] = 1;
  }
  ChameleonState st;
  st.position_ = chosen;
  for (Vertex v = 0; v < n; ++v)
    if (!used[static_cast<std::size_t>(v)]) st.position_.push_back(v);
  st.occupant_ = invert(st.position_);
  st.color_.assign(static_cast<std::size_t>(n), Color::white);
  for (int ball = 0; ball < b; ++ball) st.color_[static_cast<std::size_t>(ball)] = Color::black;
  st.color_[static_cast<std::size_t>(b)] = Color::red;
  st.recount();
  return st;
}

ChameleonState chameleon_transition(const Graph& g, ChameleonState st, EdgeId e, bool switch_coin,
                                    std::optional<bool> depink_coin) {
  if (e < 0 || e >= g.edge_count()) throw std::invalid_argument(fmt::format("unknown edge id {}", e));
  const bool required = st.swap_and_pinken(g, e, switch_coin);
  if (required != depink_coin.has_value())
    throw std::logic_error(required ? "depinking fired but no depink coin was supplied"
                                    : "depink coin supplied but depinking did not fire");
  if (depink_coin) st.depink(*depink_coin);
  return st;
}

double redness(const ChameleonState& st, Vertex u) {
  switch (st.color_at(u)) {
    case Color::red: return 1.0;
    case Color::pink: return 0.5;
    default: return 0.0;
  }
}

int delta(int x, int m) {
  if (x < 0 || x > m) throw std::invalid_argument(fmt::format("delta: x = {} outside [0, m = {}]", x, m));
  return (std::min(x, m - x) + 2) / 3;
}

namespace {

TraceEvent make_event(const Graph& g, const StepInfo& s, const ChameleonState& st) {
  TraceEvent ev;
  ev.time = s.time;
  ev.edge = s.edge;
  ev.u = g.edge(s.edge).u;
  ev.v = g.edge(s.edge).v;
  ev.switched = s.switched;
  ev.pinkened = s.pinkened;
  ev.depink_coin = s.depink_coin;
  ev.counts_after = st.counts();
  return ev;
}

}  // namespace

ChameleonRun simulate_chameleon(const Graph& g, const ChameleonState& st0, double t, Rng& rng) {
  if (!(t >= 0)) throw std::invalid_argument("simulate_chameleon: t must be >= 0");
  ChameleonRun run{st0, {}};
  run.trace.initial = st0.counts();
  run_chameleon(g, run.state, t, rng, [&](const StepInfo& s) {
    run.trace.events.push_back(make_event(g, s, run.state));
    if (s.depink_coin) run.trace.depink_times.push_back(s.time);
    return true;
  });
  return run;
}

ChameleonState advance_chameleon(const Graph& g, ChameleonState st, double t, Rng& rng) {
  if (!(t >= 0)) throw std::invalid_argument("advance_chameleon: t must be >= 0");
  run_chameleon(g, st, t, rng, [](const StepInfo&) { return true; });
  return st;
}

AbsorptionResult run_to_absorption(const Graph& g, const ChameleonState& st0, Rng& rng, EventTrace* trace) {
  const ColorCounts c0 = st0.counts();
  const int m = st0.m();
  if (2 * c0.r + c0.p == 0 || 2 * c0.r + c0.p == 2 * m)
    throw std::invalid_argument("run_to_absorption: start is already absorbed (S in {0, m})");
  ChameleonState st = st0;
  AbsorptionResult out;
  out.r_sequence.push_back(c0.r);
  if (trace) trace->initial = c0;
  run_chameleon(g, st, std::numeric_limits<double>::infinity(), rng, [&](const StepInfo& s) {
    if (trace) {
      trace->events.push_back(make_event(g, s, st));
      if (s.depink_coin) trace->depink_times.push_back(s.time);
    }
    if (!s.depink_coin) return true;
    const int r = st.counts().r;
    out.r_sequence.push_back(r);
    if (r == 0 || r == m) {
      out.absorbed = r == m ? Color::red : Color::white;
      out.absorption_index = static_cast<int>(out.r_sequence.size()) - 1;
      out.absorption_time = s.time;
      return false;
    }
    return true;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

namespace {
constexpr const char* kTraceHeader = "event_index,time,edge_u,edge_v,switch_coin,pinkened,depinked,depink_coin,r,w,p";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}
}  // namespace

void write_trace_csv(std::ostream& os, const EventTrace& trace) {
  if (trace.initial)
    os << fmt::format("# initial_counts r={} w={} p={} b={}\n", trace.initial->r, trace.initial->w, trace.initial->p,
                      trace.initial->b);
  os << kTraceHeader << '\n';
  for (std::size_t i = 0; i < trace.events.size(); ++i) {
    const TraceEvent& ev = trace.events[i];
    os << fmt::format("{},{:.17g},{},{},{},{},{},", i, ev.time, ev.u, ev.v, ev.switched ? 1 : 0, ev.pinkened ? 1 : 0,
                      ev.depinked() ? 1 : 0);
    if (ev.depink_coin) os << (*ev.depink_coin ? 1 : 0);
    if (ev.counts_after)
      os << fmt::format(",{},{},{}\n", ev.counts_after->r, ev.counts_after->w, ev.counts_after->p);
    else
      os << ",,,\n";
  }
}

EventTrace read_trace_csv(std::istream& is) {
  EventTrace trace;
  std::string line;
  bool header_seen = false;
  int b = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      ColorCounts c;
      if (std::sscanf(line.c_str(), "# initial_counts r=%d w=%d p=%d b=%d", &c.r, &c.w, &c.p, &c.b) == 4) {
        trace.initial = c;
        b = c.b;
      }
      continue;
    }
    if (!header_seen) {
      if (line != kTraceHeader && line != std::string(kTraceHeader) + "\r")
        throw std::invalid_argument("trace CSV: unexpected header");
      header_seen = true;
      continue;
    }
    const auto f = split_csv(line);
    if (f.size() != 11) throw std::invalid_argument("trace CSV: expected 11 fields");
    TraceEvent ev;
    ev.time = std::stod(f[1]);
    ev.u = std::stoi(f[2]);
    ev.v = std::stoi(f[3]);
    ev.switched = f[4] == "1";
    ev.pinkened = f[5] == "1";
    if (f[6] == "1") {
      if (f[7].empty()) throw std::invalid_argument("trace CSV: depinked row without coin");
      ev.depink_coin = f[7] == "1";
      trace.depink_times.push_back(ev.time);
    }
    if (!f[8].empty()) ev.counts_after = ColorCounts{std::stoi(f[8]), std::stoi(f[9]), std::stoi(f[10]), b};
    trace.events.push_back(ev);
  }
  if (!header_seen) throw std::invalid_argument("trace CSV: missing header");
  return trace;
}

}  // namespace chameleon
