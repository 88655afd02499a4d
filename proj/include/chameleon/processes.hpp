#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "chameleon/graph.hpp"
#include "chameleon/rng.hpp"

namespace chameleon {

// ---------------------------------------------------------------------------
// Exclusion process
// ---------------------------------------------------------------------------

/// Occupancy vector of the exclusion process: occupancy[v] = 1 for a black ball.
struct ExclusionConfig {
  std::vector<std::uint8_t> occupancy;
  int k = 0;

  friend bool operator==(const ExclusionConfig&, const ExclusionConfig&) = default;
};

/// Builds a configuration with black balls at the given distinct vertices.
ExclusionConfig make_exclusion_config(const Graph& g, std::span<const Vertex> black_vertices);
/// Throws std::invalid_argument unless c has length n, popcount k and 1 <= k <= n/2.
void validate_exclusion(const Graph& g, const ExclusionConfig& c);
/// Sorted occupied vertices.
std::vector<Vertex> occupied_vertices(const ExclusionConfig& c);

/// Exclusion process at time t: events arrive at total rate |E|, each picks a
/// uniform edge and swaps the contents of its endpoints.
ExclusionConfig simulate_exclusion(const Graph& g, const ExclusionConfig& c0, double t, Rng& rng);

// ---------------------------------------------------------------------------
// Colors, counts, traces
// ---------------------------------------------------------------------------

enum class Color : std::uint8_t { black, red, white, pink };

char color_letter(Color c);

struct ColorCounts {
  int r = 0;
  int w = 0;
  int p = 0;
  int b = 0;

  int n() const { return r + w + p + b; }
  int m() const { return n() - b; }
  /// Red paint r + p/2.
  double S() const { return r + 0.5 * p; }
  double s() const { return S() / m(); }

  friend bool operator==(const ColorCounts&, const ColorCounts&) = default;
};

/// True iff the depinking step fires for these post-pinkening counts:
/// at least one pink ball and p >= min(r, w).
inline bool depinking_triggered(const ColorCounts& c) { return c.p > 0 && (c.p >= c.r || c.p >= c.w); }

/// One ring of an edge clock.
struct TraceEvent {
  double time = 0.0;
  EdgeId edge = -1;
  Vertex u = 0;
  Vertex v = 0;
  bool switched = false;
  bool pinkened = false;
  std::optional<bool> depink_coin;  // present iff a depinking fired
  std::optional<ColorCounts> counts_after;

  bool depinked() const { return depink_coin.has_value(); }
};

/// Full record of a simulated trajectory. Interchange traces carry no counts.
struct EventTrace {
  std::optional<ColorCounts> initial;
  std::vector<TraceEvent> events;
  std::vector<double> depink_times;  // T_1, T_2, ... (T_0 = 0 implied)

  /// r_{T_0}, r_{T_1}, ... read from the recorded counts.
  std::vector<int> depinking_r_sequence() const;
};

// ---------------------------------------------------------------------------
// Interchange process
// ---------------------------------------------------------------------------

/// Labeled balls, one per vertex. Each edge rings at rate 2 and switches its
/// endpoint balls with probability 1/2.
class InterchangeState {
 public:
  /// Identity placement: ball i at vertex i.
  explicit InterchangeState(const Graph& g);
  InterchangeState(const Graph& g, std::vector<Vertex> position);

  const std::vector<Vertex>& position() const { return position_; }
  const std::vector<int>& occupant() const { return occupant_; }
  Vertex position_of(int ball) const { return position_[static_cast<std::size_t>(ball)]; }
  int ball_at(Vertex v) const { return occupant_[static_cast<std::size_t>(v)]; }

  /// Runs the dynamics for a further duration dt. Appends events to trace if given.
  void advance(double dt, Rng& rng, EventTrace* trace = nullptr);

 private:
  const Graph* g_;
  std::vector<Vertex> position_;
  std::vector<int> occupant_;
};

struct InterchangeResult {
  std::vector<Vertex> position;  // ball -> vertex
  EventTrace trace;
};

InterchangeResult simulate_interchange(const Graph& g, double t, Rng& rng);

// ---------------------------------------------------------------------------
// Chameleon process
// ---------------------------------------------------------------------------

/// Ball positions plus colors. Balls 0..b-1 are black, ball b starts red,
/// the rest start white.
class ChameleonState {
 public:
  /// Builds a state from per-vertex colors. Black balls are placed at
  /// black_positions in ball order; the other balls take the remaining
  /// vertices in ascending index order. When check_stored is set, the
  /// inter-event invariant (p even; p = 0 or p < min(r, w)) is enforced.
  static ChameleonState from_vertex_colors(const Graph& g, std::span<const Color> colors_by_vertex,
                                           std::span<const Vertex> black_positions, bool check_stored = true);

  int n() const { return static_cast<int>(position_.size()); }
  int b() const { return counts_.b; }
  int m() const { return n() - counts_.b; }
  const ColorCounts& counts() const { return counts_; }
  int depink_count() const { return depink_count_; }

  const std::vector<Vertex>& position() const { return position_; }
  const std::vector<Color>& color() const { return color_; }
  Vertex position_of(int ball) const { return position_[static_cast<std::size_t>(ball)]; }
  int ball_at(Vertex v) const { return occupant_[static_cast<std::size_t>(v)]; }
  Color color_at(Vertex v) const { return color_[static_cast<std::size_t>(ball_at(v))]; }
  Color color_of(int ball) const { return color_[static_cast<std::size_t>(ball)]; }
  std::vector<Vertex> black_positions() const;

  /// Step 1 and 2a of a ring: optional swap, then pinkening of a red/white pair.
  /// Returns true iff the depinking step must now fire.
  bool swap_and_pinken(const Graph& g, EdgeId e, bool switch_coin, bool* pinkened = nullptr);
  /// Step 2b: recolor every pink ball red (to_red) or white.
  void depink(bool to_red);

  /// Recolors the white balls at the given vertices red.
  void recolor_white_to_red(std::span<const Vertex> vertices);

  /// Checks every structural invariant; throws std::logic_error on violation.
  void check_invariants() const;

  friend bool operator==(const ChameleonState& a, const ChameleonState& b) {
    return a.position_ == b.position_ && a.color_ == b.color_ && a.depink_count_ == b.depink_count_;
  }

 private:
  friend ChameleonState initial_chameleon(const Graph&, int, std::span<const Vertex>);
  ChameleonState() = default;
  void recount();

  std::vector<Vertex> position_;
  std::vector<int> occupant_;
  std::vector<Color> color_;
  std::vector<int> pink_balls_;
  ColorCounts counts_;
  int depink_count_ = 0;
};

/// Starting colors: balls 0..b-1 black, ball b red, the rest white. placement
/// lists the vertices of balls 0..b (empty: ball i at vertex i); remaining
/// balls fill the remaining vertices in ascending order.
/// Requires 0 <= b <= n - 2.
ChameleonState initial_chameleon(const Graph& g, int b, std::span<const Vertex> placement = {});

/// Applies one ring of edge e. depink_coin must be supplied exactly when the
/// post-pinkening counts trigger depinking; otherwise std::logic_error.
ChameleonState chameleon_transition(const Graph& g, ChameleonState st, EdgeId e, bool switch_coin,
                                    std::optional<bool> depink_coin);

/// Redness of vertex u: 1 red, 1/2 pink, 0 otherwise.
double redness(const ChameleonState& st, Vertex u);

/// ceil(min(x, m - x) / 3) for 0 <= x <= m.
int delta(int x, int m);

/// Information handed to simulation observers after each ring.
struct StepInfo {
  double time;
  EdgeId edge;
  bool switched;
  bool pinkened;
  std::optional<bool> depink_coin;
};

/// Event loop shared by every chameleon driver: global rate 2|E|, uniform
/// edge, switch coin, then a depink coin only when depinking fires. The
/// observer is called after each ring and returns false to stop. Events
/// beyond t_end are not applied. Returns the time of the last applied event
/// (0 if none).
template <class Observer>
double run_chameleon(const Graph& g, ChameleonState& st, double t_end, Rng& rng, Observer&& observe) {
  const double rate = 2.0 * g.edge_count();
  const auto edges = static_cast<std::uint64_t>(g.edge_count());
  double now = 0.0, last = 0.0;
  while (true) {
    now += rng.exponential(rate);
    if (now > t_end) break;
    const auto e = static_cast<EdgeId>(rng.below(edges));
    const bool sw = rng.coin();
    bool pinkened = false;
    std::optional<bool> coin;
    if (st.swap_and_pinken(g, e, sw, &pinkened)) {
      coin = rng.coin();
      st.depink(*coin);
    }
    last = now;
    if (!observe(StepInfo{now, e, sw, pinkened, coin})) break;
  }
  return last;
}

struct ChameleonRun {
  ChameleonState state;
  EventTrace trace;
};

/// Chameleon process run to time t, recording every ring.
ChameleonRun simulate_chameleon(const Graph& g, const ChameleonState& st0, double t, Rng& rng);

/// Same dynamics without a trace.
ChameleonState advance_chameleon(const Graph& g, ChameleonState st, double t, Rng& rng);

struct AbsorptionResult {
  Color absorbed = Color::white;  // red: event A (all paint red); white: r = 0
  int absorption_index = 0;       // j with T_j the absorbing depinking
  double absorption_time = 0.0;
  std::vector<int> r_sequence;    // r_{T_0}, r_{T_1}, ..., r_{T_j}
};

/// Runs until the red paint is absorbed at 0 or m. Requires S_0 not in {0, m}.
/// If trace is non-null every ring is appended to it.
AbsorptionResult run_to_absorption(const Graph& g, const ChameleonState& st0, Rng& rng,
                                   EventTrace* trace = nullptr);

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

/// Header: event_index,time,edge_u,edge_v,switch_coin,pinkened,depinked,depink_coin,r,w,p
/// Fields that do not apply are left empty. Times use 17 significant digits.
void write_trace_csv(std::ostream& os, const EventTrace& trace);
/// Parses the format written by write_trace_csv (initial counts are not stored).
EventTrace read_trace_csv(std::istream& is);

}  // namespace chameleon
