#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "chameleon/graph.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/rng.hpp"

namespace chameleon {

/// Thrown when an enumeration or dense solve would exceed its size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kDefaultStateCap = 200'000;
inline constexpr std::size_t kDefaultDenseCap = 5'000;

/// Enumerated continuous-time chain with a sparse generator Q.
/// Off-diagonal rates are stored row-wise (CSR); the diagonal is -exit_rate.
struct ExactChain {
  std::vector<std::string> states;
  std::unordered_map<std::string, int> index;
  std::vector<int> row_ptr{0};
  std::vector<int> col;
  std::vector<double> rate;
  std::vector<double> exit_rate;
  double uniformization_rate = 0.0;
  /// One start state per symmetry orbit (empty: every state is its own orbit).
  std::vector<int> start_representatives;

  int size() const { return static_cast<int>(states.size()); }
  int find(const std::string& key) const;
  /// Q(i, j), including the diagonal.
  double q(int i, int j) const;
  /// max_i |sum_j Q(i, j)|.
  double max_row_sum_error() const;
  bool symmetric(double tol = 1e-12) const;
};

/// Builds an ExactChain row by row; duplicate targets are merged and
/// self-transitions dropped.
class ChainBuilder {
 public:
  int add_state(const std::string& key);
  int find(const std::string& key) const;
  void add_rate(int from, int to, double r);
  std::size_t size() const { return keys_.size(); }
  const std::string& key(int i) const { return keys_[static_cast<std::size_t>(i)]; }
  ExactChain finish();

 private:
  std::vector<std::string> keys_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::map<int, double>> rows_;
};

using DistVector = std::vector<double>;

/// Point mass on state i.
DistVector point_mass(const ExactChain& chain, int i);
/// Throws std::invalid_argument unless d has the chain's length, entries >= 0
/// and total mass 1 within 1e-10.
void validate_distribution(const ExactChain& chain, const DistVector& d);

// ---------------------------------------------------------------------------
// Enumeration
// ---------------------------------------------------------------------------

/// Exclusion state key: one '0'/'1' character per vertex.
std::string exclusion_key(const ExclusionConfig& c);
std::string exclusion_key(int n, std::span<const Vertex> occupied);

/// Exclusion process with k black balls: one state per k-subset, rate 1
/// between subsets differing by an occupied/unoccupied edge swap. On torus
/// and hypercube graphs the start representatives are translation orbits.
ExactChain enumerate_exclusion(const Graph& g, int k, std::size_t cap = kDefaultStateCap);

/// Which recoloring steps the enumerated chameleon chain performs.
///  full        - pinkening and depinking (the chameleon process)
///  pinken_only - pinkening without depinking (the chain whose hitting time
///                of {p >= min(r, w)} is the expected wait to depink)
///  none        - pure interchange of the black balls and the red ball
enum class RecolorMode { full, pinken_only, none };

/// Decoded chameleon state: black balls in ball order plus a color per vertex.
struct ChameleonExactState {
  std::vector<Vertex> blacks;
  std::vector<Color> colors;

  std::string key() const;
  ColorCounts counts() const;
  static ChameleonExactState from_state(const ChameleonState& st);
  ChameleonState to_state(const Graph& g, bool check_stored = true) const;
};

struct ChameleonChain {
  ExactChain chain;
  std::vector<ChameleonExactState> decoded;
  int b = 0;
  int m = 0;
  int start = 0;
  RecolorMode mode = RecolorMode::full;

  ColorCounts counts(int i) const { return decoded[static_cast<std::size_t>(i)].counts(); }
};

/// Chameleon chain reachable from initial_chameleon(g, b, placement). Each
/// edge contributes rate 1 to its swap branch and rate 1 to its no-swap
/// branch; a branch that depinks splits into two rate-1/2 sub-branches.
ChameleonChain enumerate_chameleon(const Graph& g, int b, std::span<const Vertex> placement = {},
                                   RecolorMode mode = RecolorMode::full, std::size_t cap = kDefaultStateCap);

/// Same, reachable from every listed start state (start = index of starts[0]).
ChameleonChain enumerate_chameleon_from(const Graph& g, int b, std::span<const ChameleonExactState> starts,
                                        RecolorMode mode, std::size_t cap = kDefaultStateCap);

// ---------------------------------------------------------------------------
// Transient analysis
// ---------------------------------------------------------------------------

/// Distribution at time t from d0 by uniformization. The uniformized Poisson
/// series is split into steps of mean <= 32 and each step's series is
/// truncated once a geometric bound on its remaining tail falls below
/// tol / steps, so the L1 error is at most tol.
DistVector transient_distribution(const ExactChain& chain, const DistVector& d0, double t, double tol = 1e-12);

/// Half the L1 distance.
double tv_distance(std::span<const double> p, std::span<const double> q);

/// max over start representatives of TV(exp(tQ)(x, .), uniform). Requires a
/// symmetric generator (uniform stationary law).
double worst_tv_to_uniform(const ExactChain& chain, double t, double tol = 1e-12);

/// inf{t : worst TV <= threshold}, by doubling then bisection to relative
/// precision rel_precision. Throws on reducible or non-symmetric chains.
double mixing_time_exact(const ExactChain& chain, double threshold = 0.25, double rel_precision = 1e-4);

/// Smallest nonzero eigenvalue of -Q. Requires a symmetric generator.
double spectral_gap(const ExactChain& chain, std::size_t dense_cap = kDefaultDenseCap);

/// True iff every state reaches every other.
bool irreducible(const ExactChain& chain);

/// Expected hitting times of B: W = 0 on B, -Q W = 1 off B. Throws if some
/// state does not hit B almost surely, unless allow_unreachable, in which
/// case those states get +infinity.
std::vector<double> hitting_time_solve(const ExactChain& chain, std::span<const int> target,
                                       bool allow_unreachable = false);

/// (exp(eps Q) W)(x) - W(x): the one-step drift of W from x over time eps.
double hitting_time_drift(const ExactChain& chain, std::span<const double> W, int x, double eps,
                          double tol = 1e-15);

// ---------------------------------------------------------------------------
// Random walk kernels on cycles and tori
// ---------------------------------------------------------------------------

/// p^t(0, y), y = 0..L-1, for the walk that crosses each incident edge of
/// C_L at rate 2: (1/L) sum_j exp(-4(1 - cos(2 pi j / L)) t) cos(2 pi j y / L).
std::vector<double> heat_kernel_cycle(int L, double t);

/// Product of cycle kernels over the coordinates of offset.
double heat_kernel_torus(int L, int d, double t, std::span<const int> offset);

/// max_y p^t(0, y) on the d-torus (equals (max_y cycle kernel)^d).
double heat_kernel_torus_max(int L, int d, double t);

/// inf{t : p^t(x, y) <= (7/6) eps for all x, y}, by bisection. Requires eps >= 1/L^d.
double tau_eps(int L, int d, double eps, double rel_precision = 1e-10);

// ---------------------------------------------------------------------------
// Lemma checks
// ---------------------------------------------------------------------------

struct Lemma1Result {
  double max_discrepancy = 0.0;
  int conditioning_events = 0;  // black tuples compared
  int skipped_events = 0;       // tuples below min_condition_prob
};

/// Compares the conditional law of ball b (the red ball) given the black
/// balls under pure interchange with the conditional expected redness under
/// the chameleon process, at time t, for every black tuple of probability
/// above min_condition_prob.
Lemma1Result verify_lemma1(const Graph& g, int b, double t, double tol = 1e-13,
                           std::span<const Vertex> placement = {}, double min_condition_prob = 1e-9,
                           std::size_t cap = kDefaultStateCap);

/// E over black tuples Z of TV(law of the red ball | Z, uniform on V - Z),
/// computed exactly from the interchange chain.
double lemma2_lhs_exact(const Graph& g, int b, double t, std::span<const Vertex> placement = {},
                        double tol = 1e-13);

/// Distribution over ordered k-tuples of distinct vertices.
struct TupleDistribution {
  int k = 0;
  std::map<std::vector<Vertex>, double> prob;

  /// Throws on wrong arity, repeated vertices, negative mass or total != 1.
  void validate() const;
};

/// Random distribution over the ordered k-tuples of distinct vertices of
/// {0..n-1}: each tuple gets weight 0 with probability zero_prob, otherwise
/// a uniform weight; weights are normalized. Never empty.
TupleDistribution random_tuple_distribution(int n, int k, double zero_prob, Rng& rng);

struct Lemma12Result {
  double lhs = 0.0;  // TV(mu, nu)
  double rhs = 0.0;  // sum over prefixes of expected conditional TV
};

/// Exact evaluation of both sides of the prefix-conditioning TV bound. When
/// nu gives a prefix probability zero its conditional TV is taken as 1.
Lemma12Result lemma12_gap(const TupleDistribution& mu, const TupleDistribution& nu);

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

/// CSV "t,worst_tv".
void write_tv_curve_csv(std::ostream& os, const ExactChain& chain, std::span<const double> times);
/// "# states" block (index key) then "# generator" block of "i j rate" triplets, diagonal included.
void write_chain_dump(std::ostream& os, const ExactChain& chain);

}  // namespace chameleon
