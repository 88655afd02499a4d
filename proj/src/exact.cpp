#include "chameleon/exact.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <fmt/format.h>

#include "chameleon/parallel.hpp"

namespace chameleon {

// ---------------------------------------------------------------------------
// ExactChain
// ---------------------------------------------------------------------------

int ExactChain::find(const std::string& key) const {
  const auto it = index.find(key);
  return it == index.end() ? -1 : it->second;
}

double ExactChain::q(int i, int j) const {
  if (i == j) return -exit_rate[static_cast<std::size_t>(i)];
  for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
    if (col[static_cast<std::size_t>(p)] == j) return rate[static_cast<std::size_t>(p)];
  return 0.0;
}

double ExactChain::max_row_sum_error() const {
  double worst = 0.0;
  for (int i = 0; i < size(); ++i) {
    double s = -exit_rate[static_cast<std::size_t>(i)];
    for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      s += rate[static_cast<std::size_t>(p)];
    worst = std::max(worst, std::abs(s));
  }
  return worst;
}

bool ExactChain::symmetric(double tol) const {
  for (int i = 0; i < size(); ++i)
    for (int p = row_ptr[static_cast<std::size_t>(i)]; p < row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      if (std::abs(rate[static_cast<std::size_t>(p)] - q(col[static_cast<std::size_t>(p)], i)) > tol) return false;
  return true;
}

int ChainBuilder::add_state(const std::string& key) {
  const auto [it, inserted] = index_.try_emplace(key, static_cast<int>(keys_.size()));
  if (inserted) {
    keys_.push_back(key);
    rows_.emplace_back();
  }
  return it->second;
}

int ChainBuilder::find(const std::string& key) const {
  const auto it = index_.find(key);
  return it == index_.end() ? -1 : it->second;
}

void ChainBuilder::add_rate(int from, int to, double r) {
  if (from == to || r == 0.0) return;
  if (r < 0) throw std::invalid_argument("negative transition rate");
  rows_[static_cast<std::size_t>(from)][to] += r;
}

ExactChain ChainBuilder::finish() {
  ExactChain c;
  c.states = std::move(keys_);
  c.index = std::move(index_);
  c.exit_rate.assign(c.states.size(), 0.0);
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    for (const auto& [j, r] : rows_[i]) {
      c.col.push_back(j);
      c.rate.push_back(r);
      c.exit_rate[i] += r;
    }
    c.row_ptr.push_back(static_cast<int>(c.col.size()));
  }
  c.uniformization_rate = c.exit_rate.empty() ? 0.0 : *std::max_element(c.exit_rate.begin(), c.exit_rate.end());
  rows_.clear();
  return c;
}

DistVector point_mass(const ExactChain& chain, int i) {
  if (i < 0 || i >= chain.size()) throw std::invalid_argument(fmt::format("state index {} out of range", i));
  DistVector d(static_cast<std::size_t>(chain.size()), 0.0);
  d[static_cast<std::size_t>(i)] = 1.0;
  return d;
}

void validate_distribution(const ExactChain& chain, const DistVector& d) {
  if (static_cast<int>(d.size()) != chain.size())
    throw std::invalid_argument(fmt::format("distribution has {} entries, chain has {} states", d.size(), chain.size()));
  double total = 0.0;
  for (double x : d) {
    if (!(x >= 0.0)) throw std::invalid_argument("distribution has a negative or NaN entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument(fmt::format("distribution sums to {}", total));
}

// ---------------------------------------------------------------------------
// Exclusion enumeration
// ---------------------------------------------------------------------------

std::string exclusion_key(const ExclusionConfig& c) {
  std::string key(c.occupancy.size(), '0');
  for (std::size_t v = 0; v < c.occupancy.size(); ++v)
    if (c.occupancy[v]) key[v] = '1';
  return key;
}

std::string exclusion_key(int n, std::span<const Vertex> occupied) {
  std::string key(static_cast<std::size_t>(n), '0');
  for (Vertex v : occupied) key[static_cast<std::size_t>(v)] = '1';
  return key;
}

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

/// Vertex permutations of the translation group of a torus or hypercube.
std::vector<std::vector<Vertex>> translations(const Graph& g) {
  const int n = g.vertex_count();
  std::vector<std::vector<Vertex>> out;
  if (g.kind() == GraphKind::hypercube) {
    for (int a = 0; a < n; ++a) {
      std::vector<Vertex> perm(static_cast<std::size_t>(n));
      for (Vertex v = 0; v < n; ++v) perm[static_cast<std::size_t>(v)] = v ^ a;
      out.push_back(std::move(perm));
    }
  } else if (g.kind() == GraphKind::torus) {
    for (int a = 0; a < n; ++a) {
      const auto shift = g.coordinates(a);
      std::vector<Vertex> perm(static_cast<std::size_t>(n));
      for (Vertex v = 0; v < n; ++v) {
        auto c = g.coordinates(v);
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += shift[i];
        perm[static_cast<std::size_t>(v)] = g.vertex_at(c);
      }
      out.push_back(std::move(perm));
    }
  }
  return out;
}

}  // namespace

ExactChain enumerate_exclusion(const Graph& g, int k, std::size_t cap) {
  const int n = g.vertex_count();
  if (k < 1 || 2 * k > n) throw std::invalid_argument(fmt::format("k = {} outside [1, n/2] for n = {}", k, n));
  const double count = binomial(n, k);
  if (count > static_cast<double>(cap))
    throw CapExceeded(fmt::format("exclusion state space C({},{}) = {:.0f} exceeds cap {}", n, k, count, cap));

  ChainBuilder builder;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    builder.add_state(exclusion_key(n, idx));
    int i = k - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - k + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < k; ++j) idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j) - 1] + 1;
  }
  for (int s = 0; s < static_cast<int>(builder.size()); ++s) {
    const std::string key = builder.key(s);
    for (const Edge& e : g.edges()) {
      if (key[static_cast<std::size_t>(e.u)] == key[static_cast<std::size_t>(e.v)]) continue;
      std::string next = key;
      std::swap(next[static_cast<std::size_t>(e.u)], next[static_cast<std::size_t>(e.v)]);
      builder.add_rate(s, builder.find(next), 1.0);
    }
  }
  ExactChain chain = builder.finish();

  const auto group = translations(g);
  if (!group.empty()) {
    for (int s = 0; s < chain.size(); ++s) {
      const std::string& key = chain.states[static_cast<std::size_t>(s)];
      bool canonical = true;
      std::string img(key.size(), '0');
      for (const auto& perm : group) {
        std::fill(img.begin(), img.end(), '0');
        for (std::size_t v = 0; v < key.size(); ++v)
          if (key[v] == '1') img[static_cast<std::size_t>(perm[v])] = '1';
        if (img < key) {
          canonical = false;
          break;
        }
      }
      if (canonical) chain.start_representatives.push_back(s);
    }
  }
  return chain;
}

// ---------------------------------------------------------------------------
// Chameleon enumeration
// ---------------------------------------------------------------------------

std::string ChameleonExactState::key() const {
  std::string k;
  for (std::size_t i = 0; i < blacks.size(); ++i) {
    if (i) k.push_back('.');
    k += std::to_string(blacks[i]);
  }
  k.push_back('|');
  for (Color c : colors) k.push_back(color_letter(c));
  return k;
}

ColorCounts ChameleonExactState::counts() const {
  ColorCounts c;
  for (Color col : colors) {
    switch (col) {
      case Color::black: ++c.b; break;
      case Color::red: ++c.r; break;
      case Color::white: ++c.w; break;
      case Color::pink: ++c.p; break;
    }
  }
  return c;
}

ChameleonExactState ChameleonExactState::from_state(const ChameleonState& st) {
  ChameleonExactState s;
  s.blacks = st.black_positions();
  s.colors.resize(static_cast<std::size_t>(st.n()));
  for (Vertex v = 0; v < st.n(); ++v) s.colors[static_cast<std::size_t>(v)] = st.color_at(v);
  return s;
}

ChameleonState ChameleonExactState::to_state(const Graph& g, bool check_stored) const {
  return ChameleonState::from_vertex_colors(g, colors, blacks, check_stored);
}

namespace {

struct Branch {
  ChameleonExactState state;
  double rate;
};

void ring_branches(const Graph& g, const ChameleonExactState& s, const Edge& e, bool swap, RecolorMode mode,
                   std::vector<Branch>& out) {
  ChameleonExactState next = s;
  const auto u = static_cast<std::size_t>(e.u);
  const auto v = static_cast<std::size_t>(e.v);
  if (swap) {
    std::swap(next.colors[u], next.colors[v]);
    for (Vertex& pos : next.blacks) {
      if (pos == e.u)
        pos = e.v;
      else if (pos == e.v)
        pos = e.u;
    }
  }
  if (mode != RecolorMode::none) {
    const Color a = next.colors[u], c = next.colors[v];
    if ((a == Color::red && c == Color::white) || (a == Color::white && c == Color::red)) {
      next.colors[u] = Color::pink;
      next.colors[v] = Color::pink;
    }
  }
  if (mode == RecolorMode::full && depinking_triggered(next.counts())) {
    for (Color target : {Color::red, Color::white}) {
      ChameleonExactState d = next;
      for (Color& col : d.colors)
        if (col == Color::pink) col = target;
      out.push_back({std::move(d), 0.5});
    }
  } else {
    out.push_back({std::move(next), 1.0});
  }
  (void)g;
}

}  // namespace

ChameleonChain enumerate_chameleon_from(const Graph& g, int b, std::span<const ChameleonExactState> starts,
                                        RecolorMode mode, std::size_t cap) {
  if (starts.empty()) throw std::invalid_argument("enumerate_chameleon_from: no start states");
  ChainBuilder builder;
  std::vector<ChameleonExactState> decoded;
  std::deque<int> frontier;
  for (const auto& s : starts) {
    if (static_cast<int>(s.blacks.size()) != b || static_cast<int>(s.colors.size()) != g.vertex_count())
      throw std::invalid_argument("start state does not match (g, b)");
    const auto before = builder.size();
    const int id = builder.add_state(s.key());
    if (builder.size() > before) {
      decoded.push_back(s);
      frontier.push_back(id);
    }
  }
  std::vector<std::vector<std::pair<int, double>>> pending;
  std::vector<Branch> branches;
  while (!frontier.empty()) {
    const int id = frontier.front();
    frontier.pop_front();
    const ChameleonExactState cur = decoded[static_cast<std::size_t>(id)];
    branches.clear();
    for (const Edge& e : g.edges()) {
      ring_branches(g, cur, e, true, mode, branches);
      ring_branches(g, cur, e, false, mode, branches);
    }
    for (auto& br : branches) {
      const std::string key = br.state.key();
      int to = builder.find(key);
      if (to < 0) {
        if (builder.size() >= cap)
          throw CapExceeded(fmt::format("chameleon state space exceeds cap {}", cap));
        to = builder.add_state(key);
        decoded.push_back(std::move(br.state));
        frontier.push_back(to);
      }
      builder.add_rate(id, to, br.rate);
    }
  }
  ChameleonChain out;
  out.chain = builder.finish();
  out.decoded = std::move(decoded);
  out.b = b;
  out.m = g.vertex_count() - b;
  out.start = out.chain.find(starts.front().key());
  out.mode = mode;
  return out;
}

ChameleonChain enumerate_chameleon(const Graph& g, int b, std::span<const Vertex> placement, RecolorMode mode,
                                   std::size_t cap) {
  const ChameleonState st = initial_chameleon(g, b, placement);
  const ChameleonExactState s = ChameleonExactState::from_state(st);
  return enumerate_chameleon_from(g, b, std::span<const ChameleonExactState>(&s, 1), mode, cap);
}

// ---------------------------------------------------------------------------
// Transient analysis
// ---------------------------------------------------------------------------

namespace {

/// y = x P with P = I + Q / lambda.
void uniformized_step(const ExactChain& c, double lambda, const DistVector& x, DistVector& y) {
  const std::size_t n = x.size();
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] * (1.0 - c.exit_rate[i] / lambda);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double scaled = xi / lambda;
    for (int p = c.row_ptr[i]; p < c.row_ptr[i + 1]; ++p)
      y[static_cast<std::size_t>(c.col[static_cast<std::size_t>(p)])] += scaled * c.rate[static_cast<std::size_t>(p)];
  }
}

}  // namespace

DistVector transient_distribution(const ExactChain& chain, const DistVector& d0, double t, double tol) {
  validate_distribution(chain, d0);
  if (!(t >= 0)) throw std::invalid_argument("transient_distribution: t must be >= 0");
  if (!(tol > 0 && tol <= 1e-6)) throw std::invalid_argument("transient_distribution: tol must lie in (0, 1e-6]");
  const double lambda = chain.uniformization_rate;
  if (t == 0.0 || lambda == 0.0) return d0;

  const double total = lambda * t;
  const auto steps = static_cast<long>(std::max(1.0, std::ceil(total / 32.0)));
  const double mean = total / static_cast<double>(steps);
  const double step_tol = tol / static_cast<double>(steps);
  const std::size_t n = d0.size();

  DistVector cur = d0, term(n), next(n), acc(n);
  for (long s = 0; s < steps; ++s) {
    std::fill(acc.begin(), acc.end(), 0.0);
    term = cur;
    double w = std::exp(-mean);
    for (long k = 0;; ++k) {
      for (std::size_t i = 0; i < n; ++i) acc[i] += w * term[i];
      const double w_next = w * mean / static_cast<double>(k + 1);
      const double kk = static_cast<double>(k + 2);
      if (kk > mean && w_next / (1.0 - mean / kk) <= step_tol) break;
      uniformized_step(chain, lambda, term, next);
      std::swap(term, next);
      w = w_next;
    }
    std::swap(cur, acc);
  }
  return cur;
}

double tv_distance(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size())
    throw std::invalid_argument(fmt::format("tv_distance: lengths {} and {} differ", p.size(), q.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::abs(p[i] - q[i]);
  return 0.5 * s;
}

double worst_tv_to_uniform(const ExactChain& chain, double t, double tol) {
  std::vector<int> starts = chain.start_representatives;
  if (starts.empty()) {
    starts.resize(static_cast<std::size_t>(chain.size()));
    std::iota(starts.begin(), starts.end(), 0);
  }
  const DistVector uniform(static_cast<std::size_t>(chain.size()), 1.0 / chain.size());
  const auto tvs = map_trials<double>(starts.size(), default_exec(), [&](std::size_t i) {
    return tv_distance(transient_distribution(chain, point_mass(chain, starts[i]), t, tol), uniform);
  });
  return *std::max_element(tvs.begin(), tvs.end());
}

bool irreducible(const ExactChain& chain) {
  const int n = chain.size();
  if (n == 0) return false;
  std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int p = chain.row_ptr[static_cast<std::size_t>(i)]; p < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      rev[static_cast<std::size_t>(chain.col[static_cast<std::size_t>(p)])].push_back(i);
  auto sweep = [&](bool forward) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      const int i = stack.back();
      stack.pop_back();
      auto visit = [&](int j) {
        if (!seen[static_cast<std::size_t>(j)]) {
          seen[static_cast<std::size_t>(j)] = 1;
          ++count;
          stack.push_back(j);
        }
      };
      if (forward) {
        for (int p = chain.row_ptr[static_cast<std::size_t>(i)]; p < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
          visit(chain.col[static_cast<std::size_t>(p)]);
      } else {
        for (int j : rev[static_cast<std::size_t>(i)]) visit(j);
      }
    }
    return count == n;
  };
  return sweep(true) && sweep(false);
}

double mixing_time_exact(const ExactChain& chain, double threshold, double rel_precision) {
  if (!(threshold > 0 && threshold < 1)) throw std::invalid_argument("mixing threshold must lie in (0, 1)");
  if (!irreducible(chain)) throw std::invalid_argument("mixing_time_exact: chain is reducible");
  if (!chain.symmetric()) throw std::invalid_argument("mixing_time_exact: generator is not symmetric");
  auto worst = [&](double t) { return worst_tv_to_uniform(chain, t); };
  if (worst(0.0) <= threshold) return 0.0;
  double lo = 0.0;
  double hi = 1.0 / chain.uniformization_rate;
  while (worst(hi) > threshold) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e9) throw std::runtime_error("mixing_time_exact: no convergence below 1e9");
  }
  while (hi - lo > rel_precision * hi) {
    const double mid = 0.5 * (lo + hi);
    (worst(mid) <= threshold ? hi : lo) = mid;
  }
  return hi;
}

double spectral_gap(const ExactChain& chain, std::size_t dense_cap) {
  const auto n = static_cast<std::size_t>(chain.size());
  if (n > dense_cap) throw CapExceeded(fmt::format("spectral_gap: {} states exceed dense cap {}", n, dense_cap));
  if (!chain.symmetric()) throw std::invalid_argument("spectral_gap: generator is not symmetric");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    m(ii, ii) = chain.exit_rate[i];
    for (int p = chain.row_ptr[i]; p < chain.row_ptr[i + 1]; ++p)
      m(ii, chain.col[static_cast<std::size_t>(p)]) = -chain.rate[static_cast<std::size_t>(p)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  const double scale = std::max(1.0, std::abs(ev(ev.size() - 1)));
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev(i) > 1e-9 * scale) return ev(i);
  return 0.0;
}

std::vector<double> hitting_time_solve(const ExactChain& chain, std::span<const int> target, bool allow_unreachable) {
  const int n = chain.size();
  if (target.empty()) throw std::invalid_argument("hitting_time_solve: target set is empty");
  std::vector<char> in_b(static_cast<std::size_t>(n), 0);
  for (int i : target) {
    if (i < 0 || i >= n) throw std::invalid_argument("hitting_time_solve: target index out of range");
    in_b[static_cast<std::size_t>(i)] = 1;
  }
  std::vector<std::vector<int>> rev(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int p = chain.row_ptr[static_cast<std::size_t>(i)]; p < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      rev[static_cast<std::size_t>(chain.col[static_cast<std::size_t>(p)])].push_back(i);

  // States that can reach B.
  std::vector<char> reach(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  for (int i = 0; i < n; ++i)
    if (in_b[static_cast<std::size_t>(i)]) {
      reach[static_cast<std::size_t>(i)] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (int i : rev[static_cast<std::size_t>(j)])
      if (!reach[static_cast<std::size_t>(i)]) {
        reach[static_cast<std::size_t>(i)] = 1;
        stack.push_back(i);
      }
  }
  // States with an off-B path into a state that cannot reach B have infinite mean.
  std::vector<char> infinite(static_cast<std::size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    if (!reach[static_cast<std::size_t>(i)]) {
      infinite[static_cast<std::size_t>(i)] = 1;
      stack.push_back(i);
    }
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (int i : rev[static_cast<std::size_t>(j)])
      if (!infinite[static_cast<std::size_t>(i)] && !in_b[static_cast<std::size_t>(i)]) {
        infinite[static_cast<std::size_t>(i)] = 1;
        stack.push_back(i);
      }
  }
  const bool any_infinite = std::find(infinite.begin(), infinite.end(), 1) != infinite.end();
  if (any_infinite && !allow_unreachable)
    throw std::invalid_argument("hitting_time_solve: some states do not hit the target almost surely");

  std::vector<int> local(static_cast<std::size_t>(n), -1);
  std::vector<int> free_states;
  for (int i = 0; i < n; ++i)
    if (!in_b[static_cast<std::size_t>(i)] && !infinite[static_cast<std::size_t>(i)]) {
      local[static_cast<std::size_t>(i)] = static_cast<int>(free_states.size());
      free_states.push_back(i);
    }

  std::vector<double> W(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i)
    if (infinite[static_cast<std::size_t>(i)]) W[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
  if (free_states.empty()) return W;

  const auto m = static_cast<Eigen::Index>(free_states.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (Eigen::Index a = 0; a < m; ++a) {
    const auto i = static_cast<std::size_t>(free_states[static_cast<std::size_t>(a)]);
    trip.emplace_back(a, a, chain.exit_rate[i]);
    for (int p = chain.row_ptr[i]; p < chain.row_ptr[i + 1]; ++p) {
      const int j = local[static_cast<std::size_t>(chain.col[static_cast<std::size_t>(p)])];
      if (j >= 0) trip.emplace_back(a, j, -chain.rate[static_cast<std::size_t>(p)]);
    }
  }
  Eigen::SparseMatrix<double> A(m, m);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("hitting_time_solve: factorization failed");
  const Eigen::VectorXd rhs = Eigen::VectorXd::Ones(m);
  Eigen::VectorXd x = lu.solve(rhs);
  for (int refine = 0; refine < 3; ++refine) {
    const Eigen::VectorXd r = rhs - A * x;
    if (r.cwiseAbs().maxCoeff() <= 1e-12) break;
    x += lu.solve(r);
  }
  const double residual = (rhs - A * x).cwiseAbs().maxCoeff();
  if (!(residual <= 1e-10))
    throw std::runtime_error(fmt::format("hitting_time_solve: residual {} exceeds 1e-10", residual));
  for (Eigen::Index a = 0; a < m; ++a) W[static_cast<std::size_t>(free_states[static_cast<std::size_t>(a)])] = x(a);
  return W;
}

double hitting_time_drift(const ExactChain& chain, std::span<const double> W, int x, double eps, double tol) {
  if (static_cast<int>(W.size()) != chain.size()) throw std::invalid_argument("hitting_time_drift: size mismatch");
  const DistVector d = transient_distribution(chain, point_mass(chain, x), eps, tol);
  double expect = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j)
    if (d[j] != 0.0) expect += d[j] * W[j];
  return expect - W[static_cast<std::size_t>(x)];
}

// ---------------------------------------------------------------------------
// Kernels
// ---------------------------------------------------------------------------

std::vector<double> heat_kernel_cycle(int L, double t) {
  if (L < 2) throw std::invalid_argument("heat_kernel_cycle: L must be >= 2");
  if (!(t >= 0)) throw std::invalid_argument("heat_kernel_cycle: t must be >= 0");
  std::vector<double> p(static_cast<std::size_t>(L), 0.0);
  if (t == 0.0) {
    p[0] = 1.0;
    return p;
  }
  const double two_pi = 2.0 * std::numbers::pi;
  for (int j = 0; j < L; ++j) {
    const double decay = std::exp(-4.0 * (1.0 - std::cos(two_pi * j / L)) * t);
    for (int y = 0; y < L; ++y) p[static_cast<std::size_t>(y)] += decay * std::cos(two_pi * j * y / L);
  }
  for (double& x : p) x /= L;
  return p;
}

double heat_kernel_torus(int L, int d, double t, std::span<const int> offset) {
  if (d < 1) throw std::invalid_argument("heat_kernel_torus: d must be >= 1");
  if (static_cast<int>(offset.size()) != d) throw std::invalid_argument("heat_kernel_torus: offset arity != d");
  const auto k = heat_kernel_cycle(L, t);
  double p = 1.0;
  for (int o : offset) p *= k[static_cast<std::size_t>(((o % L) + L) % L)];
  return p;
}

double heat_kernel_torus_max(int L, int d, double t) {
  const auto k = heat_kernel_cycle(L, t);
  return std::pow(*std::max_element(k.begin(), k.end()), d);
}

double tau_eps(int L, int d, double eps, double rel_precision) {
  if (L < 2 || d < 1) throw std::invalid_argument("tau_eps: need L >= 2 and d >= 1");
  const double n = std::pow(static_cast<double>(L), d);
  if (eps < (1.0 / n) * (1.0 - 1e-12))
    throw std::invalid_argument(fmt::format("tau_eps: eps = {} is below 1/n = {}", eps, 1.0 / n));
  const double level = 7.0 / 6.0 * eps;
  if (level >= 1.0) return 0.0;
  double lo = 0.0, hi = 1.0 / 64;
  while (heat_kernel_torus_max(L, d, hi) > level) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > rel_precision * hi) {
    const double mid = 0.5 * (lo + hi);
    (heat_kernel_torus_max(L, d, mid) <= level ? hi : lo) = mid;
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Lemma 1 / Lemma 2
// ---------------------------------------------------------------------------

namespace {

struct Conditional {
  double mass = 0.0;
  std::vector<double> weighted;  // per vertex
};

/// Groups a chameleon-chain distribution by black tuple, accumulating
/// P(tuple) and sum P * redness(u) for each vertex u.
std::map<std::vector<Vertex>, Conditional> group_by_blacks(const ChameleonChain& c, const DistVector& d, int n) {
  std::map<std::vector<Vertex>, Conditional> out;
  for (int i = 0; i < c.chain.size(); ++i) {
    const double p = d[static_cast<std::size_t>(i)];
    const auto& s = c.decoded[static_cast<std::size_t>(i)];
    auto& entry = out[s.blacks];
    if (entry.weighted.empty()) entry.weighted.assign(static_cast<std::size_t>(n), 0.0);
    entry.mass += p;
    for (Vertex u = 0; u < n; ++u) {
      const Color col = s.colors[static_cast<std::size_t>(u)];
      if (col == Color::red)
        entry.weighted[static_cast<std::size_t>(u)] += p;
      else if (col == Color::pink)
        entry.weighted[static_cast<std::size_t>(u)] += 0.5 * p;
    }
  }
  return out;
}

}  // namespace

Lemma1Result verify_lemma1(const Graph& g, int b, double t, double tol, std::span<const Vertex> placement,
                           double min_condition_prob, std::size_t cap) {
  const int n = g.vertex_count();
  const ChameleonChain inter = enumerate_chameleon(g, b, placement, RecolorMode::none, cap);
  const ChameleonChain cham = enumerate_chameleon(g, b, placement, RecolorMode::full, cap);
  const auto lhs = group_by_blacks(inter, transient_distribution(inter.chain, point_mass(inter.chain, inter.start), t, tol), n);
  const auto rhs = group_by_blacks(cham, transient_distribution(cham.chain, point_mass(cham.chain, cham.start), t, tol), n);

  Lemma1Result r;
  std::map<std::vector<Vertex>, int> tuples;
  for (const auto& [z, _] : lhs) tuples[z] = 1;
  for (const auto& [z, _] : rhs) tuples[z] = 1;
  for (const auto& [z, _] : tuples) {
    const auto a = lhs.find(z);
    const auto c = rhs.find(z);
    const double pa = a == lhs.end() ? 0.0 : a->second.mass;
    const double pc = c == rhs.end() ? 0.0 : c->second.mass;
    if (pa <= min_condition_prob || pc <= min_condition_prob) {
      // A tuple that is likely under one law but not the other is itself a discrepancy.
      r.max_discrepancy = std::max(r.max_discrepancy, std::abs(pa - pc));
      ++r.skipped_events;
      continue;
    }
    ++r.conditioning_events;
    for (Vertex u = 0; u < n; ++u) {
      if (std::find(z.begin(), z.end(), u) != z.end()) continue;
      const double left = a->second.weighted[static_cast<std::size_t>(u)] / pa;
      const double right = c->second.weighted[static_cast<std::size_t>(u)] / pc;
      r.max_discrepancy = std::max(r.max_discrepancy, std::abs(left - right));
    }
  }
  return r;
}

double lemma2_lhs_exact(const Graph& g, int b, double t, std::span<const Vertex> placement, double tol) {
  const int n = g.vertex_count();
  const int m = n - b;
  const ChameleonChain inter = enumerate_chameleon(g, b, placement, RecolorMode::none);
  const auto groups =
      group_by_blacks(inter, transient_distribution(inter.chain, point_mass(inter.chain, inter.start), t, tol), n);
  double total = 0.0;
  for (const auto& [z, entry] : groups) {
    if (entry.mass <= 0) continue;
    double tv = 0.0;
    for (Vertex u = 0; u < n; ++u) {
      if (std::find(z.begin(), z.end(), u) != z.end()) continue;
      tv += std::abs(entry.weighted[static_cast<std::size_t>(u)] / entry.mass - 1.0 / m);
    }
    total += entry.mass * 0.5 * tv;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Lemma 12
// ---------------------------------------------------------------------------

void TupleDistribution::validate() const {
  if (k < 1) throw std::invalid_argument("tuple distribution needs k >= 1");
  double total = 0.0;
  for (const auto& [tuple, p] : prob) {
    if (static_cast<int>(tuple.size()) != k) throw std::invalid_argument("tuple of the wrong arity");
    auto sorted = tuple;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw std::invalid_argument("tuple repeats a vertex");
    if (!sorted.empty() && sorted.front() < 0) throw std::invalid_argument("negative vertex in tuple");
    if (!(p >= 0)) throw std::invalid_argument("negative tuple probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-10) throw std::invalid_argument(fmt::format("tuple distribution sums to {}", total));
}

namespace {

/// prefix (length l) -> (prefix mass, next vertex -> mass)
using PrefixTable = std::map<std::vector<Vertex>, std::pair<double, std::map<Vertex, double>>>;

PrefixTable prefix_table(const TupleDistribution& d, int l) {
  PrefixTable t;
  for (const auto& [tuple, p] : d.prob) {
    std::vector<Vertex> prefix(tuple.begin(), tuple.begin() + l);
    auto& e = t[prefix];
    e.first += p;
    e.second[tuple[static_cast<std::size_t>(l)]] += p;
  }
  return t;
}

}  // namespace

TupleDistribution random_tuple_distribution(int n, int k, double zero_prob, Rng& rng) {
  if (k < 1 || k > n) throw std::invalid_argument("random_tuple_distribution: need 1 <= k <= n");
  if (!(zero_prob >= 0 && zero_prob < 1)) throw std::invalid_argument("random_tuple_distribution: zero_prob in [0, 1)");
  std::vector<std::vector<Vertex>> tuples{{}};
  for (int l = 0; l < k; ++l) {
    std::vector<std::vector<Vertex>> next;
    for (const auto& t : tuples)
      for (Vertex v = 0; v < n; ++v)
        if (std::find(t.begin(), t.end(), v) == t.end()) {
          next.push_back(t);
          next.back().push_back(v);
        }
    tuples = std::move(next);
  }
  TupleDistribution d{k, {}};
  std::vector<double> w(tuples.size(), 0.0);
  double total = 0.0;
  while (total == 0.0)
    for (auto& x : w) {
      x = rng.uniform() < zero_prob ? 0.0 : rng.uniform();
      total += x;
    }
  for (std::size_t i = 0; i < tuples.size(); ++i)
    if (w[i] > 0) d.prob[tuples[i]] = w[i] / total;
  return d;
}

Lemma12Result lemma12_gap(const TupleDistribution& mu, const TupleDistribution& nu) {
  mu.validate();
  nu.validate();
  if (mu.k != nu.k) throw std::invalid_argument("lemma12_gap: tuple lengths differ");
  Lemma12Result r;
  {
    std::map<std::vector<Vertex>, double> diff;
    for (const auto& [t, p] : mu.prob) diff[t] += p;
    for (const auto& [t, p] : nu.prob) diff[t] -= p;
    double s = 0.0;
    for (const auto& [_, x] : diff) s += std::abs(x);
    r.lhs = 0.5 * s;
  }
  for (int l = 0; l < mu.k; ++l) {
    const auto tm = prefix_table(mu, l);
    const auto tn = prefix_table(nu, l);
    for (const auto& [prefix, entry] : tm) {
      const double pm = entry.first;
      if (pm <= 0) continue;
      const auto it = tn.find(prefix);
      double tv = 1.0;
      if (it != tn.end() && it->second.first > 0) {
        const double pn = it->second.first;
        std::map<Vertex, double> diff;
        for (const auto& [v, x] : entry.second) diff[v] += x / pm;
        for (const auto& [v, x] : it->second.second) diff[v] -= x / pn;
        double s = 0.0;
        for (const auto& [_, x] : diff) s += std::abs(x);
        tv = 0.5 * s;
      }
      r.rhs += pm * tv;
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// Exports
// ---------------------------------------------------------------------------

void write_tv_curve_csv(std::ostream& os, const ExactChain& chain, std::span<const double> times) {
  os << "t,worst_tv\n";
  for (double t : times) os << fmt::format("{:.17g},{:.17g}\n", t, worst_tv_to_uniform(chain, t));
}

void write_chain_dump(std::ostream& os, const ExactChain& chain) {
  os << "# states " << chain.size() << '\n';
  for (int i = 0; i < chain.size(); ++i) os << i << ' ' << chain.states[static_cast<std::size_t>(i)] << '\n';
  os << "# generator\n";
  for (int i = 0; i < chain.size(); ++i) {
    os << fmt::format("{} {} {:.17g}\n", i, i, -chain.exit_rate[static_cast<std::size_t>(i)]);
    for (int p = chain.row_ptr[static_cast<std::size_t>(i)]; p < chain.row_ptr[static_cast<std::size_t>(i) + 1]; ++p)
      os << fmt::format("{} {} {:.17g}\n", i, chain.col[static_cast<std::size_t>(p)], chain.rate[static_cast<std::size_t>(p)]);
  }
}

}  // namespace chameleon
