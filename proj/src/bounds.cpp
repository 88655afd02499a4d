#include "chameleon/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <fmt/format.h>

namespace chameleon {

double BoundParams::n() const { return std::pow(static_cast<double>(L), d); }

double BoundParams::logd_plus() const { return std::max(std::log(static_cast<double>(d)), 1.0); }

void BoundParams::validate() const {
  if (!(c > 0) || !(C > 0)) throw std::invalid_argument("bound constants c and C must be positive");
  if (L < 2 || d < 1) throw std::invalid_argument(fmt::format("need L >= 2 and d >= 1 (got L={}, d={})", L, d));
  if (k < 1 || 2.0 * k > n()) throw std::invalid_argument(fmt::format("k = {} outside [1, n/2]", k));
  if (b < 0 || b > k - 1) throw std::invalid_argument(fmt::format("b = {} outside [0, k-1]", b));
}

double gamma_const() { return 2.0 / (std::sqrt(4.0 / 3.0) + std::sqrt(2.0 / 3.0)) - 1.0; }

double g_func(double S, const BoundParams& p) {
  if (!(S >= 0)) throw std::invalid_argument("g_func: S must be >= 0");
  return p.c * p.logd_plus() * std::pow(S + p.b, 2.0 / p.d);
}

double f_func(double z, const BoundParams& p) {
  if (!(z > 0)) throw std::invalid_argument("f_func: z must be > 0");
  if (z >= std::sqrt(2.0)) {
    const double gp = 1.0 + gamma_const();
    return 0.25 / g_func(gp * gp * p.m() / (z * z), p);
  }
  return 0.25 / (p.c * p.logd_plus() * static_cast<double>(p.L) * p.L);
}

namespace {

/// Integral of dz / (gamma z f(z)) over [lo, hi], lo <= hi, in the variable u = ln z.
double integrate_piece(double lo, double hi, const BoundParams& p) {
  if (hi <= lo) return 0.0;
  const double gamma = gamma_const();
  auto integrand = [&](double u) { return 1.0 / (gamma * f_func(std::exp(u), p)); };
  double err = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, std::log(lo), std::log(hi),
                                                                                15, 1e-13, &err);
  return v;
}

double integrate_split(double lo, double hi, const BoundParams& p) {
  std::vector<double> cuts{lo};
  const double r2 = std::sqrt(2.0);
  if (r2 > lo && r2 < hi) cuts.push_back(r2);
  if (p.b > 0) {
    const double q = std::sqrt(p.m() / p.b);
    if (q > cuts.back() && q < hi) cuts.push_back(q);
  }
  cuts.push_back(hi);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) total += integrate_piece(cuts[i], cuts[i + 1], p);
  return total;
}

}  // namespace

double ode_time_bound(double L0, double delta, const BoundParams& p) {
  if (!(delta > 0) || !(L0 > 0)) throw std::invalid_argument("ode_time_bound: L0 and delta must be positive");
  if (delta > L0) throw std::invalid_argument("ode_time_bound: need delta <= L0");
  if (!(p.c > 0)) throw std::invalid_argument("ode_time_bound: c must be positive");
  return integrate_split(delta / 2, L0 / 2, p);
}

IntegralDecomposition integral_decomposition(const BoundParams& p) {
  p.validate();
  const double lo = 1.0 / (8.0 * p.k);
  const double r2 = std::sqrt(2.0);
  const double top = std::sqrt(p.n());
  // The I2/I3 split sits at sqrt(m/b), clamped into [sqrt 2, sqrt n].
  const double mid = p.b == 0 ? top : std::clamp(std::sqrt(p.m() / p.b), r2, top);
  IntegralDecomposition r;
  r.I1 = integrate_split(lo, r2, p);
  r.I2 = integrate_split(r2, mid, p);
  r.I3 = integrate_split(mid, top, p);
  r.total = r.I1 + r.I2 + r.I3;
  const double L2 = static_cast<double>(p.L) * p.L;
  r.I1_closed_form = 4.0 * p.c / gamma_const() * p.logd_plus() * L2 * std::log(8.0 * r2 * p.k);
  r.ratio = r.total / (p.d * p.logd_plus() * L2 + p.logd_plus() * L2 * std::log(static_cast<double>(p.k)));
  return r;
}

double theorem7_bound(const BoundParams& p) {
  const double L2 = static_cast<double>(p.L) * p.L;
  return p.C * (p.d * p.logd_plus() * L2 + p.logd_plus() * L2 * std::log(static_cast<double>(p.k)));
}

ChameleonFunctionals Z_functional(const ColorCounts& counts, double W, const BoundParams& p) {
  if (!(W >= 0)) throw std::invalid_argument("Z_functional: W must be >= 0");
  ChameleonFunctionals f;
  f.S = counts.S();
  f.s = counts.s();
  if (!(f.s > 0)) throw std::invalid_argument("Z_functional: s = 0");
  f.s_sharp = std::min(f.s, 1.0 - f.s);
  f.W = W;
  const double g = g_func(f.S, p);
  f.Y = 1.0 + gamma_const() * W / g;
  if (W <= g && !(f.Y >= 1.0 && f.Y <= 1.0 + gamma_const() + 1e-15))
    throw std::logic_error("Z_functional: Y left [1, 1 + gamma]");
  f.Z = f.s_sharp == 0.0 ? 0.0 : std::sqrt(f.s_sharp) / f.s * f.Y;
  return f;
}

ChameleonFunctionals Z_functional(const ChameleonState& st, double W, const BoundParams& p) {
  return Z_functional(st.counts(), W, p);
}

DepinkWait depinking_wait_all(const Graph& g, int b, std::span<const Vertex> placement, std::size_t cap) {
  const ChameleonChain full = enumerate_chameleon(g, b, placement, RecolorMode::full, cap);
  // Start from the initial state so that its index is stable, then every other stored state.
  std::vector<ChameleonExactState> starts;
  starts.reserve(full.decoded.size());
  starts.push_back(full.decoded[static_cast<std::size_t>(full.start)]);
  for (int i = 0; i < full.chain.size(); ++i)
    if (i != full.start) starts.push_back(full.decoded[static_cast<std::size_t>(i)]);
  return depinking_wait(g, b, starts, cap);
}

WeightedEstimate estimate_Lt(const Graph& g, int b, double t, std::size_t trials, RngSeed seed,
                             const BoundParams& p, const DepinkWait& wait, std::span<const Vertex> placement,
                             Exec exec) {
  const auto h = [&](const ChameleonState& st) {
    // The weight s_t / s_0 vanishes when s_t = 0, where Z is undefined.
    if (st.counts().S() == 0) return 0.0;
    const double W = st.counts().S() == st.m() ? 0.0 : wait.at(ChameleonExactState::from_state(st));
    return Z_functional(st, W, p).Z;
  };
  return conditional_mean_given_A(g, b, t, h, trials, seed, placement, exec);
}

namespace {

template <class Fn>
void for_each_live_state(const DepinkWait& wait, Fn&& fn) {
  for (int i = 0; i < wait.chain.chain.size(); ++i) {
    const ColorCounts c = wait.chain.counts(i);
    if (depinking_triggered(c)) continue;  // transient states inside a ring
    if (c.S() <= 0 || c.S() >= c.m()) continue;
    fn(c, wait.W[static_cast<std::size_t>(i)]);
  }
}

}  // namespace

double calibrate_c(const DepinkWait& wait, BoundParams p) {
  double c = 1.0;
  p.c = 1.0;
  for_each_live_state(wait, [&](const ColorCounts& cnt, double W) { c = std::max(c, W / g_func(cnt.S(), p)); });
  return c;
}

FZCheck check_f_of_Z(const DepinkWait& wait, const BoundParams& p) {
  FZCheck out;
  for_each_live_state(wait, [&](const ColorCounts& cnt, double W) {
    const auto fz = Z_functional(cnt, W, p);
    ++out.states;
    if (fz.Z <= 0) return;  // f is only defined for positive arguments
    const double ratio = f_func(fz.Z, p) * 4.0 * g_func(fz.S, p);
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (ratio > 1.0 + 1e-12) ++out.violations;
  });
  return out;
}

bool lemma4_holds(std::span<const std::int64_t> z, std::span<const std::int64_t> w,
                  std::span<const std::int64_t> thresholds, std::span<const std::int64_t> heights) {
  if (z.size() != w.size() || z.empty()) throw std::invalid_argument("lemma4: atoms and weights differ in length");
  if (thresholds.size() != heights.size()) throw std::invalid_argument("lemma4: thresholds and heights differ");
  std::int64_t W = 0, ZW = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (z[i] < 0 || w[i] <= 0) throw std::invalid_argument("lemma4: need z >= 0 and positive weights");
    W += w[i];
    ZW += w[i] * z[i];
  }
  // f at an integer point x.
  auto f_int = [&](std::int64_t x) {
    std::int64_t s = 0;
    for (std::size_t j = 0; j < thresholds.size(); ++j)
      if (x >= thresholds[j]) s += heights[j];
    return s;
  };
  // f(EZ) with EZ = ZW / W: x >= theta iff ZW >= theta W.
  std::int64_t f_mean = 0;
  for (std::size_t j = 0; j < thresholds.size(); ++j)
    if (ZW >= thresholds[j] * W) f_mean += heights[j];
  std::int64_t lhs = 0;
  for (std::size_t i = 0; i < z.size(); ++i) lhs += w[i] * z[i] * f_int(2 * z[i]);
  // E(Z f(2Z)) >= (EZ/2) f(EZ)  <=>  2 W sum w z f(2z) >= W ZW f(EZ); W > 0 cancels.
  return 2 * lhs >= ZW * f_mean;
}

Lemma4Summary lemma4_spot_check(std::size_t instances, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  auto uniform = [&](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(gen);
  };
  Lemma4Summary out;
  for (std::size_t i = 0; i < instances; ++i) {
    const auto atoms = static_cast<std::size_t>(uniform(1, 8));
    std::vector<std::int64_t> z, w, th, h;
    for (std::size_t a = 0; a < atoms; ++a) {
      z.push_back(uniform(0, 30));
      w.push_back(uniform(1, 20));
    }
    const auto steps = static_cast<std::size_t>(uniform(1, 6));
    for (std::size_t s = 0; s < steps; ++s) {
      th.push_back(uniform(0, 60));
      h.push_back(uniform(0, 10));
    }
    ++out.instances;
    if (!lemma4_holds(z, w, th, h)) ++out.violations;
  }
  return out;
}

Prop9Result prop9_grid(std::span<const int> dims, std::span<const int> sides) {
  Prop9Result out;
  for (int d : dims)
    for (int L : sides)
      for (int j = 2; j <= L; ++j) {
        Prop9Entry e;
        e.L = L;
        e.d = d;
        e.j = j;
        e.eps = std::pow(static_cast<double>(j), -d);
        e.tau = tau_eps(L, d, e.eps);
        const double logd = std::max(std::log(static_cast<double>(d)), 1.0);
        e.ratio = e.tau / (static_cast<double>(j) * j * logd);
        out.D = std::max(out.D, e.ratio);
        out.entries.push_back(e);
      }
  return out;
}

std::vector<Prop11Point> prop11_slopes(const DepinkWait& wait, int x, std::span<const double> eps) {
  if (x < 0 || x >= wait.chain.chain.size()) throw std::invalid_argument("prop11_slopes: state index out of range");
  if (!std::isfinite(wait.W[static_cast<std::size_t>(x)]) || wait.W[static_cast<std::size_t>(x)] == 0.0)
    throw std::invalid_argument("prop11_slopes: x must lie outside B with finite wait");
  std::vector<Prop11Point> out;
  for (double e : eps) {
    Prop11Point pt;
    pt.eps = e;
    pt.slope = hitting_time_drift(wait.chain.chain, wait.W, x, e) / e;
    pt.error = std::abs(pt.slope + 1.0);
    out.push_back(pt);
  }
  return out;
}

}  // namespace chameleon
