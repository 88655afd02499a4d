#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "chameleon/analysis.hpp"
#include "chameleon/processes.hpp"
#include "chameleon/stats.hpp"

namespace chameleon {

/// Constants and sizes entering the bound formulas. c and C are the
/// unspecified universal constants; they default to 1.
struct BoundParams {
  double c = 1.0;
  double C = 1.0;
  int L = 4;
  int d = 1;
  int k = 1;
  int b = 0;

  double n() const;
  double m() const { return n() - b; }
  /// max(ln d, 1).
  double logd_plus() const;
  /// Throws std::invalid_argument unless c, C > 0, 1 <= k <= n/2, 0 <= b <= k - 1, L >= 2, d >= 1.
  void validate() const;
};

/// 2 / (sqrt(4/3) + sqrt(2/3)) - 1.
double gamma_const();

/// c logd+ (S + b)^(2/d).
double g_func(double S, const BoundParams& p);

/// z >= sqrt 2: 1 / (4 g((1+gamma)^2 m / z^2)); otherwise 1 / (4 c logd+ L^2).
double f_func(double z, const BoundParams& p);

/// Integral of dz / (gamma z f(z)) over [delta/2, L0/2], by adaptive
/// Gauss-Kronrod quadrature in log z, split at the breakpoints of f.
double ode_time_bound(double L0, double delta, const BoundParams& p);

struct IntegralDecomposition {
  double I1 = 0.0;  // [1/(8k), sqrt 2]
  double I2 = 0.0;  // [sqrt 2, sqrt(m/b)] (to sqrt n when b = 0)
  double I3 = 0.0;  // [sqrt(m/b), sqrt n] (0 when b = 0)
  double total = 0.0;
  double I1_closed_form = 0.0;  // 4 c logd+ L^2 ln(8 sqrt(2) k) / gamma
  double ratio = 0.0;           // total / (d logd+ L^2 + logd+ L^2 ln k)
};

IntegralDecomposition integral_decomposition(const BoundParams& p);

/// C (d logd+ L^2 + logd+ L^2 ln k).
double theorem7_bound(const BoundParams& p);

struct ChameleonFunctionals {
  double S = 0.0;
  double s = 0.0;
  double s_sharp = 0.0;  // min(s, 1 - s)
  double W = 0.0;
  double Y = 0.0;
  double Z = 0.0;
};

/// Y = 1 + gamma W / g(S), Z = sqrt(s#) / s * Y (Z = 0 when s# = 0).
/// Throws std::invalid_argument when s = 0.
ChameleonFunctionals Z_functional(const ColorCounts& counts, double W, const BoundParams& p);
ChameleonFunctionals Z_functional(const ChameleonState& st, double W, const BoundParams& p);

/// Waiting times for every stored state of the chameleon chain from
/// initial_chameleon(g, b, placement).
DepinkWait depinking_wait_all(const Graph& g, int b, std::span<const Vertex> placement = {},
                              std::size_t cap = kDefaultStateCap);

/// Importance-weighted estimate of E(Z_t | A). Every visited state must be in wait.
WeightedEstimate estimate_Lt(const Graph& g, int b, double t, std::size_t trials, RngSeed seed,
                             const BoundParams& p, const DepinkWait& wait, std::span<const Vertex> placement = {},
                             Exec exec = default_exec());

/// Smallest c >= 1 with W <= g(S) on every non-absorbed state of wait.
double calibrate_c(const DepinkWait& wait, BoundParams p);

struct FZCheck {
  std::size_t states = 0;
  std::size_t violations = 0;
  double worst_ratio = 0.0;  // max f(Z) * 4 g(S)
};

/// Checks f(Z) <= 1 / (4 g(S)) on every non-absorbed stored state of wait.
FZCheck check_f_of_Z(const DepinkWait& wait, const BoundParams& p);

/// E(Z f(2Z)) >= (EZ / 2) f(EZ) for Z with integer atoms z (weights w) and
/// f = sum_j heights[j] 1[x >= thresholds[j]], heights >= 0. Exact integer arithmetic.
bool lemma4_holds(std::span<const std::int64_t> z, std::span<const std::int64_t> w,
                  std::span<const std::int64_t> thresholds, std::span<const std::int64_t> heights);

struct Lemma4Summary {
  std::size_t instances = 0;
  std::size_t violations = 0;
};

/// Random instances with at most 8 atoms.
Lemma4Summary lemma4_spot_check(std::size_t instances, std::uint64_t seed);

struct Prop9Entry {
  int L = 0;
  int d = 0;
  int j = 0;
  double eps = 0.0;
  double tau = 0.0;
  double ratio = 0.0;  // tau / (eps^(-2/d) logd+)
};

struct Prop9Result {
  std::vector<Prop9Entry> entries;
  double D = 0.0;  // max ratio over the grid
};

/// tau_eps over eps = j^-d, j = 2..L, for every (d, L) pair.
Prop9Result prop9_grid(std::span<const int> dims, std::span<const int> sides);

struct Prop11Point {
  double eps = 0.0;
  double slope = 0.0;  // (E_x W(X_eps) - W(x)) / eps
  double error = 0.0;  // |slope + 1|
};

/// Finite-difference slopes of the depinking wait at state index x of wait.chain.
std::vector<Prop11Point> prop11_slopes(const DepinkWait& wait, int x, std::span<const double> eps);

}  // namespace chameleon
