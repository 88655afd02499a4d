#include "chameleon/stats.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace chameleon {

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double total = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / total;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / total;
  n_ += other.n_;
}

RunningStats summarize(std::span<const double> xs) {
  RunningStats s;
  for (double x : xs) s.push(x);
  return s;
}

std::string to_string(WeightKind w) { return w == WeightKind::plain ? "plain" : "s_ratio"; }

WeightedEstimate make_estimate(const RunningStats& s, WeightKind w) {
  return {s.mean(), s.stderr_of_mean(), s.count(), w};
}

ChiSquareResult chi_square_gof(std::span<const double> observed_counts, std::span<const double> expected_probs,
                               double min_expected) {
  if (observed_counts.size() != expected_probs.size())
    throw std::invalid_argument("chi_square_gof: size mismatch");
  const double total = std::accumulate(observed_counts.begin(), observed_counts.end(), 0.0);
  if (total <= 0) throw std::invalid_argument("chi_square_gof: no observations");
  double stat = 0.0;
  int cells = 0;
  double pooled_obs = 0.0, pooled_exp = 0.0;
  for (std::size_t i = 0; i < observed_counts.size(); ++i) {
    const double e = expected_probs[i] * total;
    if (e < min_expected) {
      pooled_obs += observed_counts[i];
      pooled_exp += e;
      continue;
    }
    stat += (observed_counts[i] - e) * (observed_counts[i] - e) / e;
    ++cells;
  }
  if (pooled_exp > 0) {
    stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
    ++cells;
  } else if (pooled_obs > 0) {
    // Observations in cells of zero probability: reject outright.
    return {std::numeric_limits<double>::infinity(), std::max(cells - 1, 1), 0.0};
  }
  ChiSquareResult r;
  r.statistic = stat;
  r.dof = cells - 1;
  if (r.dof < 1) return r;
  boost::math::chi_squared_distribution<double> dist(r.dof);
  r.p_value = boost::math::cdf(boost::math::complement(dist, stat));
  return r;
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit_line needs >= 2 paired points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit_line: x values are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

}  // namespace chameleon
