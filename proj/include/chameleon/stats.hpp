#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace chameleon {

/// Streaming mean/variance (Welford). Mergeable, so per-thread partials can
/// be combined, but the estimators here always push in trial order.
class RunningStats {
 public:
  void push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  void merge(const RunningStats& other);

  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  /// Unbiased sample variance; 0 with fewer than two samples.
  double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double stderr_of_mean() const { return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

RunningStats summarize(std::span<const double> xs);

enum class WeightKind { plain, s_ratio };

std::string to_string(WeightKind w);

/// Monte Carlo point estimate with its standard error.
struct WeightedEstimate {
  double point = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
  WeightKind weight = WeightKind::plain;

  /// |point - target| <= z * stderr.
  bool agrees_with(double target, double z = 3.0) const { return std::abs(point - target) <= z * std_error; }
};

WeightedEstimate make_estimate(const RunningStats& s, WeightKind w = WeightKind::plain);

struct ChiSquareResult {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 1.0;
};

/// Pearson goodness of fit of observed counts against expected probabilities.
/// Cells with expected count below min_expected are pooled into one cell.
ChiSquareResult chi_square_gof(std::span<const double> observed_counts, std::span<const double> expected_probs,
                               double min_expected = 5.0);

/// Ordinary least squares y = a + b x. Returns {intercept, slope, r_squared}.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace chameleon
