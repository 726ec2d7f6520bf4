#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace degenlab::numeric {

struct LineFit {
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double rss = std::numeric_limits<double>::quiet_NaN();  // residual sum of squares
  std::size_t points = 0;
};

/// Ordinary least squares y = slope * x + intercept.  Non-finite pairs are
/// skipped; fewer than two usable points leave slope NaN.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

struct Extremum {
  double x;
  double value;
};

/// Golden-section search for a maximum of f on [lo, hi].
Extremum golden_max(const std::function<double(double)>& f, double lo, double hi, double tol,
                    int max_iter = 200);

/// Golden-section search for a minimum of f on [lo, hi].
Extremum golden_min(const std::function<double(double)>& f, double lo, double hi, double tol,
                    int max_iter = 200);

/// n log-spaced values from lo to hi inclusive.
std::vector<double> logspace(double lo, double hi, std::size_t n);

/// n equispaced values from lo to hi inclusive.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Quintic smoothstep: 0 for t <= 0, 1 for t >= 1, C^2 and monotone between.
double smoothstep(double t);
double smoothstep_derivative(double t);

/// Cutoff equal to 1 on |t| <= 1 and 0 on |t| >= 2.
inline double cutoff(double t) { return 1.0 - smoothstep(std::fabs(t) - 1.0); }
inline double cutoff_derivative(double t) {
  const double s = t < 0.0 ? -1.0 : 1.0;
  return -s * smoothstep_derivative(std::fabs(t) - 1.0);
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers (0: hardware
/// concurrency).  The first exception is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace degenlab::numeric
