#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pglab/errors.hpp"

namespace pglab {

// Least-squares fit of log(error) against the iteration index over a window.
// factor = exp(slope) is the equivalent per-iteration multiplier, so a clean
// geometric decay err_t = c * q^t comes back as factor == q with r_squared 1.
struct RateFit {
  long from = 0;
  long to = 0;
  double slope = 0.0;
  double factor = 1.0;
  double r_squared = 1.0;
  std::size_t samples = 0;
};

inline RateFit fit_rate(const std::vector<long>& iters, const std::vector<double>& errors,
                        long from, long to) {
  if (iters.size() != errors.size())
    throw DimensionError("fit_rate: iteration and error columns differ in length");
  if (!(from < to)) throw ConfigError("fit_rate: window needs from < to");

  std::vector<double> x, y;
  for (std::size_t i = 0; i < iters.size(); ++i) {
    if (iters[i] < from || iters[i] > to) continue;
    if (!(errors[i] > 0.0))
      throw DomainError("fit_rate: errors must be strictly positive inside the window");
    x.push_back(static_cast<double>(iters[i]));
    y.push_back(std::log(errors[i]));
  }
  if (x.size() < 2) throw ConfigError("fit_rate: window holds fewer than two samples");

  const double n = static_cast<double>(x.size());
  double x_bar = 0.0, y_bar = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    x_bar += x[i];
    y_bar += y[i];
  }
  x_bar /= n;
  y_bar /= n;

  double s_xx = 0.0, s_xy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s_xx += (x[i] - x_bar) * (x[i] - x_bar);
    s_xy += (x[i] - x_bar) * (y[i] - y_bar);
  }
  if (!(s_xx > 0.0)) throw ConfigError("fit_rate: window holds a single distinct iteration");

  RateFit out;
  out.from = from;
  out.to = to;
  out.samples = x.size();

  double ss_tot = 0.0;
  for (const double yi : y) ss_tot += (yi - y_bar) * (yi - y_bar);
  // A constant sequence is a perfect zero-slope fit, not a 0/0; the threshold
  // absorbs rounding noise from the mean at the scale of the log values.
  const double eps = std::numeric_limits<double>::epsilon() * (1.0 + std::abs(y_bar));
  if (ss_tot <= 64.0 * eps * eps * n) {
    out.slope = 0.0;
    out.factor = 1.0;
    out.r_squared = 1.0;
    return out;
  }

  out.slope = s_xy / s_xx;
  out.factor = std::exp(out.slope);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double fit = y_bar + out.slope * (x[i] - x_bar);
    ss_res += (y[i] - fit) * (y[i] - fit);
  }
  out.r_squared = 1.0 - ss_res / ss_tot;
  return out;
}

}  // namespace pglab
