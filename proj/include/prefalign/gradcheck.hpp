#pragma once

#include <functional>
#include <vector>

namespace prefalign {

/// Central-difference gradient of f at x, one coordinate at a time.
/// Used to cross-check the analytic gradients; h around 1e-6 balances
/// truncation against cancellation for O(1) inputs.
inline std::vector<double> finite_difference_gradient(
    const std::function<double(const std::vector<double>&)>& f, std::vector<double> x,
    double h = 1e-6) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    double saved = x[k];
    x[k] = saved + h;
    double up = f(x);
    x[k] = saved - h;
    double down = f(x);
    x[k] = saved;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Scalar-parameter variant (for tau and beta).
inline double finite_difference_scalar(const std::function<double(double)>& f, double x,
                                       double h = 1e-6) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace prefalign
