#pragma once

// Reference values computed without the library: closed-form pmfs, direct
// divergence sums and brute-force parameter searches.

#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

inline double choose(int n, int k) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
}

inline std::vector<double> binomial_pmf(int n, double p) {
  std::vector<double> out(static_cast<std::size_t>(n) + 1);
  for (int x = 0; x <= n; ++x) out[static_cast<std::size_t>(x)] = choose(n, x) * std::pow(p, x) * std::pow(1.0 - p, n - x);
  return out;
}

inline std::vector<double> poisson_pmf(double lambda, int x_max) {
  std::vector<double> out;
  for (int x = 0; x <= x_max; ++x) out.push_back(std::exp(-lambda + x * std::log(lambda) - std::lgamma(x + 1.0)));
  return out;
}

/// Multinomial pmf over (y1, y2, y3) in the order y1 ascending, then y2
/// ascending.
inline std::vector<double> multinomial_pmf(int total, double p1, double p2, double p3) {
  std::vector<double> out;
  for (int y1 = 0; y1 <= total; ++y1)
    for (int y2 = 0; y1 + y2 <= total; ++y2) {
      const int y3 = total - y1 - y2;
      const double coef = std::exp(std::lgamma(total + 1.0) - std::lgamma(y1 + 1.0) - std::lgamma(y2 + 1.0) -
                                   std::lgamma(y3 + 1.0));
      out.push_back(coef * std::pow(p1, y1) * std::pow(p2, y2) * std::pow(p3, y3));
    }
  return out;
}

inline std::vector<double> hardy_weinberg_pmf(int total, double theta) {
  return multinomial_pmf(total, theta * theta, 2.0 * theta * (1.0 - theta), (1.0 - theta) * (1.0 - theta));
}

inline double kl(const std::vector<double>& p, const std::vector<double>& q) {
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return INFINITY;
    s += p[i] * std::log(p[i] / q[i]);
  }
  return s;
}

inline double binary_entropy(double p) { return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p); }

/// Minimizer of f over a uniform grid on (lo, hi) with the given step.
inline double grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best = lo + step;
  double best_value = f(best);
  for (double x = lo + step; x < hi; x += step) {
    const double v = f(x);
    if (v < best_value) {
      best_value = v;
      best = x;
    }
  }
  return best;
}

}  // namespace oracle
