#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>

#include <Eigen/Core>

namespace klrisk {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pairwise (tree) summation. The split points depend only on the length,
/// so the result is reproducible for a given input order.
double pairwise_sum(std::span<const double> values);

inline double pairwise_sum(const Eigen::Ref<const Eigen::VectorXd>& values) {
  return pairwise_sum(std::span<const double>(values.data(), static_cast<std::size_t>(values.size())));
}

/// log(sum(exp(values))); -inf entries contribute nothing. Empty or all
/// -inf input yields -inf.
double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& values);

/// 17 significant digits; non-finite values become "inf", "-inf", "nan".
std::string format_double(double value);

/// Counter-based generator: the stream (seed, key) is a pure function of its
/// inputs, so any draw can be reproduced without replaying earlier ones.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t key);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace klrisk
