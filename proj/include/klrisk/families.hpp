#pragma once

// Concrete families: binomial, right-truncated Poisson, trinomial and
// Hardy-Weinberg, plus the extended MLE and two classical UMVU estimators
// used as counterexamples.

#include <string>
#include <vector>

#include <Eigen/Core>

#include "klrisk/estimator.hpp"
#include "klrisk/expfam.hpp"

namespace klrisk {

inline constexpr int kDefaultPoissonTruncation = 60;

/// Support {0..trials}, T(x) = x, base Binomial(trials, 1/2).
ExponentialFamily binomial_family(int trials);

/// Support {0..x_max}, T(x) = x, base Poisson(1) truncated and renormalized.
/// The member at natural parameter log(lambda) is truncated Poisson(lambda).
ExponentialFamily poisson_family(int x_max);

/// sum_{x > x_max} e^-lambda lambda^x / x!.
double poisson_tail_bound(double lambda, int x_max);

/// Count triples (y1, y2, y3) summing to `total`, T = (y1, y2), base
/// multinomial(total; 1/3, 1/3, 1/3).
ExponentialFamily trinomial_family(int total);

/// Same support as the trinomial, T = 2 y1 + y2, base multinomial(total;
/// 1/4, 1/2, 1/4). The natural parameter is the allele log-odds.
ExponentialFamily hardy_weinberg_family(int total);

enum class FamilyKind { binomial, poisson_truncated, trinomial, hardy_weinberg };

/// Catalog entry named on the command line as binomial:<n>, poisson:<x_max>,
/// trinomial:<n> or hw:<n>.
struct FamilySpec {
  FamilyKind kind = FamilyKind::binomial;
  int size = 1;

  static FamilySpec parse(const std::string& text);
  std::string name() const;
  ExponentialFamily build() const;

  /// Number of conventional parameters (1, or 2 for the trinomial).
  int conventional_dimension() const { return kind == FamilyKind::trinomial ? 2 : 1; }
  /// Conventional parameter -> natural parameter: success or allele
  /// probability (log-odds), lambda (log), or (pi1, pi2) (log pi_i / pi3).
  Eigen::VectorXd natural_from_conventional(const Eigen::VectorXd& conventional) const;
  /// Nine interior generators spread over the conventional range.
  std::vector<Eigen::VectorXd> default_grid() const;
};

/// The member with canonical mean t/n when that is interior, else the
/// face-restricted boundary distribution with the same mean.
Distribution extended_mle(const ExponentialFamily& fam, const Eigen::VectorXd& t_value, int n);

/// Extended MLE of the sum of T over the sample, on every outcome of X^n.
DistributionEstimator mle_estimator(const ExponentialFamily& fam, int n);

/// (-2)^x, the unique UMVU estimator of P(X = 0)^3 from one Poisson count.
double lehmann_umvu(int x);

/// C(s_n, i) (1/n)^i (1 - 1/n)^(s_n - i) for i <= s_n, else 0.
double poisson_indicator_umvue(int i, int s_n, int n);

}  // namespace klrisk
