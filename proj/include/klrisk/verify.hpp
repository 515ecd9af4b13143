#pragma once

// Enumeration suites that check the risk identities on one family: each
// suite reports its worst residual next to the tolerance it must meet.

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "klrisk/estimator.hpp"
#include "klrisk/expfam.hpp"

namespace klrisk {

struct CheckResult {
  std::string name;
  double max_residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct VerifyOptions {
  int n = 1;
  int random_estimators = 20;
  std::uint64_t seed = 1;
  std::vector<Eigen::VectorXd> generators;  // natural parameters of data generators
  std::vector<Eigen::VectorXd> members;     // natural parameters of comparison members
  int duality_points = 100;
};

struct VerifyReport {
  std::vector<CheckResult> checks;
  bool pass() const;
};

VerifyReport verify_family(const ExponentialFamily& fam, const VerifyOptions& options);

/// Random pmf with weights uniform on [0.05, 1); a `zero_fraction` share of
/// points (never all) gets zero mass.
Distribution random_distribution(const SpacePtr& space, CounterRng& rng, double zero_fraction = 0.0);

/// Seeded estimator whose flavour cycles with `key`: full-support random
/// values, sparse random values, point masses, or random family members.
DistributionEstimator random_estimator(const ExponentialFamily& fam, const IIDSpace& domain, std::uint64_t seed,
                                       std::uint64_t key);

/// Evenly spaced natural parameters: [-3, 3] for d = 1, a square grid on
/// [-2, 2]^2 for d = 2.
std::vector<Eigen::VectorXd> natural_grid(const ExponentialFamily& fam, int count);

}  // namespace klrisk
