#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "klrisk/measure.hpp"

namespace klrisk {

/// A distribution-valued estimator: a total map from the outcomes of X^n to
/// distributions on X. Distinct values are stored once and outcomes refer to
/// them by index, so estimators that are constant on level sets of a
/// statistic stay small and their risk sums run over values, not outcomes.
class DistributionEstimator {
 public:
  DistributionEstimator(IIDSpace domain, std::vector<Distribution> values, std::vector<std::size_t> assignment);

  /// One value per enumerated outcome; bitwise-equal values are stored once.
  static DistributionEstimator per_outcome(IIDSpace domain, std::vector<Distribution> values);
  static DistributionEstimator constant(IIDSpace domain, Distribution value);
  /// Value i on every outcome of level set i.
  static DistributionEstimator on_level_sets(IIDSpace domain, const LevelSets& levels,
                                             std::vector<Distribution> values);

  const IIDSpace& domain() const noexcept { return domain_; }
  int n() const noexcept { return domain_.n(); }
  /// The sample space X the estimates live on.
  const SpacePtr& space() const noexcept { return domain_.base(); }
  std::size_t outcome_count() const noexcept { return assignment_.size(); }

  const Distribution& at(std::size_t outcome) const { return values_[assignment_.at(outcome)]; }
  const std::vector<Distribution>& values() const noexcept { return values_; }
  const std::vector<std::size_t>& assignment() const noexcept { return assignment_; }

  /// Probability of each distinct value when the sample is drawn from r0^n.
  Eigen::VectorXd value_weights(const Distribution& r0) const;

 private:
  IIDSpace domain_;
  std::vector<Distribution> values_;
  std::vector<std::size_t> assignment_;
};

/// Outcome-weight sums grouped by an index map, each group reduced pairwise.
Eigen::VectorXd grouped_sums(const Eigen::VectorXd& weights, const std::vector<std::size_t>& group_of,
                             std::size_t groups);

}  // namespace klrisk
