#include "klrisk/estimator.hpp"

#include <map>
#include <string>

namespace klrisk {

DistributionEstimator::DistributionEstimator(IIDSpace domain, std::vector<Distribution> values,
                                             std::vector<std::size_t> assignment)
    : domain_(std::move(domain)), values_(std::move(values)), assignment_(std::move(assignment)) {
  if (assignment_.size() != domain_.size()) throw StructuralError("estimator must assign a value to every outcome");
  if (values_.empty()) throw StructuralError("estimator has no values");
  for (const auto& v : values_) require_same_space(domain_.base(), v.space(), "estimator value");
  for (std::size_t a : assignment_)
    if (a >= values_.size()) throw StructuralError("estimator assignment out of range");
}

DistributionEstimator DistributionEstimator::per_outcome(IIDSpace domain, std::vector<Distribution> values) {
  // Bitwise-equal values share one slot, so a constant estimator has an
  // exactly constant KL mean.
  std::map<std::string, std::size_t> seen;
  std::vector<Distribution> distinct;
  std::vector<std::size_t> assignment(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const Eigen::VectorXd& lm = values[i].log_mass();
    std::string key(reinterpret_cast<const char*>(lm.data()), static_cast<std::size_t>(lm.size()) * sizeof(double));
    const auto [it, inserted] = seen.emplace(std::move(key), distinct.size());
    if (inserted) distinct.push_back(std::move(values[i]));
    assignment[i] = it->second;
  }
  return DistributionEstimator(std::move(domain), std::move(distinct), std::move(assignment));
}

DistributionEstimator DistributionEstimator::constant(IIDSpace domain, Distribution value) {
  std::vector<std::size_t> assignment(domain.size(), 0);
  std::vector<Distribution> values{std::move(value)};
  return DistributionEstimator(std::move(domain), std::move(values), std::move(assignment));
}

DistributionEstimator DistributionEstimator::on_level_sets(IIDSpace domain, const LevelSets& levels,
                                                           std::vector<Distribution> values) {
  if (values.size() != levels.size()) throw StructuralError("need one value per level set");
  return DistributionEstimator(std::move(domain), std::move(values), levels.level_of);
}

Eigen::VectorXd DistributionEstimator::value_weights(const Distribution& r0) const {
  return grouped_sums(iid_pmf(r0, domain_).probabilities(), assignment_, values_.size());
}

Eigen::VectorXd grouped_sums(const Eigen::VectorXd& weights, const std::vector<std::size_t>& group_of,
                             std::size_t groups) {
  std::vector<std::vector<double>> buckets(groups);
  for (std::size_t i = 0; i < group_of.size(); ++i) buckets[group_of[i]].push_back(weights(static_cast<Eigen::Index>(i)));
  Eigen::VectorXd out(static_cast<Eigen::Index>(groups));
  for (std::size_t g = 0; g < groups; ++g) out(static_cast<Eigen::Index>(g)) = pairwise_sum(buckets[g]);
  return out;
}

}  // namespace klrisk
