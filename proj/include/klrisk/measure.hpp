#pragma once

// Finite sample spaces with counting measure, exact distributions on them,
// vector statistics, i.i.d. product spaces and the divergence/mixture
// primitives everything else is built from.

#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "klrisk/error.hpp"
#include "klrisk/numeric.hpp"

namespace klrisk {

/// Normalization slack accepted for a probability vector.
inline constexpr double kMassTolerance = 1e-12;

/// Default cap on |X|^n for product-space enumeration. Overridden by the
/// KLRISK_MAX_ENUM environment variable.
inline constexpr std::size_t kDefaultEnumerationCap = 10'000'000;

std::size_t enumeration_cap();

/// Ordered, distinct outcome labels. Index i always refers to label i.
class SampleSpace {
 public:
  explicit SampleSpace(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::string& label(std::size_t i) const { return labels_.at(i); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;

  bool operator==(const SampleSpace& other) const { return labels_ == other.labels_; }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, std::size_t> index_;
};

using SpacePtr = std::shared_ptr<const SampleSpace>;

SpacePtr make_space(std::vector<std::string> labels);

/// Labels "0", "1", ..., "count-1".
SpacePtr integer_space(std::size_t count);

bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Throws StructuralError naming `what` when the spaces differ.
void require_same_space(const SpacePtr& a, const SpacePtr& b, const char* what);

/// Probability mass function stored as log masses; -inf marks a zero mass.
class Distribution {
 public:
  /// Requires sum(exp(log_mass)) within kMassTolerance of one.
  Distribution(SpacePtr space, Eigen::VectorXd log_mass);

  /// Normalizes arbitrary (finite or -inf) log weights.
  static Distribution from_log_weights(SpacePtr space, const Eigen::VectorXd& log_weights);
  /// Requires nonnegative masses summing to one within kMassTolerance.
  static Distribution from_probabilities(SpacePtr space, const Eigen::VectorXd& probs);
  static Distribution point_mass(SpacePtr space, std::size_t index);
  static Distribution uniform(SpacePtr space);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(log_mass_.size()); }

  const Eigen::VectorXd& log_mass() const noexcept { return log_mass_; }
  double log_prob(std::size_t i) const { return log_mass_(static_cast<Eigen::Index>(i)); }
  double prob(std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }
  bool is_zero(std::size_t i) const { return log_prob(i) == -kInf; }
  const Eigen::VectorXd& probabilities() const noexcept { return probs_; }

  bool has_full_support() const;
  std::vector<std::size_t> support() const;

 private:
  SpacePtr space_;
  Eigen::VectorXd log_mass_;
  Eigen::VectorXd probs_;
};

/// Per-point vector statistic; row i is the value at point i.
class Statistic {
 public:
  Statistic(SpacePtr space, Eigen::MatrixXd values);

  /// One-dimensional statistic from a list of values.
  static Statistic scalar(SpacePtr space, const std::vector<double>& values);

  const SpacePtr& space() const noexcept { return space_; }
  Eigen::Index dimension() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  Eigen::VectorXd value(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }

 private:
  SpacePtr space_;
  Eigen::MatrixXd values_;
};

/// The n-fold product of a base space, enumerated lexicographically with the
/// first coordinate most significant.
class IIDSpace {
 public:
  /// Throws SizeError when |base|^n exceeds enumeration_cap().
  IIDSpace(SpacePtr base, int n);

  const SpacePtr& base() const noexcept { return base_; }
  int n() const noexcept { return n_; }
  std::size_t size() const noexcept { return outcomes_->size(); }
  const SpacePtr& outcomes() const noexcept { return outcomes_; }

  std::vector<std::size_t> coordinates(std::size_t outcome) const;
  std::size_t index_of(std::span<const std::size_t> coordinates) const;

 private:
  SpacePtr base_;
  int n_;
  SpacePtr outcomes_;
};

/// Outcome-wise sum of a base-space statistic over the n coordinates.
Statistic sum_statistic(const IIDSpace& space, const Statistic& t);

/// Base-space statistic evaluated at one coordinate of each outcome.
Statistic coordinate_statistic(const IIDSpace& space, int coordinate, const Statistic& t);

/// Partition of a space into level sets of a statistic. Values closer than
/// `tolerance` in every coordinate are identified; level sets are ordered by
/// lexicographic value.
struct LevelSets {
  std::vector<Eigen::VectorXd> values;
  std::vector<std::vector<std::size_t>> members;
  std::vector<std::size_t> level_of;  // point index -> level set index

  std::size_t size() const noexcept { return values.size(); }
  std::optional<std::size_t> find(const Eigen::VectorXd& value, double tolerance = 1e-9) const;
};

LevelSets level_sets(const Statistic& s, double tolerance = 1e-9);

/// D(r1, r2) = sum r1 log(r1/r2), with 0 log(0/q) = 0 and +inf when r1 has
/// mass where r2 has none.
double kl_divergence(const Distribution& r1, const Distribution& r2);

/// E_r T.
Eigen::VectorXd mean_of_statistic(const Distribution& r, const Statistic& t);

/// Pointwise convex combination sum_i w_i parts_i.
Distribution mixture(const Eigen::VectorXd& weights, std::span<const Distribution> parts);

/// Product law r0^n on the enumerated outcomes of `space`.
Distribution iid_pmf(const Distribution& r0, const IIDSpace& space);

/// r0n restricted to {x : s(x) = value} and renormalized.
Distribution conditional_sample_law(const Distribution& r0n, const Statistic& s,
                                    const Eigen::VectorXd& value, double tolerance = 1e-9);

}  // namespace klrisk
