#include "klrisk/estimation.hpp"

#include <cmath>
#include <map>
#include <optional>

#include <Eigen/Dense>

#include "klrisk/families.hpp"

namespace klrisk {

namespace {

// Mixture of the estimator's values over the outcomes in `members`, weighted
// by r0^n restricted to them. nullopt when the set has zero probability.
std::optional<Distribution> level_mixture(const DistributionEstimator& est, const Eigen::VectorXd& outcome_probs,
                                          const std::vector<std::size_t>& members) {
  std::map<std::size_t, std::vector<double>> by_value;
  std::vector<double> all;
  all.reserve(members.size());
  for (std::size_t x : members) {
    const double w = outcome_probs(static_cast<Eigen::Index>(x));
    all.push_back(w);
    if (w > 0.0) by_value[est.assignment()[x]].push_back(w);
  }
  const double total = pairwise_sum(all);
  if (!(total > 0.0)) return std::nullopt;
  std::vector<Distribution> parts;
  Eigen::VectorXd weights(static_cast<Eigen::Index>(by_value.size()));
  Eigen::Index i = 0;
  for (const auto& [value, ws] : by_value) {
    parts.push_back(est.values()[value]);
    weights(i++) = pairwise_sum(ws) / total;
  }
  weights /= pairwise_sum(weights);
  return mixture(weights, parts);
}

}  // namespace

double expected_divergence(const DistributionEstimator& est, const Distribution& r0, const Distribution& q) {
  require_same_space(est.space(), q.space(), "expected_divergence");
  const Eigen::VectorXd w = est.value_weights(r0);
  Eigen::VectorXd terms = Eigen::VectorXd::Zero(w.size());
  for (Eigen::Index v = 0; v < w.size(); ++v) {
    if (w(v) == 0.0) continue;
    const double d = kl_divergence(est.values()[static_cast<std::size_t>(v)], q);
    if (std::isinf(d)) return kInf;
    terms(v) = w(v) * d;
  }
  return pairwise_sum(terms);
}

double expected_divergence_between(const DistributionEstimator& a, const DistributionEstimator& b,
                                   const Distribution& r0) {
  if (a.outcome_count() != b.outcome_count() || !same_space(a.domain().outcomes(), b.domain().outcomes()))
    throw StructuralError("estimators are defined on different sample spaces");
  const Eigen::VectorXd probs = iid_pmf(r0, a.domain()).probabilities();
  // Pairs of distinct values, so the divergence is evaluated once per pair.
  std::map<std::pair<std::size_t, std::size_t>, std::vector<double>> pairs;
  for (std::size_t x = 0; x < a.outcome_count(); ++x) {
    const double w = probs(static_cast<Eigen::Index>(x));
    if (w > 0.0) pairs[{a.assignment()[x], b.assignment()[x]}].push_back(w);
  }
  Eigen::VectorXd terms(static_cast<Eigen::Index>(pairs.size()));
  Eigen::Index i = 0;
  for (const auto& [key, ws] : pairs) {
    const double d = kl_divergence(a.values()[key.first], b.values()[key.second]);
    if (std::isinf(d)) return kInf;
    terms(i++) = pairwise_sum(ws) * d;
  }
  return pairwise_sum(terms);
}

Eigen::VectorXd expected_mean_of_statistic(const DistributionEstimator& est, const Distribution& r0,
                                           const Statistic& t) {
  const Eigen::VectorXd w = est.value_weights(r0);
  Eigen::MatrixXd contrib(w.size(), t.dimension());
  for (Eigen::Index v = 0; v < w.size(); ++v)
    contrib.row(v) = w(v) * mean_of_statistic(est.values()[static_cast<std::size_t>(v)], t).transpose();
  Eigen::VectorXd out(t.dimension());
  for (Eigen::Index j = 0; j < t.dimension(); ++j) out(j) = pairwise_sum(contrib.col(j));
  return out;
}

Distribution kl_mean(const DistributionEstimator& est, const Distribution& r0) {
  const Eigen::VectorXd w = est.value_weights(r0);
  return mixture(w, est.values());
}

double kl_variance(const DistributionEstimator& est, const Distribution& r0) {
  return expected_divergence(est, r0, kl_mean(est, r0));
}

Distribution distribution_mean(const DistributionEstimator& est, const ExponentialFamily& fam,
                               const Distribution& r0) {
  return extended_project(fam, kl_mean(est, r0));
}

double distribution_variance(const DistributionEstimator& est, const ExponentialFamily& fam, const Distribution& r0) {
  return expected_divergence(est, r0, distribution_mean(est, fam, r0));
}

double delta_correction(const Distribution& e_r, const Distribution& ed_r, const Distribution& p) {
  const double to_p = kl_divergence(e_r, p);
  const double to_ed = kl_divergence(e_r, ed_r);
  const double ed_to_p = kl_divergence(ed_r, p);
  if (std::isinf(to_p) || std::isinf(to_ed) || std::isinf(ed_to_p))
    throw DomainError("delta correction needs finite divergences");
  return to_p - to_ed - ed_to_p;
}

Distribution conditional_kl_mean(const DistributionEstimator& est, const Statistic& s, const Eigen::VectorXd& value,
                                 const Distribution& r0) {
  require_same_space(est.domain().outcomes(), s.space(), "conditional_kl_mean");
  const Distribution law = conditional_sample_law(iid_pmf(r0, est.domain()), s, value);
  const Eigen::VectorXd w = grouped_sums(law.probabilities(), est.assignment(), est.values().size());
  std::vector<Distribution> parts;
  std::vector<double> kept;
  for (Eigen::Index v = 0; v < w.size(); ++v) {
    if (w(v) <= 0.0) continue;
    parts.push_back(est.values()[static_cast<std::size_t>(v)]);
    kept.push_back(w(v));
  }
  Eigen::VectorXd weights = Eigen::Map<Eigen::VectorXd>(kept.data(), static_cast<Eigen::Index>(kept.size()));
  weights /= pairwise_sum(weights);
  return mixture(weights, parts);
}

DistributionEstimator conditional_expectation(const DistributionEstimator& est, const Statistic& s,
                                              const Distribution& r0) {
  require_same_space(est.domain().outcomes(), s.space(), "conditional_expectation");
  const LevelSets levels = level_sets(s);
  const Eigen::VectorXd probs = iid_pmf(r0, est.domain()).probabilities();
  std::vector<Distribution> values;
  values.reserve(levels.size());
  for (const auto& members : levels.members) {
    auto k = level_mixture(est, probs, members);
    if (!k) throw DomainError("conditioning on a level set of zero probability");
    values.push_back(std::move(*k));
  }
  return DistributionEstimator::on_level_sets(est.domain(), levels, std::move(values));
}

RaoBlackwellResult rao_blackwellize(const DistributionEstimator& est, const Statistic& s, const ExponentialFamily& fam,
                                    const Distribution& reference) {
  require_same_space(est.domain().outcomes(), s.space(), "rao_blackwellize");
  require_same_space(est.space(), fam.space(), "rao_blackwellize");
  const LevelSets levels = level_sets(s);
  const Eigen::VectorXd probs = iid_pmf(reference, est.domain()).probabilities();
  const Statistic canonical_sum = sum_statistic(est.domain(), fam.statistic());
  std::vector<Distribution> values;
  values.reserve(levels.size());
  std::size_t null_levels = 0;
  for (const auto& members : levels.members) {
    if (auto k = level_mixture(est, probs, members)) {
      values.push_back(extended_project(fam, *k));
    } else {
      ++null_levels;
      values.push_back(extended_mle(fam, canonical_sum.value(members.front()), est.n()));
    }
  }
  return RaoBlackwellResult{DistributionEstimator::on_level_sets(est.domain(), levels, std::move(values)),
                            null_levels};
}

RiskReport risk_report(const DistributionEstimator& est, const ExponentialFamily& fam, const Distribution& r0,
                       const Distribution& member) {
  Distribution e = kl_mean(est, r0);
  Distribution ed = extended_project(fam, e);
  const double v = expected_divergence(est, r0, e);
  const double vd = expected_divergence(est, r0, ed);
  const double risk = expected_divergence(est, r0, member);
  double delta = kInf;
  try {
    delta = delta_correction(e, ed, member);
  } catch (const DomainError&) {
  }
  const double kl_residual = std::isinf(risk) ? kInf : std::abs(risk - kl_divergence(e, member) - v);
  const double pyth_residual = std::isinf(risk) || std::isinf(vd) ? kInf : std::abs(risk - kl_divergence(ed, member) - vd);
  return RiskReport{std::move(e), v, std::move(ed), vd, delta, pyth_residual, kl_residual, risk};
}

UnbiasednessReport check_distribution_unbiased(const DistributionEstimator& est, const ExponentialFamily& fam,
                                               std::span<const Eigen::VectorXd> theta_grid) {
  require_same_space(est.space(), fam.space(), "check_distribution_unbiased");
  const Statistic canonical_sum = sum_statistic(est.domain(), fam.statistic());
  const LevelSets levels = level_sets(canonical_sum);
  const double n = est.n();
  UnbiasednessReport report;
  for (const auto& theta : theta_grid) {
    const Distribution generator = member_from_natural(fam, theta);
    UnbiasednessEntry entry;
    entry.theta = theta;
    entry.divergence = kl_divergence(distribution_mean(est, fam, generator), generator);
    const Eigen::VectorXd probs = iid_pmf(generator, est.domain()).probabilities();
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto k = level_mixture(est, probs, levels.members[l]);
      if (!k) continue;
      const Eigen::VectorXd mu = mean_of_statistic(*k, fam.statistic());
      entry.level_residual = std::max(entry.level_residual, (mu - levels.values[l] / n).lpNorm<Eigen::Infinity>());
      entry.level_residual_total = std::max(entry.level_residual_total, (mu - levels.values[l]).lpNorm<Eigen::Infinity>());
    }
    entry.pass = entry.divergence <= kUnbiasedTolerance && entry.level_residual <= kUnbiasedTolerance;
    report.pass = report.pass && entry.pass;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

DistributionEstimator make_mean_matched_competitor(const ExponentialFamily& fam, int n, double epsilon,
                                                   std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in [0, 1)");
  IIDSpace domain(fam.space(), n);
  const LevelSets levels = level_sets(sum_statistic(domain, fam.statistic()));
  const auto points = static_cast<Eigen::Index>(fam.space()->size());
  std::vector<Distribution> values;
  values.reserve(levels.size());
  for (std::size_t l = 0; l < levels.size(); ++l) {
    Distribution mle = extended_mle(fam, levels.values[l], n);
    const Eigen::VectorXd target = levels.values[l] / static_cast<double>(n);
    if (epsilon == 0.0 || !hull_position(fam, target).interior()) {
      values.push_back(std::move(mle));
      continue;
    }
    CounterRng rng(seed, l);
    Eigen::VectorXd log_weights(points);
    for (Eigen::Index i = 0; i < points; ++i) log_weights(i) = std::log(rng.uniform(0.1, 1.0));
    try {
      const ExponentialFamily tilt(Distribution::from_log_weights(fam.space(), log_weights), fam.statistic());
      const Distribution q = member_from_natural(tilt, natural_from_mean(tilt, target).theta);
      const Distribution parts[] = {mle, q};
      values.push_back(mixture(Eigen::Vector2d(1.0 - epsilon, epsilon), parts));
    } catch (const std::runtime_error&) {
      values.push_back(std::move(mle));
    } catch (const DomainError&) {
      values.push_back(std::move(mle));
    }
  }
  return DistributionEstimator::on_level_sets(std::move(domain), levels, std::move(values));
}

MixtureClosureReport mixture_family_closure_check(std::span<const Distribution> parts,
                                                  const DistributionEstimator& est, const Distribution& r0) {
  if (parts.empty()) throw DomainError("mixture family needs at least one part");
  for (const auto& p : parts) require_same_space(est.space(), p.space(), "mixture_family_closure_check");
  const Distribution e = kl_mean(est, r0);
  const auto m = static_cast<Eigen::Index>(parts.size());
  MixtureClosureReport report;
  report.weights = Eigen::VectorXd::Ones(1);
  if (m > 1) {
    // Substitute w_last = 1 - sum(others) and solve the unconstrained problem.
    const Eigen::VectorXd& last = parts.back().probabilities();
    Eigen::MatrixXd a(last.size(), m - 1);
    for (Eigen::Index i = 0; i < m - 1; ++i) a.col(i) = parts[static_cast<std::size_t>(i)].probabilities() - last;
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    cod.setThreshold(1e-10);
    report.ambiguous = cod.rank() < m - 1;
    const Eigen::VectorXd head = cod.solve(e.probabilities() - last);
    report.weights.resize(m);
    report.weights.head(m - 1) = head;
    report.weights(m - 1) = 1.0 - head.sum();
  }
  Eigen::VectorXd probs = Eigen::VectorXd::Zero(e.probabilities().size());
  for (Eigen::Index i = 0; i < m; ++i) probs += report.weights(i) * parts[static_cast<std::size_t>(i)].probabilities();
  probs = probs.cwiseMax(0.0);
  probs /= pairwise_sum(probs);
  report.residual = kl_divergence(e, Distribution::from_probabilities(e.space(), probs));
  return report;
}

}  // namespace klrisk
