#include "klrisk/verify.hpp"

#include <algorithm>
#include <cmath>

#include "klrisk/estimation.hpp"
#include "klrisk/families.hpp"

namespace klrisk {

bool VerifyReport::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

Distribution random_distribution(const SpacePtr& space, CounterRng& rng, double zero_fraction) {
  const auto size = static_cast<Eigen::Index>(space->size());
  Eigen::VectorXd lw(size);
  for (Eigen::Index i = 0; i < size; ++i)
    lw(i) = rng.uniform() < zero_fraction ? -kInf : std::log(rng.uniform(0.05, 1.0));
  if ((lw.array() == -kInf).all()) lw(static_cast<Eigen::Index>(rng.next_u64() % space->size())) = 0.0;
  return Distribution::from_log_weights(space, lw);
}

DistributionEstimator random_estimator(const ExponentialFamily& fam, const IIDSpace& domain, std::uint64_t seed,
                                       std::uint64_t key) {
  require_same_space(fam.space(), domain.base(), "random_estimator");
  CounterRng rng(seed, key);
  std::vector<Distribution> values;
  values.reserve(domain.size());
  for (std::size_t x = 0; x < domain.size(); ++x) {
    switch (key % 4) {
      case 0:
        values.push_back(random_distribution(fam.space(), rng));
        break;
      case 1:
        values.push_back(random_distribution(fam.space(), rng, 0.5));
        break;
      case 2:
        values.push_back(Distribution::point_mass(fam.space(), rng.next_u64() % fam.space()->size()));
        break;
      default: {
        Eigen::VectorXd theta(fam.dimension());
        for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = rng.uniform(-2.0, 2.0);
        values.push_back(member_from_natural(fam, theta));
      }
    }
  }
  return DistributionEstimator::per_outcome(domain, std::move(values));
}

std::vector<Eigen::VectorXd> natural_grid(const ExponentialFamily& fam, int count) {
  std::vector<Eigen::VectorXd> grid;
  if (fam.dimension() == 1) {
    for (int i = 0; i < count; ++i)
      grid.push_back(Eigen::VectorXd::Constant(1, count == 1 ? 0.0 : -3.0 + 6.0 * i / (count - 1)));
  } else if (fam.dimension() == 2) {
    const int side = std::max(1, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(count)))));
    for (int i = 0; i < side; ++i)
      for (int j = 0; j < side; ++j) {
        Eigen::VectorXd theta(2);
        theta << (side == 1 ? 0.0 : -2.0 + 4.0 * i / (side - 1)), (side == 1 ? 0.0 : -2.0 + 4.0 * j / (side - 1));
        grid.push_back(theta);
      }
  } else {
    throw DomainError("natural grids are implemented for d <= 2 only");
  }
  return grid;
}

namespace {

struct Tracker {
  CheckResult result;
  Tracker(std::string name, double tolerance) { result = CheckResult{std::move(name), 0.0, tolerance, true}; }
  void observe(double residual) {
    if (std::isnan(residual)) residual = kInf;
    result.max_residual = std::max(result.max_residual, residual);
    result.pass = result.pass && residual <= result.tolerance;
  }
};

double max_abs_diff(const Distribution& a, const Distribution& b) {
  return (a.probabilities() - b.probabilities()).lpNorm<Eigen::Infinity>();
}

// Arbitrary non-sufficient partition of X^n used for the conditional suites.
Statistic coarse_partition(const IIDSpace& domain) {
  std::vector<double> s(domain.size());
  for (std::size_t x = 0; x < domain.size(); ++x) s[x] = static_cast<double>(x % 3);
  return Statistic::scalar(domain.outcomes(), s);
}

}  // namespace

VerifyReport verify_family(const ExponentialFamily& fam, const VerifyOptions& options) {
  Tracker kl_risk("kl_risk_decomposition", 1e-9);
  Tracker dist_risk("dist_risk_decomposition", 1e-9);
  Tracker delta("delta_vanishing", 1e-9);
  Tracker tower("dist_mean_tower", 1e-10);
  Tracker cond_var("dist_variance_conditional", 1e-9);
  Tracker canonical("canonical_expectation", 1e-9);
  Tracker pythagorean("pythagorean", 1e-9);
  Tracker rb_var("rao_blackwell_variance", 1e-12);
  Tracker rb_mean("rao_blackwell_mean", 1e-10);
  Tracker duality("duality_round_trip", 1e-9);
  Tracker unbiased("mle_unbiased", 1e-9);

  const IIDSpace domain(fam.space(), options.n);
  const Statistic partition = coarse_partition(domain);
  const Statistic canonical_sum = sum_statistic(domain, fam.statistic());
  std::vector<Distribution> members;
  for (const auto& theta : options.members) members.push_back(member_from_natural(fam, theta));

  for (int k = 0; k < options.random_estimators; ++k) {
    const auto key = static_cast<std::uint64_t>(k);
    const DistributionEstimator est = random_estimator(fam, domain, options.seed, key);
    CounterRng rng(options.seed ^ 0x5eedULL, key);
    const Distribution reference = random_distribution(fam.space(), rng);

    // Projection of a full-support distribution.
    const Distribution r = random_distribution(fam.space(), rng);
    const Distribution pr = project(fam, r);
    for (const auto& p : members)
      pythagorean.observe(std::abs(kl_divergence(r, p) - kl_divergence(r, pr) - kl_divergence(pr, p)));

    for (const auto& theta0 : options.generators) {
      const Distribution r0 = member_from_natural(fam, theta0);
      const Distribution e = kl_mean(est, r0);
      const Distribution ed = extended_project(fam, e);
      const double v = expected_divergence(est, r0, e);
      const double vd = expected_divergence(est, r0, ed);

      kl_risk.observe(std::abs(expected_divergence(est, r0, reference) - kl_divergence(e, reference) - v));
      for (const auto& p : members) {
        const double risk = expected_divergence(est, r0, p);
        kl_risk.observe(std::abs(risk - kl_divergence(e, p) - v));
        dist_risk.observe(std::abs(risk - kl_divergence(ed, p) - vd));
        delta.observe(std::abs(delta_correction(e, ed, p)));
      }
      canonical.observe((mean_of_statistic(ed, fam.statistic()) -
                         expected_mean_of_statistic(est, r0, fam.statistic()))
                            .lpNorm<Eigen::Infinity>());

      const DistributionEstimator cond = rao_blackwellize(est, partition, fam, r0).estimator;
      tower.observe(max_abs_diff(ed, distribution_mean(cond, fam, r0)));
      cond_var.observe(std::abs(vd - distribution_variance(cond, fam, r0) - expected_divergence_between(est, cond, r0)));

      const DistributionEstimator rb = rao_blackwellize(est, canonical_sum, fam, r0).estimator;
      rb_var.observe(std::max(0.0, distribution_variance(rb, fam, r0) - vd));
      rb_mean.observe(max_abs_diff(ed, distribution_mean(rb, fam, r0)));
    }
  }

  for (const auto& theta : natural_grid(fam, options.duality_points)) {
    const Eigen::VectorXd mu = cumulant(fam, theta).grad;
    duality.observe((natural_from_mean(fam, mu).theta - theta).lpNorm<Eigen::Infinity>());
  }

  const DistributionEstimator mle = mle_estimator(fam, options.n);
  for (const auto& theta0 : options.generators) {
    const Distribution p0 = member_from_natural(fam, theta0);
    unbiased.observe(kl_divergence(distribution_mean(mle, fam, p0), p0));
  }

  VerifyReport report;
  for (Tracker* t : {&kl_risk, &dist_risk, &delta, &tower, &cond_var, &canonical, &pythagorean, &rb_var, &rb_mean,
                     &duality, &unbiased})
    report.checks.push_back(t->result);
  return report;
}

}  // namespace klrisk
