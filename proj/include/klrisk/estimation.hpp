#pragma once

// KL risk of distribution-valued estimators.
//
// For an estimator R and data generator r0 (full support), the KL mean E R is
// the r0^n-weighted mixture of R's values and the KL variance is
// V R = E D(R, E R); together they give E D(R, Q) = D(E R, Q) + V R for every
// Q. Relative to an exponential family P, the distribution mean is the
// (extended) projection Ed R = Pi E R and the distribution variance is
// Vd R = E D(R, Ed R) >= V R.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "klrisk/estimator.hpp"
#include "klrisk/expfam.hpp"

namespace klrisk {

/// E D(R, q) under r0^n.
double expected_divergence(const DistributionEstimator& est, const Distribution& r0, const Distribution& q);

/// E D(A(x), B(x)) under r0^n for two estimators on the same domain.
double expected_divergence_between(const DistributionEstimator& a, const DistributionEstimator& b,
                                   const Distribution& r0);

/// E mu_T(R) under r0^n.
Eigen::VectorXd expected_mean_of_statistic(const DistributionEstimator& est, const Distribution& r0,
                                           const Statistic& t);

Distribution kl_mean(const DistributionEstimator& est, const Distribution& r0);

/// E D(R, E R); +inf when E R misses support of a value with positive weight.
double kl_variance(const DistributionEstimator& est, const Distribution& r0);

/// Pi E R, falling back to the extended projection on the hull boundary.
Distribution distribution_mean(const DistributionEstimator& est, const ExponentialFamily& fam,
                               const Distribution& r0);

double distribution_variance(const DistributionEstimator& est, const ExponentialFamily& fam, const Distribution& r0);

/// D(e, p) - D(e, ed) - D(ed, p). Throws DomainError if any term is infinite.
double delta_correction(const Distribution& e_r, const Distribution& ed_r, const Distribution& p);

/// E[R | S = value] with the sample drawn from r0^n.
Distribution conditional_kl_mean(const DistributionEstimator& est, const Statistic& s, const Eigen::VectorXd& value,
                                 const Distribution& r0);

/// The estimator x -> E[R | S = s(x)]. Every level set needs positive
/// probability under r0^n.
DistributionEstimator conditional_expectation(const DistributionEstimator& est, const Statistic& s,
                                              const Distribution& r0);

struct RaoBlackwellResult {
  DistributionEstimator estimator;
  /// Level sets with zero probability under the reference; these received the
  /// extended MLE at the level's canonical sum instead of a conditional mean.
  std::size_t null_level_sets = 0;
};

/// x -> extended projection of E[R | S = s(x)], with the conditional law taken
/// from `reference`. When S is sufficient for `fam` and the reference is a
/// member, the result does not depend on which member.
RaoBlackwellResult rao_blackwellize(const DistributionEstimator& est, const Statistic& s, const ExponentialFamily& fam,
                                    const Distribution& reference);

struct RiskReport {
  Distribution kl_mean;
  double kl_variance;
  Distribution dist_mean;
  double dist_variance;
  double delta;                 // at the queried member
  double pythagorean_residual;  // |E D(R,P) - D(Ed R, P) - Vd R|
  double kl_residual;           // |E D(R,P) - D(E R, P) - V R|
  double expected_divergence;   // E D(R, P)
};

RiskReport risk_report(const DistributionEstimator& est, const ExponentialFamily& fam, const Distribution& r0,
                       const Distribution& member);

/// Tolerance for both unbiasedness residuals.
inline constexpr double kUnbiasedTolerance = 1e-8;

struct UnbiasednessEntry {
  Eigen::VectorXd theta;
  double divergence = 0.0;           // D(Ed R, P_theta)
  double level_residual = 0.0;       // max_t ||mu(E[R|T=t]) - t/n||_inf
  double level_residual_total = 0.0; // max_t ||mu(E[R|T=t]) - t||_inf, informational
  bool pass = false;
};

struct UnbiasednessReport {
  std::vector<UnbiasednessEntry> entries;
  bool pass = true;
};

/// Distribution unbiasedness at each generator P_theta, theta in the grid:
/// passes iff D(Ed R, P_theta) and the per-level mean residual (at the t/n
/// scale) are both within kUnbiasedTolerance.
UnbiasednessReport check_distribution_unbiased(const DistributionEstimator& est, const ExponentialFamily& fam,
                                               std::span<const Eigen::VectorXd> theta_grid);

/// For each value t of the canonical sum: (1 - eps) * extended MLE(t) +
/// eps * Q_t, where Q_t tilts a seeded random full-support pmf so that its
/// canonical mean is t/n. Boundary t (no tilt exists) keep the extended MLE.
DistributionEstimator make_mean_matched_competitor(const ExponentialFamily& fam, int n, double epsilon,
                                                   std::uint64_t seed);

struct MixtureClosureReport {
  double residual = 0.0;      // D(E R, recovered mixture member)
  Eigen::VectorXd weights;    // recovered weights of E R
  bool ambiguous = false;     // parts are affinely dependent
};

/// Recovers E R as a combination of `parts` and reports how far it sits
/// from the recovered mixture member.
MixtureClosureReport mixture_family_closure_check(std::span<const Distribution> parts,
                                                  const DistributionEstimator& est, const Distribution& r0);

}  // namespace klrisk
