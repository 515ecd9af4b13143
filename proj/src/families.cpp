#include "klrisk/families.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace klrisk {

namespace {

double log_factorial(int k) { return std::lgamma(static_cast<double>(k) + 1.0); }

void require_positive(int v, const char* what) {
  if (v < 1) throw DomainError(std::string(what) + " must be a positive integer");
}

struct CountTriples {
  SpacePtr space;
  std::vector<std::array<int, 3>> counts;
};

CountTriples count_triples(int total) {
  CountTriples out;
  std::vector<std::string> labels;
  for (int y1 = 0; y1 <= total; ++y1) {
    for (int y2 = 0; y1 + y2 <= total; ++y2) {
      const int y3 = total - y1 - y2;
      out.counts.push_back({y1, y2, y3});
      labels.push_back(std::to_string(y1) + "," + std::to_string(y2) + "," + std::to_string(y3));
    }
  }
  out.space = make_space(std::move(labels));
  return out;
}

Eigen::VectorXd multinomial_log_pmf(const CountTriples& triples, int total, const std::array<double, 3>& pi) {
  Eigen::VectorXd lm(static_cast<Eigen::Index>(triples.counts.size()));
  for (std::size_t k = 0; k < triples.counts.size(); ++k) {
    const auto& y = triples.counts[k];
    double acc = log_factorial(total);
    for (int j = 0; j < 3; ++j) acc += y[j] * std::log(pi[j]) - log_factorial(y[j]);
    lm(static_cast<Eigen::Index>(k)) = acc;
  }
  return lm;
}

}  // namespace

ExponentialFamily binomial_family(int trials) {
  require_positive(trials, "binomial trials");
  SpacePtr space = integer_space(static_cast<std::size_t>(trials) + 1);
  Eigen::VectorXd lm(trials + 1);
  std::vector<double> t(static_cast<std::size_t>(trials) + 1);
  for (int x = 0; x <= trials; ++x) {
    lm(x) = log_factorial(trials) - log_factorial(x) - log_factorial(trials - x) - trials * std::log(2.0);
    t[static_cast<std::size_t>(x)] = x;
  }
  return ExponentialFamily(Distribution::from_log_weights(space, lm), Statistic::scalar(space, t));
}

ExponentialFamily poisson_family(int x_max) {
  require_positive(x_max, "Poisson truncation point");
  SpacePtr space = integer_space(static_cast<std::size_t>(x_max) + 1);
  Eigen::VectorXd lm(x_max + 1);
  std::vector<double> t(static_cast<std::size_t>(x_max) + 1);
  for (int x = 0; x <= x_max; ++x) {
    lm(x) = -1.0 - log_factorial(x);
    t[static_cast<std::size_t>(x)] = x;
  }
  return ExponentialFamily(Distribution::from_log_weights(space, lm), Statistic::scalar(space, t));
}

double poisson_tail_bound(double lambda, int x_max) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  // Terms decrease once x > lambda; sum until they stop contributing.
  double total = 0.0;
  for (int x = x_max + 1;; ++x) {
    const double term = std::exp(-lambda + x * std::log(lambda) - log_factorial(x));
    total += term;
    if (x > lambda && (term == 0.0 || term < total * 1e-17)) break;
  }
  return total;
}

ExponentialFamily trinomial_family(int total) {
  require_positive(total, "trinomial total");
  const CountTriples triples = count_triples(total);
  const double third = 1.0 / 3.0;
  Eigen::MatrixXd t(static_cast<Eigen::Index>(triples.counts.size()), 2);
  for (std::size_t k = 0; k < triples.counts.size(); ++k) {
    t(static_cast<Eigen::Index>(k), 0) = triples.counts[k][0];
    t(static_cast<Eigen::Index>(k), 1) = triples.counts[k][1];
  }
  return ExponentialFamily(
      Distribution::from_log_weights(triples.space, multinomial_log_pmf(triples, total, {third, third, third})),
      Statistic(triples.space, std::move(t)));
}

ExponentialFamily hardy_weinberg_family(int total) {
  require_positive(total, "Hardy-Weinberg total");
  const CountTriples triples = count_triples(total);
  std::vector<double> t(triples.counts.size());
  for (std::size_t k = 0; k < triples.counts.size(); ++k) t[k] = 2.0 * triples.counts[k][0] + triples.counts[k][1];
  return ExponentialFamily(
      Distribution::from_log_weights(triples.space, multinomial_log_pmf(triples, total, {0.25, 0.5, 0.25})),
      Statistic::scalar(triples.space, t));
}

// ---------------------------------------------------------------------------
// FamilySpec

FamilySpec FamilySpec::parse(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw DomainError("family must look like <kind>:<size>, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string size_text = text.substr(colon + 1);
  FamilySpec spec;
  if (kind == "binomial") spec.kind = FamilyKind::binomial;
  else if (kind == "poisson") spec.kind = FamilyKind::poisson_truncated;
  else if (kind == "trinomial") spec.kind = FamilyKind::trinomial;
  else if (kind == "hw") spec.kind = FamilyKind::hardy_weinberg;
  else throw DomainError("unknown family kind '" + kind + "'");
  std::size_t used = 0;
  try {
    spec.size = std::stoi(size_text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != size_text.size() || spec.size < 1)
    throw DomainError("family size must be a positive integer, got '" + size_text + "'");
  return spec;
}

std::string FamilySpec::name() const {
  switch (kind) {
    case FamilyKind::binomial: return "binomial:" + std::to_string(size);
    case FamilyKind::poisson_truncated: return "poisson:" + std::to_string(size);
    case FamilyKind::trinomial: return "trinomial:" + std::to_string(size);
    case FamilyKind::hardy_weinberg: return "hw:" + std::to_string(size);
  }
  return {};
}

ExponentialFamily FamilySpec::build() const {
  switch (kind) {
    case FamilyKind::binomial: return binomial_family(size);
    case FamilyKind::poisson_truncated: return poisson_family(size);
    case FamilyKind::trinomial: return trinomial_family(size);
    case FamilyKind::hardy_weinberg: return hardy_weinberg_family(size);
  }
  throw DomainError("unknown family kind");
}

Eigen::VectorXd FamilySpec::natural_from_conventional(const Eigen::VectorXd& c) const {
  if (c.size() != conventional_dimension()) throw DomainError("wrong number of family parameters");
  switch (kind) {
    case FamilyKind::binomial:
    case FamilyKind::hardy_weinberg:
      if (!(c(0) > 0.0 && c(0) < 1.0)) throw DomainError("probability parameter must lie in (0, 1)");
      return Eigen::VectorXd::Constant(1, std::log(c(0) / (1.0 - c(0))));
    case FamilyKind::poisson_truncated:
      if (!(c(0) > 0.0)) throw DomainError("lambda must be positive");
      return Eigen::VectorXd::Constant(1, std::log(c(0)));
    case FamilyKind::trinomial: {
      const double p3 = 1.0 - c(0) - c(1);
      if (!(c(0) > 0.0 && c(1) > 0.0 && p3 > 0.0)) throw DomainError("trinomial probabilities must be positive");
      Eigen::VectorXd theta(2);
      theta << std::log(c(0) / p3), std::log(c(1) / p3);
      return theta;
    }
  }
  throw DomainError("unknown family kind");
}

std::vector<Eigen::VectorXd> FamilySpec::default_grid() const {
  std::vector<Eigen::VectorXd> grid;
  switch (kind) {
    case FamilyKind::binomial:
    case FamilyKind::hardy_weinberg:
      for (int i = 1; i <= 9; ++i) grid.push_back(Eigen::VectorXd::Constant(1, i / 10.0));
      break;
    case FamilyKind::poisson_truncated:
      for (double lambda : {0.5, 0.75, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0})
        grid.push_back(Eigen::VectorXd::Constant(1, lambda));
      break;
    case FamilyKind::trinomial:
      for (double a : {0.2, 1.0 / 3.0, 0.5})
        for (double b : {0.2, 1.0 / 3.0, 0.4}) {
          Eigen::VectorXd pi(2);
          pi << a, b;
          grid.push_back(pi);
        }
      break;
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Estimators

Distribution extended_mle(const ExponentialFamily& fam, const Eigen::VectorXd& t_value, int n) {
  require_positive(n, "sample size");
  const Eigen::VectorXd mean = t_value / static_cast<double>(n);
  if (hull_position(fam, mean).kind == HullPosition::Kind::exterior)
    throw DomainError("t/n lies outside the closed convex hull of T(X)");
  return extended_member_from_mean(fam, mean);
}

DistributionEstimator mle_estimator(const ExponentialFamily& fam, int n) {
  IIDSpace domain(fam.space(), n);
  const LevelSets levels = level_sets(sum_statistic(domain, fam.statistic()));
  std::vector<Distribution> values;
  values.reserve(levels.size());
  for (const auto& t : levels.values) values.push_back(extended_mle(fam, t, n));
  return DistributionEstimator::on_level_sets(std::move(domain), levels, std::move(values));
}

double lehmann_umvu(int x) {
  if (x < 0) throw DomainError("count must be nonnegative");
  return std::pow(-2.0, x);
}

double poisson_indicator_umvue(int i, int s_n, int n) {
  if (n < 2) throw DomainError("sample size must be at least 2");
  if (i < 0 || s_n < 0) throw DomainError("counts must be nonnegative");
  if (i > s_n) return 0.0;
  const double inv = 1.0 / n;
  return std::exp(log_factorial(s_n) - log_factorial(i) - log_factorial(s_n - i) + i * std::log(inv) +
                  (s_n - i) * std::log1p(-inv));
}

}  // namespace klrisk
