// Acceptance gate: one [PASS]/[FAIL] line per criterion, nonzero exit if any
// fails. Optional argv[1] is the path of the klrisk executable, used for the
// cross-process determinism check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "klrisk/cli.hpp"
#include "klrisk/estimation.hpp"
#include "klrisk/families.hpp"
#include "klrisk/serialization.hpp"
#include "klrisk/verify.hpp"

using namespace klrisk;

namespace {

int failures = 0;

void report(bool pass, const std::string& name, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << name << ": " << detail << std::endl;
  if (!pass) ++failures;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

struct Case {
  std::string name;
  ExponentialFamily fam;
  FamilySpec spec;
  int n;
  std::vector<Eigen::VectorXd> generators;
};

std::vector<Case> catalog() {
  std::vector<Case> out;
  for (const auto& [name, n] : {std::pair{"binomial:6", 2}, std::pair{"hw:6", 2}, std::pair{"poisson:60", 2},
                                std::pair{"trinomial:6", 2}}) {
    const auto spec = FamilySpec::parse(name);
    std::vector<Eigen::VectorXd> gens;
    for (const auto& c : spec.default_grid()) gens.push_back(spec.natural_from_conventional(c));
    out.push_back(Case{name, spec.build(), spec, n, std::move(gens)});
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

bool is_family_valued_and_measurable(const DistributionEstimator& est, const ExponentialFamily& fam) {
  const auto levels = level_sets(sum_statistic(est.domain(), fam.statistic()));
  for (const auto& members : levels.members)
    for (auto i : members)
      if (kl_divergence(est.at(i), est.at(members.front())) > 0.0) return false;
  for (const auto& v : est.values())
    if (kl_divergence(v, extended_project(fam, v)) > 1e-14) return false;
  return true;
}

void identity_suite(const std::vector<Case>& cases, double& max_delta) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  bool pass = true;
  std::string failing;
  for (const auto& c : cases) {
    VerifyOptions options;
    options.n = c.n;
    options.random_estimators = 20;
    options.generators = c.generators;
    options.members = c.generators;
    const auto verdict = verify_family(c.fam, options);
    for (const auto& check : verdict.checks) {
      if (check.name == "duality_round_trip" || check.name == "mle_unbiased" ||
          check.name.rfind("rao_blackwell", 0) == 0)
        continue;
      worst = std::max(worst, check.max_residual);
      if (!check.pass || check.max_residual > 1e-9) {
        pass = false;
        failing += " " + c.name + "/" + check.name;
      }
      if (check.name == "delta_vanishing") max_delta = std::max(max_delta, check.max_residual);
    }
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  pass = pass && seconds < 30.0;
  report(pass, "identity_suite",
         "max residual " + sci(worst) + " (tol 1e-09), " + sci(seconds) + " s (limit 30 s)" + failing);
}

void delta_vanishing(double max_delta) {
  const auto bin6 = binomial_family(6);
  const auto mle = mle_estimator(bin6, 1);
  const auto e = kl_mean(mle, bin6.base());
  const auto wrong = member_from_natural(bin6, Eigen::VectorXd::Constant(1, 0.3));
  const auto p = member_from_natural(bin6, Eigen::VectorXd::Constant(1, 0.7));
  const double off = std::abs(delta_correction(e, wrong, p));
  report(max_delta <= 1e-9 && off >= 1e-3, "delta_vanishing",
         "max |delta| on projected triples " + sci(max_delta) + " (tol 1e-09); non-projected triple " + sci(off) +
             " (needs >= 1e-03)");
}

void duality_round_trip(const std::vector<Case>& cases) {
  double worst = 0.0;
  std::size_t points = 100;
  for (const auto& c : cases) {
    const auto grid = natural_grid(c.fam, 100);
    points = std::min(points, grid.size());
    for (const auto& theta : grid) {
      const auto mu = cumulant(c.fam, theta).grad;
      worst = std::max(worst, (theta - natural_from_mean(c.fam, mu).theta).lpNorm<Eigen::Infinity>());
    }
  }
  report(worst <= 1e-9 && points >= 100, "duality_round_trip",
         "max |theta - theta(mu(theta))| " + sci(worst) + " over 100 points per family (tol 1e-09)");
}

void mle_unbiased(const std::vector<Case>& cases) {
  double worst = 0.0;
  double worst_level = 0.0;
  bool pass = true;
  for (const auto& c : cases) {
    const auto r = check_distribution_unbiased(mle_estimator(c.fam, c.n), c.fam, c.generators);
    for (const auto& e : r.entries) {
      worst = std::max(worst, e.divergence);
      worst_level = std::max(worst_level, e.level_residual);
      pass = pass && e.divergence <= 1e-9;
    }
  }
  report(pass, "mle_distribution_unbiased",
         "max D(Ed, P) " + sci(worst) + " (tol 1e-09); max per-level mean residual " + sci(worst_level));
}

void rao_blackwell(const std::vector<Case>& cases) {
  double worst_increase = -kInf;
  double worst_mean = 0.0;
  double smallest_strict = kInf;
  bool pass = true;
  int strict_cases = 0;
  for (const auto& c : cases) {
    const IIDSpace domain(c.fam.space(), c.n);
    const auto sum = sum_statistic(domain, c.fam.statistic());
    for (int k = 0; k < 50; ++k) {
      const auto est = random_estimator(c.fam, domain, 1001, static_cast<std::uint64_t>(k));
      const auto& theta0 = c.generators[static_cast<std::size_t>(k) % c.generators.size()];
      const auto r0 = member_from_natural(c.fam, theta0);
      const auto rb = rao_blackwellize(est, sum, c.fam, r0).estimator;
      const double vd = distribution_variance(est, c.fam, r0);
      const double vd_rb = distribution_variance(rb, c.fam, r0);
      worst_increase = std::max(worst_increase, vd_rb - vd);
      pass = pass && vd_rb <= vd + 1e-12;
      const auto ed = distribution_mean(est, c.fam, r0);
      const auto ed_rb = distribution_mean(rb, c.fam, r0);
      const double mean_diff = (ed.probabilities() - ed_rb.probabilities()).lpNorm<Eigen::Infinity>();
      worst_mean = std::max(worst_mean, mean_diff);
      pass = pass && mean_diff <= 1e-10;
      if (!is_family_valued_and_measurable(est, c.fam)) {
        ++strict_cases;
        smallest_strict = std::min(smallest_strict, vd - vd_rb);
        pass = pass && vd_rb < vd;
      }
    }
  }
  report(pass, "rao_blackwell",
         "max Vd increase " + sci(worst_increase) + " (tol 1e-12); max Ed change " + sci(worst_mean) +
             " (tol 1e-10); smallest strict decrease " + sci(smallest_strict) + " over " +
             std::to_string(strict_cases) + " estimators");
}

void arena(const std::vector<Case>& cases) {
  bool pass = true;
  double min_margin = kInf;
  int runs = 0;
  std::string failing;
  for (const auto& c : cases) {
    for (double eps : {0.25, 0.5}) {
      for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        RunConfig config;
        config.command = "compete";
        config.family = c.name;
        config.n = c.n;
        config.k = 100;
        config.epsilon = eps;
        config.seed = seed;
        const auto result = run_command(config);
        const Json j = Json::parse(result.output);
        const auto& s = j["summary"];
        const double margin = s["min_margin"].get<double>();
        double worst_residual = 0.0;
        for (const auto& comp : j["competitors"])
          for (const auto& g : comp["generators"]) worst_residual = std::max(worst_residual, g["unbiased_residual"].get<double>());
        min_margin = std::min(min_margin, margin);
        const bool ok = result.exit_code == kExitOk && s["all_unbiased"] == true && worst_residual <= 1e-8 &&
                        margin >= -1e-10 && s["strict_wins"] == 100;
        if (!ok) failing += " " + c.name + "/eps=" + sci(eps) + "/seed=" + std::to_string(seed);
        pass = pass && ok;
        ++runs;
      }
    }
  }
  report(pass, "competitor_arena",
         std::to_string(runs) + " runs of 100 competitors; min Vd margin over the MLE " + sci(min_margin) +
             " (must be > 0)" + failing);
}

void bernoulli_closed_form() {
  const auto bern = binomial_family(1);
  const auto mle = mle_estimator(bern, 1);
  double worst = 0.0;
  double at_half = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double t = i / 10.0;
    const auto r0 = member_from_natural(bern, Eigen::VectorXd::Constant(1, std::log(t / (1 - t))));
    const double h = -t * std::log(t) - (1 - t) * std::log(1 - t);
    const double v = kl_variance(mle, r0);
    const double vd = distribution_variance(mle, bern, r0);
    worst = std::max({worst, std::abs(v - h), std::abs(vd - h)});
    if (i == 5) at_half = std::max(std::abs(v - std::log(2.0)), std::abs(vd - std::log(2.0)));
  }
  report(worst <= 1e-12 && at_half <= 1e-12, "bernoulli_closed_form",
         "max |V - h|, |Vd - h| " + sci(worst) + " (tol 1e-12); at 0.5 vs ln 2 " + sci(at_half));
}

void hardy_weinberg_curve() {
  const int total = 6;
  const auto hw = hardy_weinberg_family(total);
  const auto mle = mle_estimator(hw, 1);
  double pi1_error = 0.0;
  double min_gap = kInf;
  double max_model = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double t = i / 10.0;
    const auto model = member_from_natural(hw, Eigen::VectorXd::Constant(1, std::log(t / (1 - t))));
    const auto e = kl_mean(mle, model);
    const auto ed = extended_project(hw, e);
    if (i == 5) {
      double pi1 = 0.0;
      for (std::size_t k = 0; k < hw.space()->size(); ++k) pi1 += e.prob(k) * std::stoi(hw.space()->label(k));
      pi1 /= total;
      pi1_error = std::abs(pi1 - (t * t + t * (1 - t) / (2.0 * total)));
    }
    min_gap = std::min(min_gap, kl_divergence(e, ed));
    max_model = std::max(max_model, kl_divergence(ed, model));
  }
  report(pi1_error <= 1e-9 && min_gap > 1e-4 && max_model <= 1e-9, "hardy_weinberg_kl_mean_curve",
         "pi1 error at 0.5 " + sci(pi1_error) + " (tol 1e-09); min D(E, Ed) " + sci(min_gap) +
             " (needs > 1e-04); max D(Ed, P) " + sci(max_model) + " (tol 1e-09)");
}

void poisson_pathologies() {
  const int x_max = 60;
  const auto pois = poisson_family(x_max);
  const IIDSpace pairs(pois.space(), 2);
  const auto sum = sum_statistic(pairs, pois.statistic());
  std::vector<Distribution> values;
  for (std::size_t i = 0; i < pairs.size(); ++i) values.push_back(Distribution::point_mass(pois.space(), pairs.coordinates(i)[0]));
  const auto indicator = DistributionEstimator::per_outcome(pairs, std::move(values));
  const auto r0 = member_from_natural(pois, Eigen::VectorXd::Zero(1));
  double worst = 0.0;
  for (int s_n = 0; s_n <= 40; ++s_n) {
    const auto law = conditional_kl_mean(indicator, sum, Eigen::VectorXd::Constant(1, s_n), r0);
    for (int i = 0; i <= s_n; ++i)
      worst = std::max(worst, std::abs(law.prob(static_cast<std::size_t>(i)) - poisson_indicator_umvue(i, s_n, 2)));
  }
  double lehmann = 0.0;
  for (double lambda : {0.5, 1.0, 2.0, 4.0}) {
    double s = 0.0;
    for (int x = 0; x <= x_max; ++x) s += lehmann_umvu(x) * std::exp(-lambda + x * std::log(lambda) - std::lgamma(x + 1.0));
    lehmann = std::max(lehmann, std::abs(s - std::exp(-3.0 * lambda)));
  }
  report(worst <= 1e-12 && lehmann <= 1e-8, "poisson_pathologies",
         "indicator closed form vs conditional mean " + sci(worst) + " (tol 1e-12); (-2)^x expectation error " +
             sci(lehmann) + " (tol 1e-08)");
}

void determinism(const char* executable) {
  RunConfig config;
  config.command = "compete";
  config.family = "trinomial:6";
  config.k = 25;
  config.seed = 3;
  bool same = run_command(config).output == run_command(config).output;
  std::string detail = "in-process outputs identical";
  if (executable) {
    const std::string a = "acceptance_compete_a.json", b = "acceptance_compete_b.json";
    const std::string cmd = std::string(executable) + " compete --family binomial:6 --k 50 --seed 4 --epsilon 0.25 --out ";
    const int ra = std::system((cmd + a).c_str());
    const int rb = std::system((cmd + b).c_str());
    const std::string ta = read_file(a), tb = read_file(b);
    const bool files_same = ra == 0 && rb == 0 && !ta.empty() && ta == tb;
    same = same && files_same;
    detail += files_same ? "; two CLI runs byte-identical" : "; two CLI runs differ";
    std::remove(a.c_str());
    std::remove(b.c_str());
  }
  report(same, "determinism", detail);
}

}  // namespace

int main(int argc, char** argv) {
  const auto cases = catalog();
  double max_delta = 0.0;
  identity_suite(cases, max_delta);
  delta_vanishing(max_delta);
  duality_round_trip(cases);
  mle_unbiased(cases);
  rao_blackwell(cases);
  arena(cases);
  bernoulli_closed_form();
  hardy_weinberg_curve();
  poisson_pathologies();
  determinism(argc > 1 ? argv[1] : nullptr);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
