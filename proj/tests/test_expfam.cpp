#include <doctest.h>

#include <cmath>
#include <vector>

#include "klrisk/expfam.hpp"
#include "klrisk/families.hpp"
#include "klrisk/verify.hpp"
#include "oracles.hpp"

using namespace klrisk;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

double logit(double p) { return std::log(p / (1.0 - p)); }

void check_pmf(const Distribution& r, const std::vector<double>& expected, double tol) {
  REQUIRE(r.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) CHECK(std::abs(r.prob(i) - expected[i]) <= tol);
}

std::size_t trinomial_index(int total, int y1, int y2) {
  std::size_t k = 0;
  for (int a = 0; a <= total; ++a)
    for (int b = 0; a + b <= total; ++b) {
      if (a == y1 && b == y2) return k;
      ++k;
    }
  return k;
}

}  // namespace

TEST_CASE("family construction rejects bad inputs") {
  const auto space = integer_space(3);
  Eigen::VectorXd p(3);
  p << 0.5, 0.5, 0.0;
  const auto partial = Distribution::from_probabilities(space, p);
  CHECK_THROWS_AS(ExponentialFamily(partial, Statistic::scalar(space, {0, 1, 2})), DomainError);

  const auto uniform = Distribution::uniform(space);
  CHECK_THROWS_AS(ExponentialFamily(uniform, Statistic::scalar(space, {1, 1, 1})), DomainError);
  Eigen::MatrixXd dependent(3, 2);
  dependent << 0, 0, 1, 2, 2, 4;
  CHECK_THROWS_AS(ExponentialFamily(uniform, Statistic(space, dependent)), DomainError);
  Eigen::MatrixXd too_many(3, 3);
  too_many.setIdentity();
  CHECK_THROWS_AS(ExponentialFamily(uniform, Statistic(space, too_many)), DomainError);
  CHECK_THROWS_AS(ExponentialFamily(uniform, Statistic::scalar(integer_space(4), {0, 1, 2, 3})), StructuralError);
}

TEST_CASE("cumulant examples") {
  const auto bin6 = binomial_family(6);
  const auto at0 = cumulant(bin6, vec({0.0}));
  CHECK(std::abs(at0.psi) < 1e-15);
  CHECK(std::abs(at0.grad(0) - 3.0) < 1e-14);
  CHECK(std::abs(at0.hess(0, 0) - 1.5) < 1e-14);

  const auto bern = binomial_family(1);
  const auto c = cumulant(bern, vec({std::log(9.0)}));
  CHECK(std::abs(c.grad(0) - 0.9) < 1e-15);
  CHECK(std::abs(c.psi - std::log(0.5 + 0.5 * 9.0)) < 1e-15);

  CHECK_THROWS_AS(cumulant(bin6, vec({1.0, 2.0})), DomainError);
}

TEST_CASE("cumulant gradient and Hessian match finite differences") {
  const auto tri = trinomial_family(4);
  const double h = 1e-5;
  for (std::uint64_t key = 0; key < 10; ++key) {
    CounterRng rng(3, key);
    const Eigen::VectorXd theta = vec({rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)});
    const auto c = cumulant(tri, theta);
    for (int j = 0; j < 2; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
      e(j) = h;
      const auto plus = cumulant(tri, theta + e);
      const auto minus = cumulant(tri, theta - e);
      CHECK(std::abs((plus.psi - minus.psi) / (2 * h) - c.grad(j)) < 1e-8);
      for (int k = 0; k < 2; ++k) CHECK(std::abs((plus.grad(k) - minus.grad(k)) / (2 * h) - c.hess(k, j)) < 1e-7);
    }
  }
}

TEST_CASE("member_from_natural examples") {
  const auto bin6 = binomial_family(6);
  check_pmf(member_from_natural(bin6, vec({0.0})), oracle::binomial_pmf(6, 0.5), 1e-15);
  check_pmf(member_from_natural(bin6, vec({logit(2.0 / 3.0)})), oracle::binomial_pmf(6, 2.0 / 3.0), 1e-14);
  const auto hw = hardy_weinberg_family(6);
  check_pmf(member_from_natural(hw, vec({0.0})), oracle::multinomial_pmf(6, 0.25, 0.5, 0.25), 1e-15);
  check_pmf(member_from_natural(hw, vec({logit(0.3)})), oracle::hardy_weinberg_pmf(6, 0.3), 1e-14);
}

TEST_CASE("natural_from_mean examples") {
  const auto bin6 = binomial_family(6);
  CHECK(natural_from_mean(bin6, vec({3.0})).theta.norm() < 1e-12);
  CHECK(std::abs(natural_from_mean(bin6, vec({4.0})).theta(0) - std::log(2.0)) < 1e-11);

  const auto tri = trinomial_family(6);
  const auto base_mean = cumulant(tri, vec({0.0, 0.0})).grad;
  CHECK(natural_from_mean(tri, base_mean).theta.norm() < 1e-12);

  CHECK_THROWS_AS(natural_from_mean(bin6, vec({0.0})), BoundaryError);
  CHECK_THROWS_AS(natural_from_mean(bin6, vec({7.0})), DomainError);
  try {
    natural_from_mean(bin6, vec({6.0}));
    FAIL("expected a boundary error");
  } catch (const BoundaryError& e) {
    CHECK(e.face().active_points == std::vector<std::size_t>{6});
  }
}

TEST_CASE("duality round trip over random natural parameters") {
  for (const auto& fam : {binomial_family(6), hardy_weinberg_family(6), poisson_family(60), trinomial_family(6)}) {
    for (std::uint64_t key = 0; key < 40; ++key) {
      CounterRng rng(5, key);
      Eigen::VectorXd theta(fam.dimension());
      for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = rng.uniform(-2.5, 2.5);
      if (fam.space()->size() == 61) theta(0) = rng.uniform(-1.0, 1.3);
      const auto mu = cumulant(fam, theta).grad;
      const auto back = natural_from_mean(fam, mu);
      CHECK((back.theta - theta).cwiseAbs().maxCoeff() < 1e-9);
      CHECK((back.mu - mu).cwiseAbs().maxCoeff() <= kDualityTolerance);
    }
  }
}

TEST_CASE("hull_position examples") {
  const auto bin6 = binomial_family(6);
  CHECK(hull_position(bin6, vec({3.0})).interior());
  const auto end = hull_position(bin6, vec({0.0}));
  REQUIRE(end.kind == HullPosition::Kind::boundary);
  CHECK(end.face->active_points == std::vector<std::size_t>{0});
  CHECK(end.face->face_mean(0) == 0.0);
  CHECK(hull_position(bin6, vec({-0.5})).kind == HullPosition::Kind::exterior);

  const auto tri = trinomial_family(6);
  CHECK(hull_position(tri, vec({2.0, 2.0})).interior());
  const auto edge = hull_position(tri, vec({2.5, 3.5}));
  REQUIRE(edge.kind == HullPosition::Kind::boundary);
  std::vector<std::size_t> expected;
  for (int y1 = 0; y1 <= 6; ++y1) expected.push_back(trinomial_index(6, y1, 6 - y1));
  std::sort(expected.begin(), expected.end());
  auto active = edge.face->active_points;
  std::sort(active.begin(), active.end());
  CHECK(active == expected);

  const auto side = hull_position(tri, vec({0.0, 1.0}));
  REQUIRE(side.kind == HullPosition::Kind::boundary);
  CHECK(side.face->active_points.size() == 7);
  const auto vertex = hull_position(tri, vec({6.0, 0.0}));
  REQUIRE(vertex.kind == HullPosition::Kind::boundary);
  CHECK(vertex.face->active_points == std::vector<std::size_t>{trinomial_index(6, 6, 0)});
  CHECK(hull_position(tri, vec({4.0, 3.0})).kind == HullPosition::Kind::exterior);
}

TEST_CASE("project examples against a grid search") {
  const auto bin6 = binomial_family(6);
  const auto m = member_from_natural(bin6, vec({0.7}));
  CHECK(kl_divergence(project(bin6, m), m) < 1e-15);
  for (std::size_t i = 0; i < m.size(); ++i) CHECK(std::abs(project(bin6, m).prob(i) - m.prob(i)) < 1e-10);

  const auto uniform = Distribution::uniform(bin6.space());
  const std::vector<double> u(7, 1.0 / 7.0);
  const double best = oracle::grid_argmin([&](double p) { return oracle::kl(u, oracle::binomial_pmf(6, p)); }, 0.0, 1.0, 1e-4);
  CHECK(std::abs(best - 0.5) < 1e-4);
  check_pmf(project(bin6, uniform), oracle::binomial_pmf(6, 0.5), 1e-14);

  // A skewed pmf: the grid argmin and the projection agree to grid resolution.
  std::vector<double> skew{0.05, 0.1, 0.4, 0.05, 0.1, 0.2, 0.1};
  const auto r = Distribution::from_probabilities(bin6.space(), Eigen::Map<Eigen::VectorXd>(skew.data(), 7));
  const double p_star = oracle::grid_argmin([&](double p) { return oracle::kl(skew, oracle::binomial_pmf(6, p)); }, 0.0, 1.0, 1e-4);
  const auto pr = project(bin6, r);
  const double p_hat = mean_of_statistic(pr, bin6.statistic())(0) / 6.0;
  CHECK(std::abs(p_hat - p_star) < 1e-4);
  CHECK(kl_divergence(r, pr) <= oracle::kl(skew, oracle::binomial_pmf(6, p_star)) + 1e-15);

  CHECK_THROWS_AS(project(bin6, Distribution::point_mass(bin6.space(), 0)), BoundaryError);
}

TEST_CASE("extended_project examples") {
  const auto bin6 = binomial_family(6);
  const auto i0 = extended_project(bin6, Distribution::point_mass(bin6.space(), 0));
  CHECK(i0.prob(0) == 1.0);
  const auto i6 = extended_project(bin6, Distribution::point_mass(bin6.space(), 6));
  CHECK(i6.prob(6) == 1.0);
  const auto uniform = Distribution::uniform(bin6.space());
  CHECK(kl_divergence(extended_project(bin6, uniform), project(bin6, uniform)) == 0.0);
}

TEST_CASE("extended_project on a trinomial edge minimizes over the restricted family") {
  const int total = 5;
  const auto tri = trinomial_family(total);
  // r lives on the edge y3 = 0 with uneven weights.
  Eigen::VectorXd p = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(tri.space()->size()));
  std::vector<double> edge_r;
  double z = 0;
  for (int y1 = 0; y1 <= total; ++y1) {
    const double w = 1.0 + (y1 % 3);
    edge_r.push_back(w);
    z += w;
  }
  for (int y1 = 0; y1 <= total; ++y1) {
    edge_r[static_cast<std::size_t>(y1)] /= z;
    p(static_cast<Eigen::Index>(trinomial_index(total, y1, total - y1))) = edge_r[static_cast<std::size_t>(y1)];
  }
  const auto r = Distribution::from_probabilities(tri.space(), p);
  const auto ed = extended_project(tri, r);
  CHECK((mean_of_statistic(ed, tri.statistic()) - mean_of_statistic(r, tri.statistic())).cwiseAbs().maxCoeff() < 1e-11);
  for (int y1 = 0; y1 <= total; ++y1)
    for (int y2 = 0; y1 + y2 < total; ++y2) CHECK(ed.is_zero(trinomial_index(total, y1, y2)));

  // On the edge the family restricts to Binomial(total, q) in y1.
  const double q_star = oracle::grid_argmin([&](double q) { return oracle::kl(edge_r, oracle::binomial_pmf(total, q)); }, 0.0, 1.0, 1e-4);
  CHECK(kl_divergence(r, ed) <= oracle::kl(edge_r, oracle::binomial_pmf(total, q_star)) + 1e-15);
  const auto bin = oracle::binomial_pmf(total, mean_of_statistic(ed, tri.statistic())(0) / total);
  for (int y1 = 0; y1 <= total; ++y1)
    CHECK(std::abs(ed.prob(trinomial_index(total, y1, total - y1)) - bin[static_cast<std::size_t>(y1)]) < 1e-12);
}

TEST_CASE("members approach a vertex point mass") {
  const auto bin6 = binomial_family(6);
  const auto i0 = Distribution::point_mass(bin6.space(), 0);
  double previous = kInf;
  for (int k = 1; k <= 20; ++k) {
    const double d = kl_divergence(i0, member_from_natural(bin6, vec({-static_cast<double>(k)})));
    CHECK(d < previous);
    previous = d;
  }
  CHECK(previous < 1e-7);
}

TEST_CASE("bregman_divergence examples") {
  const auto bern = binomial_family(1);
  const auto a = param_point(bern, vec({logit(0.5)}));
  const auto b = param_point(bern, vec({logit(0.9)}));
  CHECK(bregman_divergence(bern, a, a) == 0.0);
  const double hand = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  CHECK(std::abs(bregman_divergence(bern, a, b) - hand) < 1e-15);
  CHECK(std::abs(hand - 0.510826) < 1e-6);

  const auto bin6 = binomial_family(6);
  const auto p1 = param_point(bin6, vec({0.0}));
  const auto p2 = param_point(bin6, vec({logit(2.0 / 3.0)}));
  CHECK(std::abs(bregman_divergence(bin6, p1, p2) -
                 oracle::kl(oracle::binomial_pmf(6, 0.5), oracle::binomial_pmf(6, 2.0 / 3.0))) < 1e-14);
}

TEST_CASE("Pythagorean identity for random distributions and members") {
  for (const auto& fam : {binomial_family(6), hardy_weinberg_family(4), trinomial_family(4)}) {
    for (std::uint64_t key = 0; key < 20; ++key) {
      CounterRng rng(9, key);
      const auto r = random_distribution(fam.space(), rng, key % 2 ? 0.3 : 0.0);
      Eigen::VectorXd theta(fam.dimension());
      for (Eigen::Index j = 0; j < theta.size(); ++j) theta(j) = rng.uniform(-2.0, 2.0);
      const auto member = member_from_natural(fam, theta);
      const auto pi = extended_project(fam, r);
      const double lhs = kl_divergence(r, member);
      const double rhs = kl_divergence(r, pi) + kl_divergence(pi, member);
      CHECK(std::abs(lhs - rhs) < 1e-9);
      CHECK((mean_of_statistic(pi, fam.statistic()) - mean_of_statistic(r, fam.statistic())).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("projection beats every member of a fine grid") {
  const auto hw = hardy_weinberg_family(3);
  CounterRng rng(13, 0);
  const auto r = random_distribution(hw.space(), rng);
  const auto pr = project(hw, r);
  const double best = kl_divergence(r, pr);
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    CHECK(best <= kl_divergence(r, member_from_natural(hw, vec({logit(p)}))) + 1e-15);
  }
}

TEST_CASE("extended Pythagorean identity for boundary means") {
  const auto tri = trinomial_family(4);
  for (std::uint64_t key = 0; key < 10; ++key) {
    CounterRng rng(17, key);
    // Mass only on the edge y1 = 0 (and, for odd keys, only on a vertex).
    Eigen::VectorXd lw = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(tri.space()->size()), -kInf);
    for (int y2 = 0; y2 <= 4; ++y2)
      if (key % 2 == 0 || y2 == 4) lw(static_cast<Eigen::Index>(trinomial_index(4, 0, y2))) = std::log(rng.uniform(0.05, 1.0));
    const auto r = Distribution::from_log_weights(tri.space(), lw);
    const auto pi = extended_project(tri, r);
    for (double a : {-1.0, 0.0, 1.5})
      for (double b : {-0.5, 0.5}) {
        const auto p = member_from_natural(tri, vec({a, b}));
        CHECK(std::abs(kl_divergence(r, p) - kl_divergence(r, pi) - kl_divergence(pi, p)) < 1e-9);
      }
  }
}
