#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "klrisk/families.hpp"
#include "klrisk/serialization.hpp"
#include "klrisk/verify.hpp"

using namespace klrisk;

TEST_CASE("dump_json writes 17 digits and marks non-finite floats") {
  Json j;
  j["x"] = 0.1;
  j["big"] = kInf;
  j["list"] = Json::array({1.5, -kInf});
  j["flag"] = true;
  CHECK(dump_json(j) == "{\n  \"x\": 0.10000000000000001,\n  \"big\": \"inf\",\n  \"list\": [1.5, \"-inf\"],\n  \"flag\": true\n}\n");
  CHECK(dump_json(Json::object()) == "{}\n");
}

TEST_CASE("distribution JSON round trip keeps zeros and bits") {
  const auto bin6 = binomial_family(6);
  Eigen::VectorXd p(7);
  p << 0.1, 0.0, 0.2, 0.3, 0.0, 0.15, 0.25;
  const auto r = Distribution::from_probabilities(bin6.space(), p);
  const Json j = to_json(r);
  CHECK(j["logp"][1].is_null());
  const auto back = distribution_from_json(Json::parse(dump_json(j)), bin6.space());
  CHECK((back.log_mass().array() == r.log_mass().array()).all());
  const auto fresh = distribution_from_json(j);
  CHECK(fresh.space()->labels() == r.space()->labels());

  Json bad = j;
  bad["logp"][0] = 3.0;
  CHECK_THROWS_AS(distribution_from_json(bad), LoadError);
  Json short_space = j;
  short_space["space"] = Json::array({"0", "1"});
  CHECK_THROWS_AS(distribution_from_json(short_space, bin6.space()), LoadError);
}

TEST_CASE("family JSON round trip and validation") {
  const auto tri = trinomial_family(3);
  const Json j = family_to_json(tri);
  const auto back = family_from_json(Json::parse(dump_json(j)));
  CHECK(back.space()->labels() == tri.space()->labels());
  CHECK(back.statistic().values() == tri.statistic().values());
  CHECK(std::abs(kl_divergence(back.base(), tri.base())) < 1e-15);

  Json corrupted = j;
  corrupted["base_logp"][0] = 0.0;
  CHECK_THROWS_AS(family_from_json(corrupted), LoadError);
  Json partial = j;
  partial["base_logp"][0] = nullptr;
  CHECK_THROWS_AS(family_from_json(partial), LoadError);
  Json ragged = j;
  ragged["T"][0] = Json::array({1.0});
  CHECK_THROWS_AS(family_from_json(ragged), LoadError);
  Json flat = family_to_json(binomial_family(3));
  for (auto& row : flat["T"]) row = Json::array({1.0});
  CHECK_THROWS_AS(family_from_json(flat), LoadError);
}

TEST_CASE("estimator JSON round trip by outcome and by statistic") {
  const auto bin = binomial_family(3);
  const IIDSpace domain(bin.space(), 2);
  const auto est = random_estimator(bin, domain, 5, 0);
  const auto back = estimator_from_json(Json::parse(dump_json(estimator_to_json(est))), bin);
  REQUIRE(back.outcome_count() == est.outcome_count());
  for (std::size_t i = 0; i < est.outcome_count(); ++i) CHECK((back.at(i).log_mass().array() == est.at(i).log_mass().array()).all());

  const auto mle = mle_estimator(bin, 2);
  const Json by_stat = estimator_to_json_by_statistic(mle, bin);
  CHECK(by_stat["key"] == "statistic");
  CHECK(by_stat["values"].contains("6"));
  const auto mle_back = estimator_from_json(by_stat, bin);
  for (std::size_t i = 0; i < mle.outcome_count(); ++i) CHECK(kl_divergence(mle_back.at(i), mle.at(i)) == 0.0);
  CHECK_THROWS_AS(estimator_to_json_by_statistic(est, bin), StructuralError);

  Json missing = by_stat;
  missing["values"].erase("6");
  CHECK_THROWS_AS(estimator_from_json(missing, bin), LoadError);
  Json unknown = by_stat;
  unknown["values"]["9"] = unknown["values"]["6"];
  CHECK_THROWS_AS(estimator_from_json(unknown, bin), LoadError);

  const auto tri = trinomial_family(2);
  const Json tri_stat = estimator_to_json_by_statistic(mle_estimator(tri, 1), tri);
  CHECK(tri_stat["values"].contains("1,1"));
  CHECK_NOTHROW(estimator_from_json(tri_stat, tri));
}

TEST_CASE("read_json_file reports unreadable input") {
  CHECK_THROWS_AS(read_json_file("/nonexistent/file.json"), LoadError);
  const std::string path = "klrisk_test_bad.json";
  {
    std::ofstream out(path);
    out << "{ not json";
  }
  CHECK_THROWS_AS(read_json_file(path), LoadError);
  std::remove(path.c_str());
}
