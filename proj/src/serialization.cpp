#include "klrisk/serialization.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace klrisk {

namespace {

void dump(const Json& v, std::ostringstream& out, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out << '\n' << std::string(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (v.type()) {
    case Json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{';
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ',';
        first = false;
        newline(depth + 1);
        out << Json(it.key()).dump() << (indent < 0 ? ":" : ": ");
        dump(it.value(), out, indent, depth + 1);
      }
      newline(depth);
      out << '}';
      return;
    }
    case Json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalars = true;
      for (const auto& e : v) scalars = scalars && !e.is_structured();
      out << '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out << (scalars && indent >= 0 ? ", " : ",");
        first = false;
        if (!scalars) newline(depth + 1);
        dump(e, out, indent, depth + 1);
      }
      if (!scalars) newline(depth);
      out << ']';
      return;
    }
    case Json::value_t::number_float: {
      const double d = v.get<double>();
      if (std::isfinite(d)) out << format_double(d);
      else out << '"' << format_double(d) << '"';
      return;
    }
    default:
      out << v.dump();
  }
}

std::vector<std::string> labels_from(const Json& j, const char* field) {
  if (!j.contains(field) || !j.at(field).is_array()) throw LoadError(std::string("missing array '") + field + "'");
  std::vector<std::string> labels;
  for (const auto& e : j.at(field)) {
    if (!e.is_string()) throw LoadError(std::string("'") + field + "' entries must be strings");
    labels.push_back(e.get<std::string>());
  }
  return labels;
}

double number_from(const Json& e, const char* what) {
  if (e.is_number()) return e.get<double>();
  if (e.is_string()) {
    const auto s = e.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  throw LoadError(std::string(what) + " must be numeric");
}

}  // namespace

std::string dump_json(const Json& value, int indent) {
  std::ostringstream out;
  dump(value, out, indent, 0);
  if (indent >= 0) out << '\n';
  return out.str();
}

Json to_json(const Distribution& r) {
  Json j;
  j["space"] = r.space()->labels();
  Json logp = Json::array();
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r.is_zero(i)) logp.push_back(nullptr);
    else logp.push_back(r.log_prob(i));
  }
  j["logp"] = std::move(logp);
  return j;
}

Distribution distribution_from_json(const Json& j) {
  if (!j.is_object()) throw LoadError("distribution must be a JSON object");
  SpacePtr space;
  try {
    space = make_space(labels_from(j, "space"));
  } catch (const DomainError& e) {
    throw LoadError(e.what());
  }
  return distribution_from_json(j, space);
}

Distribution distribution_from_json(const Json& j, const SpacePtr& space) {
  if (!j.is_object()) throw LoadError("distribution must be a JSON object");
  if (labels_from(j, "space") != space->labels()) throw LoadError("distribution labels do not match the sample space");
  if (!j.contains("logp") || !j.at("logp").is_array()) throw LoadError("missing array 'logp'");
  const Json& logp = j.at("logp");
  if (logp.size() != space->size()) throw LoadError("'logp' length does not match 'space'");
  Eigen::VectorXd lm(static_cast<Eigen::Index>(logp.size()));
  for (std::size_t i = 0; i < logp.size(); ++i)
    lm(static_cast<Eigen::Index>(i)) = logp[i].is_null() ? -kInf : number_from(logp[i], "logp entry");
  try {
    return Distribution(space, std::move(lm));
  } catch (const std::exception& e) {
    throw LoadError(std::string("invalid distribution: ") + e.what());
  }
}

Json family_to_json(const ExponentialFamily& fam) {
  Json j;
  j["support"] = fam.space()->labels();
  Json base = Json::array();
  for (std::size_t i = 0; i < fam.base().size(); ++i) base.push_back(fam.base().log_prob(i));
  j["base_logp"] = std::move(base);
  Json t = Json::array();
  for (Eigen::Index i = 0; i < fam.statistic().values().rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < fam.dimension(); ++k) row.push_back(fam.statistic().values()(i, k));
    t.push_back(std::move(row));
  }
  j["T"] = std::move(t);
  return j;
}

ExponentialFamily family_from_json(const Json& j) {
  if (!j.is_object()) throw LoadError("family spec must be a JSON object");
  try {
    SpacePtr space = make_space(labels_from(j, "support"));
    if (!j.contains("base_logp") || !j.at("base_logp").is_array() || j.at("base_logp").size() != space->size())
      throw LoadError("'base_logp' must hold one float per support point");
    Eigen::VectorXd lm(static_cast<Eigen::Index>(space->size()));
    for (std::size_t i = 0; i < space->size(); ++i) {
      const Json& e = j.at("base_logp")[i];
      if (e.is_null()) throw LoadError("base point must have full support");
      lm(static_cast<Eigen::Index>(i)) = number_from(e, "base_logp entry");
    }
    if (!j.contains("T") || !j.at("T").is_array() || j.at("T").size() != space->size())
      throw LoadError("'T' must hold one row per support point");
    const Json& rows = j.at("T");
    const std::size_t d = rows[0].is_array() ? rows[0].size() : 0;
    if (d == 0) throw LoadError("'T' rows must be nonempty arrays");
    Eigen::MatrixXd t(static_cast<Eigen::Index>(space->size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (!rows[i].is_array() || rows[i].size() != d) throw LoadError("'T' rows must all have the same length");
      for (std::size_t k = 0; k < d; ++k)
        t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = number_from(rows[i][k], "T entry");
    }
    return ExponentialFamily(Distribution(space, std::move(lm)), Statistic(space, std::move(t)));
  } catch (const LoadError&) {
    throw;
  } catch (const std::exception& e) {
    throw LoadError(std::string("invalid family spec: ") + e.what());
  }
}

Json estimator_to_json(const DistributionEstimator& est) {
  Json j;
  j["n"] = est.n();
  j["space"] = est.space()->labels();
  j["key"] = "outcome";
  Json values = Json::object();
  for (std::size_t x = 0; x < est.outcome_count(); ++x) values[std::to_string(x)] = to_json(est.at(x));
  j["values"] = std::move(values);
  return j;
}

namespace {

std::string statistic_key(const Eigen::VectorXd& t) {
  std::string key;
  for (Eigen::Index k = 0; k < t.size(); ++k) {
    if (k) key += ',';
    key += format_double(t(k));
  }
  return key;
}

Eigen::VectorXd parse_statistic_key(const std::string& key) {
  std::vector<double> parts;
  std::stringstream in(key);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw LoadError("bad statistic key '" + key + "'");
    } catch (const std::logic_error&) {
      throw LoadError("bad statistic key '" + key + "'");
    }
  }
  return Eigen::Map<Eigen::VectorXd>(parts.data(), static_cast<Eigen::Index>(parts.size()));
}

}  // namespace

Json estimator_to_json_by_statistic(const DistributionEstimator& est, const ExponentialFamily& fam) {
  const LevelSets levels = level_sets(sum_statistic(est.domain(), fam.statistic()));
  Json j;
  j["n"] = est.n();
  j["space"] = est.space()->labels();
  j["key"] = "statistic";
  Json values = Json::object();
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const std::size_t v = est.assignment()[levels.members[l].front()];
    for (std::size_t x : levels.members[l])
      if (est.assignment()[x] != v && kl_divergence(est.at(x), est.values()[v]) != 0.0)
        throw StructuralError("estimator is not constant on canonical level sets");
    values[statistic_key(levels.values[l])] = to_json(est.values()[v]);
  }
  j["values"] = std::move(values);
  return j;
}

DistributionEstimator estimator_from_json(const Json& j, const ExponentialFamily& fam) {
  if (!j.is_object()) throw LoadError("estimator must be a JSON object");
  if (!j.contains("n") || !j.at("n").is_number_integer()) throw LoadError("estimator needs an integer 'n'");
  if (labels_from(j, "space") != fam.space()->labels()) throw LoadError("estimator space does not match the family");
  if (!j.contains("values") || !j.at("values").is_object()) throw LoadError("estimator needs an object 'values'");
  const std::string key = j.value("key", std::string("outcome"));
  IIDSpace domain(fam.space(), j.at("n").get<int>());
  const Json& values = j.at("values");
  if (key == "outcome") {
    std::vector<Distribution> per_outcome;
    per_outcome.reserve(domain.size());
    for (std::size_t x = 0; x < domain.size(); ++x) {
      const auto name = std::to_string(x);
      if (!values.contains(name)) throw LoadError("estimator has no value for outcome " + name);
      per_outcome.push_back(distribution_from_json(values.at(name), fam.space()));
    }
    if (values.size() != domain.size()) throw LoadError("estimator has values for unknown outcomes");
    return DistributionEstimator::per_outcome(std::move(domain), std::move(per_outcome));
  }
  if (key == "statistic") {
    const LevelSets levels = level_sets(sum_statistic(domain, fam.statistic()));
    std::vector<std::optional<Distribution>> slots(levels.size());
    for (auto it = values.begin(); it != values.end(); ++it) {
      const auto level = levels.find(parse_statistic_key(it.key()));
      if (!level) throw LoadError("statistic value '" + it.key() + "' is not realizable");
      slots[*level] = distribution_from_json(it.value(), fam.space());
    }
    std::vector<Distribution> per_level;
    for (std::size_t l = 0; l < slots.size(); ++l) {
      if (!slots[l]) throw LoadError("estimator has no value for statistic " + statistic_key(levels.values[l]));
      per_level.push_back(std::move(*slots[l]));
    }
    return DistributionEstimator::on_level_sets(std::move(domain), levels, std::move(per_level));
  }
  throw LoadError("estimator 'key' must be \"outcome\" or \"statistic\"");
}

Json risk_report_to_json(const RiskReport& report) {
  Json j;
  j["kl_mean"] = to_json(report.kl_mean);
  j["kl_variance"] = report.kl_variance;
  j["dist_mean"] = to_json(report.dist_mean);
  j["dist_variance"] = report.dist_variance;
  j["delta"] = report.delta;
  j["pythagorean_residual"] = report.pythagorean_residual;
  j["kl_residual"] = report.kl_residual;
  j["expected_divergence"] = report.expected_divergence;
  return j;
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw LoadError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw LoadError("'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace klrisk
