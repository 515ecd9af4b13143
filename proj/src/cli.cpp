#include "klrisk/cli.hpp"

#include <array>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "klrisk/estimation.hpp"
#include "klrisk/serialization.hpp"
#include "klrisk/verify.hpp"

namespace klrisk {

namespace {

constexpr double kMarginTolerance = 1e-10;

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(item);
  return out;
}

double parse_number(const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw UsageError("not a number: '" + text + "'");
}

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string csv_row(const std::vector<std::string>& cells) {
  std::string row;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) row += ',';
    row += cells[i];
  }
  return row + '\n';
}

std::string num(double v) { return format_double(v); }

std::string vector_cell(const Eigen::VectorXd& v) {
  std::string s;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ':';
    s += num(v(i));
  }
  return s;
}

void require_format(const RunConfig& config) {
  if (config.format != "json" && config.format != "csv") throw UsageError("--format must be json or csv");
}

Model require_model(const RunConfig& config) {
  if (config.family.empty()) throw UsageError("--family is required");
  return load_model(config.family);
}

// Reads (y1, y2, y3) back from a trinomial-support label.
std::array<double, 3> triple_from_label(const std::string& label) {
  const auto parts = split(label, ',');
  if (parts.size() != 3) throw UsageError("expected a count triple label, got '" + label + "'");
  return {parse_number(parts[0]), parse_number(parts[1]), parse_number(parts[2])};
}

}  // namespace

// ---------------------------------------------------------------------------

Model load_model(const std::string& family) {
  const bool looks_like_file =
      family.size() > 5 && family.compare(family.size() - 5, 5, ".json") == 0;
  if (looks_like_file || std::filesystem::exists(family)) {
    return Model{family, family_from_json(read_json_file(family)), std::nullopt};
  }
  try {
    const FamilySpec spec = FamilySpec::parse(family);
    return Model{spec.name(), spec.build(), spec};
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

std::vector<Eigen::VectorXd> parse_grid(const std::string& text) {
  std::vector<Eigen::VectorXd> grid;
  for (const auto& entry : split(text, ',')) {
    if (entry.empty()) continue;
    const auto parts = split(entry, ':');
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_number(parts[i]);
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("empty parameter grid");
  return grid;
}

std::vector<Eigen::VectorXd> resolve_generators(const Model& model, const RunConfig& config) {
  std::vector<Eigen::VectorXd> natural;
  const auto from_conventional = [&](const std::string& text) {
    if (!model.spec) throw UsageError("--theta/--lambda need a catalog family; use --grid for natural parameters");
    for (const auto& c : parse_grid(text)) {
      try {
        natural.push_back(model.spec->natural_from_conventional(c));
      } catch (const DomainError& e) {
        throw UsageError(e.what());
      }
    }
  };
  if (config.grid) {
    natural = parse_grid(*config.grid);
    for (const auto& t : natural)
      if (t.size() != model.family.dimension()) throw UsageError("--grid entries must match the family dimension");
  } else if (config.lambda) {
    if (!model.spec || model.spec->kind != FamilyKind::poisson_truncated) throw UsageError("--lambda applies to poisson families");
    from_conventional(*config.lambda);
  } else if (config.theta) {
    if (model.spec && model.spec->kind == FamilyKind::poisson_truncated) throw UsageError("use --lambda for poisson families");
    from_conventional(*config.theta);
  } else if (model.spec) {
    for (const auto& c : model.spec->default_grid()) natural.push_back(model.spec->natural_from_conventional(c));
  } else {
    natural = natural_grid(model.family, 9);
  }
  return natural;
}

// ---------------------------------------------------------------------------
// verify

CommandResult cmd_verify(const RunConfig& config) {
  require_format(config);
  const Model model = require_model(config);
  VerifyOptions options;
  options.n = config.n;
  options.seed = config.seed;
  options.random_estimators = config.k.value_or(20);
  options.generators = resolve_generators(model, config);
  options.members = options.generators;
  const VerifyReport report = verify_family(model.family, options);

  CommandResult result;
  result.exit_code = report.pass() ? kExitOk : kExitFailed;
  if (config.format == "csv") {
    result.output = csv_row({"check", "max_residual", "tolerance", "pass"});
    for (const auto& c : report.checks)
      result.output += csv_row({c.name, num(c.max_residual), num(c.tolerance), c.pass ? "true" : "false"});
    return result;
  }
  Json j;
  j["command"] = "verify";
  j["family"] = model.name;
  j["n"] = config.n;
  j["seed"] = config.seed;
  j["random_estimators"] = options.random_estimators;
  Json checks = Json::array();
  for (const auto& c : report.checks) {
    Json row;
    row["name"] = c.name;
    row["max_residual"] = c.max_residual;
    row["tolerance"] = c.tolerance;
    row["pass"] = c.pass;
    checks.push_back(std::move(row));
  }
  j["checks"] = std::move(checks);
  j["pass"] = report.pass();
  result.output = dump_json(j);
  return result;
}

// ---------------------------------------------------------------------------
// mle

CommandResult cmd_mle(const RunConfig& config) {
  require_format(config);
  const Model model = require_model(config);
  const ExponentialFamily& fam = model.family;
  if (config.data.empty()) throw UsageError("--data is required (sample points separated by ';')");
  const auto points = split(config.data, ';');
  Eigen::VectorXd t = Eigen::VectorXd::Zero(fam.dimension());
  for (const auto& label : points) {
    const auto index = fam.space()->index_of(label);
    if (!index) throw UsageError("'" + label + "' is not a point of the sample space of " + model.name);
    t += fam.statistic().value(*index);
  }
  const int n = static_cast<int>(points.size());
  const Eigen::VectorXd mean = t / static_cast<double>(n);
  const Distribution fit = extended_mle(fam, t, n);
  const HullPosition pos = hull_position(fam, mean);

  Json j;
  j["command"] = "mle";
  j["family"] = model.name;
  j["n"] = n;
  j["statistic"] = vector_json(t);
  j["mean"] = vector_json(mean);
  j["boundary"] = !pos.interior();
  if (pos.interior()) {
    j["theta"] = vector_json(natural_from_mean(fam, mean).theta);
  } else if (fam.dimension() == 1) {
    const double lo = fam.statistic().values().col(0).minCoeff();
    j["theta"] = vector_json(Eigen::VectorXd::Constant(1, std::abs(mean(0) - lo) <= kBoundaryTolerance ? -kInf : kInf));
  } else {
    j["theta"] = nullptr;
  }
  if (model.spec) {
    const FamilySpec& spec = *model.spec;
    double prob = std::nan("");
    switch (spec.kind) {
      case FamilyKind::binomial: prob = mean(0) / spec.size; break;
      case FamilyKind::hardy_weinberg: prob = mean(0) / (2.0 * spec.size); break;
      case FamilyKind::poisson_truncated: j["lambda"] = mean(0); break;
      case FamilyKind::trinomial: {
        Eigen::VectorXd pi(3);
        pi << mean(0) / spec.size, mean(1) / spec.size, 1.0 - (mean(0) + mean(1)) / spec.size;
        j["pi"] = vector_json(pi);
        break;
      }
    }
    if (!std::isnan(prob)) {
      const double odds = prob >= 1.0 ? kInf : prob / (1.0 - prob);
      j["prob"] = prob;
      j["odds"] = odds;
      j["log_odds"] = prob <= 0.0 ? -kInf : std::log(odds);
    }
  }
  j["pmf"] = to_json(fit);

  CommandResult result;
  if (config.format == "csv") {
    result.output = csv_row({"point", "prob"});
    for (std::size_t i = 0; i < fit.size(); ++i) result.output += csv_row({fam.space()->label(i), num(fit.prob(i))});
  } else {
    result.output = dump_json(j);
  }
  return result;
}

// ---------------------------------------------------------------------------
// project

CommandResult cmd_project(const RunConfig& config) {
  require_format(config);
  const Model model = require_model(config);
  if (config.input.empty()) throw UsageError("--input is required (distribution JSON file)");
  const Distribution r = distribution_from_json(read_json_file(config.input), model.family.space());
  const Eigen::VectorXd mean = mean_of_statistic(r, model.family.statistic());
  const HullPosition pos = hull_position(model.family, mean);
  const Distribution projected = extended_project(model.family, r);

  CommandResult result;
  if (config.format == "csv") {
    result.output = csv_row({"point", "prob"});
    for (std::size_t i = 0; i < projected.size(); ++i)
      result.output += csv_row({model.family.space()->label(i), num(projected.prob(i))});
    return result;
  }
  Json j;
  j["command"] = "project";
  j["family"] = model.name;
  j["mean"] = vector_json(mean);
  j["boundary"] = !pos.interior();
  j["divergence"] = kl_divergence(r, projected);
  j["projection"] = to_json(projected);
  result.output = dump_json(j);
  return result;
}

// ---------------------------------------------------------------------------
// risk

CommandResult cmd_risk(const RunConfig& config) {
  require_format(config);
  const Model model = require_model(config);
  const ExponentialFamily& fam = model.family;
  const DistributionEstimator est = config.estimator.empty()
                                        ? mle_estimator(fam, config.n)
                                        : estimator_from_json(read_json_file(config.estimator), fam);
  const auto generators = resolve_generators(model, config);
  std::vector<Distribution> members;
  for (const auto& theta : generators) members.push_back(member_from_natural(fam, theta));

  CommandResult result;
  Json reports = Json::array();
  std::string csv = csv_row({"generator", "member", "kl_variance", "dist_variance", "bias", "expected_divergence",
                             "delta", "kl_residual", "pythagorean_residual"});
  for (std::size_t g = 0; g < generators.size(); ++g) {
    const Distribution& r0 = members[g];
    Json entry;
    entry["generator"] = vector_json(generators[g]);
    Json per_member = Json::array();
    for (std::size_t m = 0; m < members.size(); ++m) {
      const RiskReport rep = risk_report(est, fam, r0, members[m]);
      if (m == 0) {
        entry["kl_mean"] = to_json(rep.kl_mean);
        entry["kl_variance"] = rep.kl_variance;
        entry["dist_mean"] = to_json(rep.dist_mean);
        entry["dist_variance"] = rep.dist_variance;
        entry["bias"] = kl_divergence(rep.dist_mean, r0);
      }
      Json row;
      row["member"] = vector_json(generators[m]);
      row["expected_divergence"] = rep.expected_divergence;
      row["delta"] = rep.delta;
      row["kl_residual"] = rep.kl_residual;
      row["pythagorean_residual"] = rep.pythagorean_residual;
      csv += csv_row({vector_cell(generators[g]), vector_cell(generators[m]), num(rep.kl_variance),
                      num(rep.dist_variance), num(kl_divergence(rep.dist_mean, r0)), num(rep.expected_divergence),
                      num(rep.delta), num(rep.kl_residual), num(rep.pythagorean_residual)});
      per_member.push_back(std::move(row));
    }
    entry["members"] = std::move(per_member);
    reports.push_back(std::move(entry));
  }
  if (config.format == "csv") {
    result.output = csv;
    return result;
  }
  Json j;
  j["command"] = "risk";
  j["family"] = model.name;
  j["n"] = est.n();
  j["estimator"] = config.estimator.empty() ? "mle" : config.estimator;
  j["reports"] = std::move(reports);
  result.output = dump_json(j);
  return result;
}

// ---------------------------------------------------------------------------
// hw-figure

CommandResult cmd_hw_figure(const RunConfig& config) {
  const RunConfig cfg = [&] {
    RunConfig c = config;
    if (c.family.empty()) c.family = "hw:6";
    return c;
  }();
  require_format(cfg);
  const Model model = load_model(cfg.family);
  if (!model.spec || model.spec->kind != FamilyKind::hardy_weinberg) throw UsageError("hw-figure needs an hw:<n> family");
  const ExponentialFamily& fam = model.family;
  const double total = model.spec->size;

  std::vector<double> thetas;
  if (cfg.theta) {
    for (const auto& v : parse_grid(*cfg.theta)) thetas.push_back(v(0));
  } else {
    for (int i = 1; i <= 9; ++i) thetas.push_back(i / 10.0);
  }
  std::vector<std::array<double, 3>> counts;
  for (const auto& label : fam.space()->labels()) counts.push_back(triple_from_label(label));

  const DistributionEstimator mle = mle_estimator(fam, cfg.n);
  const std::vector<std::string> header{"theta",      "model_pi1",  "model_pi2",  "model_pi3",
                                        "klmean_pi1", "klmean_pi2", "klmean_pi3", "kl_mean_to_dist_mean",
                                        "dist_mean_to_model"};
  std::string csv = csv_row(header);
  Json rows = Json::array();
  for (double theta : thetas) {
    if (!(theta > 0.0 && theta < 1.0)) throw UsageError("hw-figure grid must lie in (0, 1)");
    const Distribution model_point = member_from_natural(fam, model.spec->natural_from_conventional(Eigen::VectorXd::Constant(1, theta)));
    const Distribution e = kl_mean(mle, model_point);
    const Distribution ed = extended_project(fam, e);
    std::array<double, 3> kl_pi{0.0, 0.0, 0.0};
    for (int c = 0; c < 3; ++c) {
      Eigen::VectorXd terms(static_cast<Eigen::Index>(counts.size()));
      for (std::size_t i = 0; i < counts.size(); ++i) terms(static_cast<Eigen::Index>(i)) = e.prob(i) * counts[i][static_cast<std::size_t>(c)];
      kl_pi[static_cast<std::size_t>(c)] = pairwise_sum(terms) / total;
    }
    const std::vector<double> values{theta,
                                     theta * theta,
                                     2.0 * theta * (1.0 - theta),
                                     (1.0 - theta) * (1.0 - theta),
                                     kl_pi[0],
                                     kl_pi[1],
                                     kl_pi[2],
                                     kl_divergence(e, ed),
                                     kl_divergence(ed, model_point)};
    std::vector<std::string> cells;
    Json row;
    for (std::size_t i = 0; i < values.size(); ++i) {
      cells.push_back(num(values[i]));
      row[header[i]] = values[i];
    }
    csv += csv_row(cells);
    rows.push_back(std::move(row));
  }
  CommandResult result;
  if (cfg.format == "csv") {
    result.output = csv;
  } else {
    Json j;
    j["command"] = "hw-figure";
    j["family"] = model.name;
    j["n"] = cfg.n;
    j["rows"] = std::move(rows);
    result.output = dump_json(j);
  }
  return result;
}

// ---------------------------------------------------------------------------
// compete

CommandResult cmd_compete(const RunConfig& config) {
  require_format(config);
  const Model model = require_model(config);
  const ExponentialFamily& fam = model.family;
  const int count = config.k.value_or(100);
  if (count < 1) throw UsageError("--k must be positive");
  if (!(config.epsilon >= 0.0 && config.epsilon < 1.0)) throw UsageError("--epsilon must lie in [0, 1)");
  const auto generators = resolve_generators(model, config);

  const DistributionEstimator mle = mle_estimator(fam, config.n);
  std::vector<Distribution> gens;
  std::vector<double> vd_mle;
  for (const auto& theta : generators) {
    gens.push_back(member_from_natural(fam, theta));
    vd_mle.push_back(distribution_variance(mle, fam, gens.back()));
  }

  double min_margin = kInf;
  int strict_wins = 0;
  bool all_unbiased = true;
  Json rows = Json::array();
  std::string csv = csv_row({"competitor", "seed", "generator", "unbiased_residual", "unbiased", "vd_competitor",
                             "vd_mle", "margin"});
  for (int c = 0; c < count; ++c) {
    const std::uint64_t seed = splitmix64(config.seed ^ splitmix64(static_cast<std::uint64_t>(c)));
    const DistributionEstimator comp = make_mean_matched_competitor(fam, config.n, config.epsilon, seed);
    const UnbiasednessReport unbiased = check_distribution_unbiased(comp, fam, generators);
    all_unbiased = all_unbiased && unbiased.pass;
    double comp_min_margin = kInf;
    Json per_gen = Json::array();
    for (std::size_t g = 0; g < gens.size(); ++g) {
      const auto& entry = unbiased.entries[g];
      const double vd = distribution_variance(comp, fam, gens[g]);
      const double margin = vd - vd_mle[g];
      const double residual = std::max(entry.divergence, entry.level_residual);
      comp_min_margin = std::min(comp_min_margin, margin);
      Json row;
      row["generator"] = vector_json(generators[g]);
      row["unbiased_residual"] = residual;
      row["level_residual_total"] = entry.level_residual_total;
      row["unbiased"] = entry.pass;
      row["vd_competitor"] = vd;
      row["vd_mle"] = vd_mle[g];
      row["margin"] = margin;
      per_gen.push_back(std::move(row));
      csv += csv_row({std::to_string(c), std::to_string(seed), vector_cell(generators[g]), num(residual),
                      entry.pass ? "true" : "false", num(vd), num(vd_mle[g]), num(margin)});
    }
    min_margin = std::min(min_margin, comp_min_margin);
    if (comp_min_margin > 0.0) ++strict_wins;
    Json row;
    row["competitor"] = c;
    row["seed"] = seed;
    row["min_margin"] = comp_min_margin;
    row["generators"] = std::move(per_gen);
    rows.push_back(std::move(row));
  }
  const bool pass = all_unbiased && min_margin >= -kMarginTolerance;

  CommandResult result;
  result.exit_code = pass ? kExitOk : kExitFailed;
  if (config.format == "csv") {
    result.output = csv;
    return result;
  }
  Json j;
  j["command"] = "compete";
  j["family"] = model.name;
  j["n"] = config.n;
  j["k"] = count;
  j["epsilon"] = config.epsilon;
  j["seed"] = config.seed;
  j["competitors"] = std::move(rows);
  Json summary;
  summary["min_margin"] = min_margin;
  summary["margin_tolerance"] = kMarginTolerance;
  summary["strict_wins"] = strict_wins;
  summary["all_unbiased"] = all_unbiased;
  summary["pass"] = pass;
  j["summary"] = std::move(summary);
  result.output = dump_json(j);
  return result;
}

// ---------------------------------------------------------------------------

CommandResult run_command(const RunConfig& config) {
  try {
    if (config.command == "verify") return cmd_verify(config);
    if (config.command == "mle") return cmd_mle(config);
    if (config.command == "project") return cmd_project(config);
    if (config.command == "risk") return cmd_risk(config);
    if (config.command == "hw-figure") return cmd_hw_figure(config);
    if (config.command == "compete") return cmd_compete(config);
    throw UsageError("unknown command '" + config.command + "'");
  } catch (const UsageError& e) {
    return CommandResult{std::string("usage error: ") + e.what() + "\n", kExitUsage};
  } catch (const LoadError& e) {
    return CommandResult{std::string("load error: ") + e.what() + "\n", kExitUsage};
  } catch (const SizeError& e) {
    return CommandResult{std::string("size error: ") + e.what() + "\n", kExitUsage};
  } catch (const DomainError& e) {
    return CommandResult{std::string("error: ") + e.what() + "\n", kExitUsage};
  }
}

}  // namespace klrisk
