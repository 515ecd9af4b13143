#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "klrisk/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Exact KL risk decompositions for estimators over finite sample spaces."};
  app.require_subcommand(1);

  klrisk::RunConfig config;
  std::string out;
  std::string theta, lambda, grid;
  int k = 0;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--family", config.family, "binomial:<n>, poisson:<x_max>, trinomial:<n>, hw:<n> or a family JSON file");
    cmd->add_option("--out", out, "write output here instead of stdout");
    cmd->add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  };
  const auto add_generators = [&](CLI::App* cmd) {
    cmd->add_option("--theta", theta, "conventional parameters, comma separated (pi1:pi2 for trinomial)");
    cmd->add_option("--lambda", lambda, "Poisson means, comma separated");
    cmd->add_option("--grid", grid, "natural parameters, comma separated (a:b for two dimensions)");
  };

  auto* verify = app.add_subcommand("verify", "check the risk identities by enumeration");
  add_common(verify);
  add_generators(verify);
  verify->add_option("--n", config.n, "sample size");
  verify->add_option("--seed", config.seed, "seed for the random estimators");
  verify->add_option("--k", k, "number of random estimators");

  auto* mle = app.add_subcommand("mle", "extended maximum likelihood fit of one sample");
  add_common(mle);
  mle->add_option("--data", config.data, "sample points separated by ';'")->required();

  auto* project = app.add_subcommand("project", "KL projection of a distribution onto the family");
  add_common(project);
  project->add_option("--input", config.input, "distribution JSON file")->required();

  auto* risk = app.add_subcommand("risk", "KL and distribution risk of an estimator");
  add_common(risk);
  add_generators(risk);
  risk->add_option("--n", config.n, "sample size");
  risk->add_option("--estimator", config.estimator, "estimator JSON file (default: the MLE)");

  auto* hw = app.add_subcommand("hw-figure", "Hardy-Weinberg KL mean against the model curve");
  add_common(hw);
  hw->add_option("--theta", theta, "allele probabilities, comma separated");
  hw->add_option("--n", config.n, "sample size");
  config.format = "json";

  auto* compete = app.add_subcommand("compete", "mean-matched competitors against the MLE");
  add_common(compete);
  add_generators(compete);
  compete->add_option("--n", config.n, "sample size");
  compete->add_option("--seed", config.seed, "master seed");
  compete->add_option("--epsilon", config.epsilon, "mixing weight of the random part");
  compete->add_option("--k", k, "number of competitors");

  CLI11_PARSE(app, argc, argv);

  CLI::App* chosen = app.get_subcommands().front();
  config.command = chosen->get_name();
  if (config.command == "hw-figure" && chosen->count("--format") == 0) config.format = "csv";
  if (!theta.empty()) config.theta = theta;
  if (!lambda.empty()) config.lambda = lambda;
  if (!grid.empty()) config.grid = grid;
  if (chosen->get_option_no_throw("--k") && chosen->count("--k") > 0) config.k = k;

  const klrisk::CommandResult result = klrisk::run_command(config);
  if (result.exit_code == klrisk::kExitUsage) {
    std::cerr << result.output;
    return result.exit_code;
  }
  if (out.empty()) {
    std::cout << result.output;
  } else {
    std::ofstream file(out, std::ios::binary);
    if (!file) {
      std::cerr << "cannot write " << out << "\n";
      return klrisk::kExitUsage;
    }
    file << result.output;
  }
  return result.exit_code;
}
