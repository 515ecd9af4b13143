#pragma once

// Command implementations behind the klrisk executable. Each command returns
// its full output text and exit status so it can be driven from tests.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "klrisk/expfam.hpp"
#include "klrisk/families.hpp"

namespace klrisk {

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailed = 1;
inline constexpr int kExitUsage = 2;

struct RunConfig {
  std::string command;
  std::string family;
  std::optional<std::string> theta;   // conventional generators (probability, or pi1:pi2)
  std::optional<std::string> lambda;  // Poisson generators
  std::optional<std::string> grid;    // natural-parameter generators
  int n = 1;
  std::uint64_t seed = 1;
  double epsilon = 0.5;
  std::optional<int> k;
  std::string format = "json";
  std::string data;       // mle: sample points separated by ';'
  std::string input;      // project: distribution JSON file
  std::string estimator;  // risk: estimator JSON file (default: the MLE)
};

struct CommandResult {
  std::string output;
  int exit_code = kExitOk;
};

/// A family resolved from a catalog name or a family spec JSON file.
struct Model {
  std::string name;
  ExponentialFamily family;
  std::optional<FamilySpec> spec;
};

Model load_model(const std::string& family);

/// "a,b,c" or, for two-dimensional entries, "a:b,c:d".
std::vector<Eigen::VectorXd> parse_grid(const std::string& text);

/// Natural parameters selected by --theta / --lambda / --grid, else the
/// family's default grid.
std::vector<Eigen::VectorXd> resolve_generators(const Model& model, const RunConfig& config);

/// Dispatches on config.command. Usage and load errors become exit status 2
/// with the message as output.
CommandResult run_command(const RunConfig& config);

CommandResult cmd_verify(const RunConfig& config);
CommandResult cmd_mle(const RunConfig& config);
CommandResult cmd_project(const RunConfig& config);
CommandResult cmd_risk(const RunConfig& config);
CommandResult cmd_hw_figure(const RunConfig& config);
CommandResult cmd_compete(const RunConfig& config);

}  // namespace klrisk
