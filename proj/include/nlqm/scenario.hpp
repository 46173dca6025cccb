#pragma once

// Declarative experiment runner behind the command-line tool.
//
// A config file holds one scenario object or {"scenarios": [...]}. A scenario:
//   {"name": "...", "experiment": "<one of experiment_names()>",
//    "params": {...}, "integrator": {"dt": ..., "t_end": ...},
//    "outputs": ["series", ...]}
// Complex scalars are written as [re, im]. Unknown fields are rejected.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace nlqm {

enum class Experiment {
  eigen_census,
  diagonal_census,
  eigenfrequency,
  probability_inconsistency,
  gisin_telegraph,
  mobility_telegraph,
  no_signaling,
  reduced_flow_variants,
  atom_inversion,
  bloch_neoclassical,
  intention_paradox,
};

const std::vector<std::string>& experiment_names();
std::string experiment_name(Experiment e);
std::optional<Experiment> parse_experiment(const std::string& name);

struct Integrator {
  double dt = 0;
  double t_end = 0;
};

struct Scenario {
  std::string name;
  Experiment experiment;
  nlohmann::json params;  ///< validated, with defaults filled in
  std::optional<Integrator> integrator;
  std::vector<std::string> outputs;  ///< empty selects every series
};

/// Parses config text; throws ConfigError with "line L, column C" for syntax
/// errors and the dotted field path for schema violations.
std::vector<Scenario> parse_scenarios(const std::string& text);
std::vector<Scenario> load_scenarios(const std::filesystem::path& path);

enum class Status { pass, fail, error };
std::string status_name(Status s);

struct RunReport {
  std::string scenario;
  std::string experiment;
  Status status = Status::error;
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> series;  ///< series name -> path relative to the output dir
  std::vector<std::string> failures;          ///< failed checks, or the error message
};

/// Runs one scenario and writes its CSV files under out_dir/<scenario name>/.
/// Never throws for runtime failures: they come back as Status::error.
RunReport run_scenario(const Scenario& scenario, const std::filesystem::path& out_dir);

/// Runs scenarios concurrently; reports come back in input order.
std::vector<RunReport> run_scenarios(const std::vector<Scenario>& scenarios, const std::filesystem::path& out_dir);

nlohmann::json report_json(const std::vector<RunReport>& reports);

/// 0 when every scenario passed, 2 if any errored, 1 otherwise.
int exit_code(const std::vector<RunReport>& reports);

}  // namespace nlqm
