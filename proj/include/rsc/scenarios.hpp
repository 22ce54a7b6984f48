#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "rsc/iag.hpp"

namespace rsc {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunOptions {
  std::uint64_t seed = 42;
  int workers = 0;  // 0 = hardware concurrency
  std::string out_dir = ".";
};

struct ScenarioResult {
  int exit_code = 0;  // 0 pass, 1 fail, 2 config error, 3 divergence
  std::vector<ConvergenceReport> reports;
};

// Strict JSON configs: unknown keys are errors. See list_scenarios() for the
// registered names and README for the schema.
ScenarioResult run_scenario_json(const std::string& config_text, const RunOptions& opt);
ScenarioResult run_scenario_file(const std::string& config_file, const RunOptions& opt);

std::vector<std::string> list_scenarios();

// Canonical configs shipped with the repo, keyed by scenario name.
std::map<std::string, std::string> builtin_configs();

}  // namespace rsc
