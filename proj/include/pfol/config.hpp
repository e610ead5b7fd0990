#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfol/adversary.hpp"

namespace pfol {

enum class Algorithm { kBase, kEpigraph, kUnconstrained1d, kUnconstrainedNd, kFullMatrix };

Algorithm parse_algorithm(const std::string& name);
const char* to_string(Algorithm algo);

enum class Source { kSequence, kAdversary };

struct BatchSpec {
  double w_star = 3.0;
  double noise = 0.5;
};

struct ExperimentConfig {
  Algorithm algorithm = Algorithm::kUnconstrained1d;
  int dim = 1;
  std::int64_t rounds = 1000;
  double eps = 1.0;
  std::optional<double> eps_psi;
  double gamma = 1.0;
  double q = 1.0;
  bool psi_scaled = false;
  double p = 0.5;
  double h1 = 1.0;
  double sigma = 1.0;
  double radius = 1.0;
  double mu = 1.0;
  Source source = Source::kSequence;
  SequenceGenSpec sequence;
  std::vector<double> comparators;  // empty: default grid scaled by h1
  std::string trace_file = "trace.csv";
  std::string report_file = "report.json";
  std::uint64_t seed = 0;
  BatchSpec batch;

  RegularizerSpec psi() const { return {q, psi_scaled}; }
  std::vector<double> comparator_grid() const;
  void validate() const;
};

/// Fields settable from the command line.
struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> rounds;
  std::optional<std::string> algorithm;
  std::optional<double> p, q, gamma, eps, h1;
};

/// Parses and validates; unknown keys are rejected.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
void apply_overrides(ExperimentConfig& config, const ConfigOverrides& overrides);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace pfol
