#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfol/adversary.hpp"
#include "pfol/config.hpp"
#include "pfol/core.hpp"

namespace pfol {

struct ExperimentResult {
  Trace trace;
  std::vector<RegretReport> reports;
  std::optional<LowerBoundCertificate> certificate;
  bool all_pass = true;
};

/// Runs the protocol loop for the configured learner and sequence source.
ExperimentResult run_experiment(const ExperimentConfig& config);

nlohmann::json report_json(const ExperimentConfig& config, const ExperimentResult& result);

/// Writes the trace CSV and JSON report under out_dir.
void write_outputs(const ExperimentConfig& config, const ExperimentResult& result, const std::string& out_dir);

/// Nature's hints h_t = max(h1, max_{i<=t} ||g_i||).
std::vector<double> nature_hints(const std::vector<Vector<double>>& g, double h1);

}  // namespace pfol
