#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace pfol {

struct InvariantResult {
  std::string module;
  std::string name;
  bool pass = true;
  // 1 - worst value/limit for bound checks; minus the failure count otherwise.
  double margin = 0.0;
  std::string detail;
};

const std::vector<std::string>& module_names();

/// (module, invariant) pairs that verify_invariants promises to report.
std::vector<std::pair<std::string, std::string>> invariant_manifest();

/// Runs the invariant ledger for the given modules (all when nullopt). An
/// empty list yields an empty ledger. alpha_scale != 1 perturbs every base
/// learner step size, which must surface as failures.
std::vector<InvariantResult> verify_invariants(const std::optional<std::vector<std::string>>& modules,
                                               double alpha_scale = 1.0);

bool all_pass(const std::vector<InvariantResult>& ledger);

nlohmann::json to_json(const std::vector<InvariantResult>& ledger);

}  // namespace pfol
