#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "pfol/config.hpp"

namespace pfol {

struct BatchResult {
  std::string objective;
  std::vector<std::int64_t> checkpoints;
  std::vector<double> suboptimality;  // F(mean of w_1..w_T) - F(w_star) at each checkpoint
  std::uint64_t seed = 0;
};

/// Powers of ten up to T.
std::vector<std::int64_t> batch_checkpoints(std::int64_t rounds);

/// Runs the unconstrained learner on F(w) = ||w - w_star||^2 / 2 with
/// gradients (w_t - w_star) + noise, noise uniform on {+-noise} per coordinate.
BatchResult online_to_batch(const ExperimentConfig& config);

nlohmann::json to_json(const BatchResult& result);

}  // namespace pfol
