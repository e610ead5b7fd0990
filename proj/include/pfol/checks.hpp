#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pfol/config.hpp"

namespace pfol {

/// Outcome of one property check. worst is the largest observed
/// value/limit ratio (or the check-specific statistic named in detail).
struct CheckResult {
  bool pass = true;
  double worst = 0.0;
  std::int64_t samples = 0;
  std::string detail;
  bool ratio_kind = false;  // set by bound(); require() counts failures in worst

  /// Records value <= limit, tracking the worst ratio.
  void bound(double value, double limit, double rel_slack = 0.0);
  void require(bool ok);
};

// Base learner: pathwise regret bound and alpha-weighted sum over seeded
// rademacher / gaussian / scale-jump sequences.
struct BaseChecks {
  CheckResult regret_bound;
  CheckResult alpha_sum;
  CheckResult oddness;
};
BaseChecks check_base(int seeds, std::int64_t rounds, double p, double alpha_scale = 1.0);

struct EpigraphChecks {
  CheckResult feasibility;
  CheckResult dual_norm;
  CheckResult negdelta;
  CheckResult deltamag;
  CheckResult composite_regret;
};
EpigraphChecks check_epigraph_runs(int seeds, std::int64_t rounds);

struct ProjectionChecks {
  CheckResult closed_form_agreement;
  CheckResult fallback_exact;
  CheckResult dominance;
};
ProjectionChecks check_projection(int instances, int grid_points);

struct ScheduleChecks {
  CheckResult a_sum;
  CheckResult a_zero_without_clipping;
  CheckResult penalty_sum;
  CheckResult ratio_sum;
  CheckResult scale_covariance;
};
ScheduleChecks check_schedule(int seeds, std::int64_t rounds);

CheckResult check_direction(const std::vector<int>& dims, int seeds, std::int64_t rounds);

struct SublinearityProbe {
  double mean_of_ratios = 0.0;
  double ratio_of_means = 0.0;
  double median_ratio = 0.0;
  double max_learner_term = 0.0;  // max over seeds of |sum g_t w_t| at 2T
  std::vector<double> ratios;
};
/// Unconstrained learner at its default configuration on i.i.d. +-1
/// gradients; regret(2T) / regret(T) against a fixed comparator.
SublinearityProbe sublinearity_probe(int seeds, std::int64_t rounds, double comparator);

struct FullMatrixChecks {
  CheckResult lambert;
  CheckResult x_bound;
  CheckResult monotonicity;
  CheckResult regret_bound;
};
FullMatrixChecks check_full_matrix(int runs, std::int64_t rounds);

struct AdversaryChecks {
  CheckResult replay;
  CheckResult never;
  CheckResult certificate_values;
  CheckResult certificate_nonnegative;
};
AdversaryChecks check_adversary(std::int64_t rounds);

struct BatchChecks {
  double improvement = 0.0;  // mean suboptimality at the first checkpoint over the last
  CheckResult decay;
  CheckResult zero_noise;
};
BatchChecks check_batch(int seeds, std::int64_t early, std::int64_t late, double min_factor);

/// Runs the same config twice and compares the CSV bytes.
CheckResult check_determinism(const ExperimentConfig& config);

/// Every report regret equals regret_against on the re-read trace.
CheckResult check_report_consistency(const ExperimentConfig& config);

}  // namespace pfol
