#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "pfol/core.hpp"

namespace pfol {

/// SplitMix64: state += 0x9E3779B97F4A7C15, then two xor-shift-multiply
/// rounds with 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform on (0, 1): the top 53 bits, offset by half a step.
  double uniform() { return (double(next() >> 11) + 0.5) * 0x1.0p-53; }

  double rademacher() { return (next() >> 63) ? 1.0 : -1.0; }

  /// Box-Muller; the second variate is discarded so each call consumes two draws.
  double normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

enum class SequenceKind { kConstant, kRademacher, kGaussian, kPareto, kScaleJump };

SequenceKind parse_sequence_kind(const std::string& name);
const char* to_string(SequenceKind kind);

struct SequenceGenSpec {
  SequenceKind kind = SequenceKind::kRademacher;
  double scale = 1.0;         // G
  double tail_alpha = 1.5;    // pareto shape
  double jump_factor = 10.0;  // second-half multiple for scale_jump
  std::uint64_t seed = 0;

  void validate() const;
};

/// Deterministic scalar sequence of length T.
std::vector<double> gen_sequence(const SequenceGenSpec& spec, std::int64_t rounds);

/// T vectors in R^d, coordinates drawn i.i.d. from one stream.
std::vector<Vector<double>> gen_vector_sequence(const SequenceGenSpec& spec, std::int64_t rounds, Eigen::Index dim);

/// gamma-scaled conjugate pieces: psi*_gamma(theta) = gamma psi*(theta / gamma).
inline double psi_star_gamma(const RegularizerSpec& psi, double gamma, double theta) {
  return gamma * psi_conjugate(psi, theta / gamma);
}

inline double psi_star_gamma_grad(const RegularizerSpec& psi, double gamma, double theta) {
  return psi_conjugate_grad(psi, theta / gamma);
}

struct AdversaryConfig {
  double h1 = 1.0;
  double gamma = 1.0;
  double eps = 1.0;
  RegularizerSpec psi;

  void validate() const;
};

/// Plays h1 until the learner dips below -2 eps - grad psi*_gamma(2 h1 (t-1)),
/// then answers once with -2 (t-1) h1 and zero forever after.
class Adversary {
 public:
  explicit Adversary(AdversaryConfig config);

  double threshold(std::int64_t t) const;
  double adversary_next(double w);

  const AdversaryConfig& config() const { return config_; }
  bool triggered() const { return tau_.has_value(); }
  /// Number of rounds played at h1 before the trigger.
  std::optional<std::int64_t> tau() const { return tau_; }
  std::int64_t round() const { return t_; }

 private:
  AdversaryConfig config_;
  std::optional<std::int64_t> tau_;
  std::int64_t t_ = 0;
};

struct LowerBoundCertificate {
  double w_star = 0.0;
  double big_g = 0.0;
  double claimed_bound = 0.0;
  bool triggered = false;
  std::string validity = "guaranteed only for sufficiently large T; T0 unknown";
};

LowerBoundCertificate lower_bound_certificate(const Adversary& adversary, std::int64_t rounds);

/// eps G + (gamma/8) psi*(G/gamma) + (gamma/4) psi(w) + (G|w|/4) sqrt(T ln(1 + G|w| sqrt(T)/(h1 eps))).
double certificate_bound(const AdversaryConfig& config, double big_g, double w_star, std::int64_t rounds);

/// Right side of the pre-trigger inequality sum_{t<=tau} w_t g_t >= -2 eps tau h1 - psi*_gamma(2 tau h1)/2.
double never_triggered_floor(const AdversaryConfig& config, std::int64_t tau);

}  // namespace pfol
