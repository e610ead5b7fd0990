#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pfol {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class ErrorCode {
  kInvalidHint,
  kContractViolation,
  kNumericOverflow,
  kNumericFailure,
  kShape,
  kDomain,
  kPrecondition,
  kBranchMismatch,
  kUnsupportedRegularizer,
  kConfig,
  kIo,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidHint: return "invalid-hint";
    case ErrorCode::kContractViolation: return "contract-violation";
    case ErrorCode::kNumericOverflow: return "numeric-overflow";
    case ErrorCode::kNumericFailure: return "numeric-failure";
    case ErrorCode::kShape: return "shape";
    case ErrorCode::kDomain: return "domain";
    case ErrorCode::kPrecondition: return "precondition";
    case ErrorCode::kBranchMismatch: return "branch-mismatch";
    case ErrorCode::kUnsupportedRegularizer: return "unsupported-regularizer";
    case ErrorCode::kConfig: return "config";
    case ErrorCode::kIo: return "io";
  }
  return "unknown";
}

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <typename Scalar>
Scalar sign(Scalar x) {
  return static_cast<Scalar>((Scalar(0) < x) - (x < Scalar(0)));
}

/// Saturate g into [-h, h], preserving sign.
template <typename Scalar>
Scalar clip(Scalar g, Scalar h) {
  if (!(h > Scalar(0))) throw Error(ErrorCode::kInvalidHint, "clip requires h > 0");
  if (std::abs(g) <= h) return g;
  return g > Scalar(0) ? h : -h;
}

/// Dual of the per-round pair norm ||(x, y)||^2 = h^2 x^2 + gamma^2 y^2.
template <typename Scalar>
Scalar dual_norm_pair(Scalar g, Scalar a, Scalar h, Scalar gamma) {
  if (!(h > Scalar(0)) || !(gamma > Scalar(0)))
    throw Error(ErrorCode::kPrecondition, "dual_norm_pair requires h > 0 and gamma > 0");
  return std::hypot(g / h, a / gamma);
}

template <typename Scalar>
Scalar weighted_norm(Scalar x, Scalar y, Scalar h, Scalar gamma) {
  return std::hypot(h * x, gamma * y);
}

// ---------------------------------------------------------------------------
// Power-family regularizers psi(x) = kappa |x|^{1+q}, kappa = 1 or 1/(1+q).

struct RegularizerSpec {
  double q = 1.0;
  bool scaled = false;

  static RegularizerSpec power(double q, bool scaled = false) {
    RegularizerSpec spec{q, scaled};
    spec.validate();
    return spec;
  }

  /// Exponents q <= 0 give a non-convex (or linear) psi.
  void validate() const {
    if (!(q > 0.0) || !std::isfinite(q))
      throw Error(ErrorCode::kUnsupportedRegularizer,
                  "power regularizer needs q > 0, got q = " + std::to_string(q));
  }

  double kappa() const { return scaled ? 1.0 / (1.0 + q) : 1.0; }
};

template <typename Scalar>
Scalar psi_value(const RegularizerSpec& spec, Scalar x) {
  return Scalar(spec.kappa()) * std::pow(std::abs(x), Scalar(1.0 + spec.q));
}

template <typename Scalar>
Scalar psi_derivative(const RegularizerSpec& spec, Scalar x) {
  const Scalar q(spec.q);
  return sign(x) * Scalar(spec.kappa()) * (Scalar(1) + q) * std::pow(std::abs(x), q);
}

/// Inverse of psi on [0, inf).
template <typename Scalar>
Scalar psi_inverse(const RegularizerSpec& spec, Scalar y) {
  if (y <= Scalar(0)) return Scalar(0);
  return std::pow(y / Scalar(spec.kappa()), Scalar(1) / Scalar(1.0 + spec.q));
}

/// Gradient of the Fenchel conjugate; the inverse map of psi_derivative.
template <typename Scalar>
Scalar psi_conjugate_grad(const RegularizerSpec& spec, Scalar theta) {
  const Scalar slope = Scalar(spec.kappa()) * Scalar(1.0 + spec.q);
  return sign(theta) * std::pow(std::abs(theta) / slope, Scalar(1) / Scalar(spec.q));
}

/// psi*(theta) = |theta| x - psi(x) at x = grad psi*(theta), which simplifies
/// to |theta| x q / (1 + q).
template <typename Scalar>
Scalar psi_conjugate(const RegularizerSpec& spec, Scalar theta) {
  const Scalar x = std::abs(psi_conjugate_grad(spec, theta));
  const Scalar q(spec.q);
  return std::abs(theta) * x * q / (Scalar(1) + q);
}

// ---------------------------------------------------------------------------
// Traces and regret accounting.

struct TraceRow {
  std::int64_t t = 0;
  double h = 0.0;
  Vector<double> g;
  Vector<double> w;
  double a = 0.0;
  double sum_g2 = 0.0;
  double sum_a = 0.0;
  double clip_ratio_sum = 0.0;
  double regret_u0 = 0.0;

  bool operator==(const TraceRow& other) const {
    return t == other.t && h == other.h && g.size() == other.g.size() && g == other.g &&
           w.size() == other.w.size() && w == other.w && a == other.a &&
           sum_g2 == other.sum_g2 && sum_a == other.sum_a &&
           clip_ratio_sum == other.clip_ratio_sum && regret_u0 == other.regret_u0;
  }
};

using Trace = std::vector<TraceRow>;

struct RegretReport {
  Vector<double> comparator;
  double regret = 0.0;
  // Quantity held against the bound; differs from regret only for the
  // regularized learner, where a_t (psi(w_t) - psi(u)) is included.
  double checked = 0.0;
  bool has_bound = false;
  double bound = 0.0;
  std::string bound_name;
  bool pass = true;
};

/// sum_t <g_t, w_t - u>.
inline double regret_against(const Trace& trace, const Vector<double>& u) {
  if (trace.empty()) throw Error(ErrorCode::kPrecondition, "regret_against needs a non-empty trace");
  double total = 0.0;
  for (const auto& row : trace) {
    if (row.w.size() != u.size() || row.g.size() != u.size())
      throw Error(ErrorCode::kShape, "comparator dimension " + std::to_string(u.size()) +
                                         " does not match trace dimension " +
                                         std::to_string(row.w.size()) + " at round " +
                                         std::to_string(row.t));
    total += row.g.dot(row.w - u);
  }
  return total;
}

inline double regret_against(const Trace& trace, double u) {
  return regret_against(trace, Vector<double>::Constant(1, u));
}

/// Comparator grid {0, +-0.1, +-1, +-10, +-100} scaled by h1.
inline std::vector<double> default_comparator_grid(double h1) {
  std::vector<double> grid{0.0};
  for (double m : {0.1, 1.0, 10.0, 100.0}) {
    grid.push_back(m * h1);
    grid.push_back(-m * h1);
  }
  return grid;
}

}  // namespace pfol
