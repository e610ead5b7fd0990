#pragma once

#include <cmath>
#include <span>
#include <string>

#include "pfol/core.hpp"

namespace pfol {

template <typename Scalar = double>
struct BaseConfig {
  Scalar eps = Scalar(1);
  Scalar p = Scalar(0.5);
  // Multiplies every alpha_t. Only the mutation checks in verify set this.
  Scalar alpha_scale = Scalar(1);

  static constexpr Scalar k() { return Scalar(3); }
  bool half() const { return p == Scalar(0.5); }
  Scalar c() const { return half() ? Scalar(3) : Scalar(1); }

  void validate() const {
    if (!(eps > Scalar(0)))
      throw Error(ErrorCode::kConfig, "base learner eps must be positive");
    if (!(p >= Scalar(0) && p <= Scalar(0.5)))
      throw Error(ErrorCode::kConfig, "base learner p must lie in [0, 1/2]");
  }
};

/// One-dimensional FTRL learner driven by magnitude hints. Each round is
/// predict(h_t) followed by update(g_t) with |g_t| <= h_t.
template <typename Scalar = double>
class BaseLearner {
 public:
  BaseLearner() : BaseLearner(BaseConfig<Scalar>{}) {}
  explicit BaseLearner(BaseConfig<Scalar> config) : config_(config) { config_.validate(); }

  Scalar predict(Scalar hint) {
    if (!(hint > Scalar(0)) || !std::isfinite(hint))
      throw Error(ErrorCode::kInvalidHint, "hint must be positive and finite, got " + std::to_string(double(hint)));
    if (hint < hint_)
      throw Error(ErrorCode::kInvalidHint, "hint decreased from " + std::to_string(double(hint_)) +
                                               " to " + std::to_string(double(hint)));
    hint_ = hint;
    awaiting_feedback_ = true;

    const Scalar k = BaseConfig<Scalar>::k();
    const Scalar v = hint * hint + grad_sq_sum_;
    const Scalar x = config_.c() + ratio_sum_;
    Scalar alpha;
    if (config_.half()) {
      const Scalar lx = std::log(x);
      alpha = config_.eps / (std::sqrt(x) * lx * lx);
    } else {
      alpha = config_.eps / std::pow(x, config_.p);
    }
    alpha *= config_.alpha_scale;

    const Scalar s = std::abs(grad_sum_);
    // Ties take the quadratic branch.
    const Scalar theta = s <= Scalar(2) * k * v / hint ? s * s / (Scalar(4) * k * k * v)
                                                       : s / (k * hint) - v / (hint * hint);
    const Scalar w = -sign(grad_sum_) * alpha * std::expm1(theta);
    if (!std::isfinite(w) || !std::isfinite(theta))
      throw Error(ErrorCode::kNumericOverflow,
                  "base learner output overflowed at round " + std::to_string(round_ + 1));
    alpha_ = alpha;
    v_ = v;
    theta_ = theta;
    return w;
  }

  void update(Scalar g) {
    if (!awaiting_feedback_)
      throw Error(ErrorCode::kContractViolation, "update called without a preceding predict");
    if (!(std::abs(g) <= hint_))
      throw Error(ErrorCode::kContractViolation,
                  "|g| = " + std::to_string(double(std::abs(g))) + " exceeds hint " +
                      std::to_string(double(hint_)) + " at round " + std::to_string(round_ + 1));
    grad_sum_ += g;
    grad_sq_sum_ += g * g;
    ratio_sum_ += (g / hint_) * (g / hint_);
    ++round_;
    awaiting_feedback_ = false;
  }

  const BaseConfig<Scalar>& config() const { return config_; }
  Scalar grad_sum() const { return grad_sum_; }
  Scalar grad_sq_sum() const { return grad_sq_sum_; }
  Scalar ratio_sum() const { return ratio_sum_; }
  Scalar hint() const { return hint_; }
  long round() const { return round_; }

  // Quantities from the most recent predict.
  Scalar last_alpha() const { return alpha_; }
  Scalar last_v() const { return v_; }
  Scalar last_theta() const { return theta_; }

 private:
  BaseConfig<Scalar> config_;
  Scalar grad_sum_ = Scalar(0);
  Scalar grad_sq_sum_ = Scalar(0);
  Scalar ratio_sum_ = Scalar(0);
  Scalar hint_ = Scalar(0);
  long round_ = 0;
  bool awaiting_feedback_ = false;
  Scalar alpha_ = Scalar(0);
  Scalar v_ = Scalar(0);
  Scalar theta_ = Scalar(0);
};

/// Sufficient statistics of a hinted run for the closed-form regret bound.
template <typename Scalar = double>
struct HintedRunSummary {
  Scalar last_hint = Scalar(0);  // h_T
  Scalar sum_g2 = Scalar(0);     // sum g_t^2
  Scalar sum_ratio = Scalar(0);  // sum g_t^2 / h_t^2
  long rounds = 0;

  void add(Scalar g, Scalar h) {
    last_hint = h;
    sum_g2 += g * g;
    sum_ratio += (g / h) * (g / h);
    ++rounds;
  }
};

template <typename Scalar>
HintedRunSummary<Scalar> summarize(std::span<const Scalar> g, std::span<const Scalar> h) {
  if (g.size() != h.size()) throw Error(ErrorCode::kShape, "gradient and hint sequences differ in length");
  HintedRunSummary<Scalar> s;
  for (std::size_t i = 0; i < g.size(); ++i) s.add(g[i], h[i]);
  return s;
}

namespace detail {
template <typename Scalar>
Scalar comparator_terms(Scalar u, Scalar log_arg, const HintedRunSummary<Scalar>& s) {
  const Scalar k = BaseConfig<Scalar>::k();
  const Scalar l = std::log(log_arg);
  return Scalar(2) * k * std::abs(u) * std::sqrt((s.last_hint * s.last_hint + s.sum_g2) * l) +
         Scalar(2) * k * std::abs(u) * s.last_hint * l;
}
}  // namespace detail

/// Right-hand side of the explicit regret bound for p = 1/2.
template <typename Scalar>
Scalar theorem_bound_half(const HintedRunSummary<Scalar>& s, Scalar u, const BaseConfig<Scalar>& config) {
  if (!config.half()) throw Error(ErrorCode::kBranchMismatch, "p = 1/2 bound requested with p != 1/2");
  const Scalar x = Scalar(3) + s.sum_ratio;
  const Scalar lx = std::log(x);
  const Scalar arg = std::abs(u) * std::sqrt(x) * lx * lx / config.eps + Scalar(1);
  return Scalar(8) * s.last_hint * config.eps + detail::comparator_terms(u, arg, s);
}

/// Right-hand side of the explicit regret bound for p < 1/2.
template <typename Scalar>
Scalar theorem_bound_below_half(const HintedRunSummary<Scalar>& s, Scalar u, const BaseConfig<Scalar>& config) {
  if (config.half()) throw Error(ErrorCode::kBranchMismatch, "p < 1/2 bound requested with p = 1/2");
  const Scalar p = config.p;
  const Scalar lead = Scalar(4) * std::pow(s.last_hint, Scalar(2) * p) * config.eps *
                      std::pow(s.sum_g2, Scalar(0.5) - p) / (Scalar(1) - Scalar(2) * p);
  const Scalar arg = std::abs(u) * std::pow(Scalar(1) + s.sum_ratio, p) / config.eps + Scalar(1);
  return lead + detail::comparator_terms(u, arg, s);
}

template <typename Scalar>
Scalar base_theorem_bound(const HintedRunSummary<Scalar>& s, Scalar u, const BaseConfig<Scalar>& config) {
  return config.half() ? theorem_bound_half(s, u, config) : theorem_bound_below_half(s, u, config);
}

template <typename Scalar>
Scalar base_theorem_bound(std::span<const Scalar> g, std::span<const Scalar> h, Scalar u,
                          const BaseConfig<Scalar>& config) {
  return base_theorem_bound(summarize(g, h), u, config);
}

/// Limit on sum_t alpha_t g_t^2 / sqrt(V_t): 4 eps h_T for p = 1/2, and
/// 2 eps h_T^{2p} (sum g^2)^{1/2-p} / (1-2p) otherwise.
template <typename Scalar>
Scalar alpha_sum_limit(const HintedRunSummary<Scalar>& s, const BaseConfig<Scalar>& config) {
  if (config.half()) return Scalar(4) * config.eps * s.last_hint;
  const Scalar p = config.p;
  return Scalar(2) * config.eps * std::pow(s.last_hint, Scalar(2) * p) *
         std::pow(s.sum_g2, Scalar(0.5) - p) / (Scalar(1) - Scalar(2) * p);
}

/// Result of driving a base learner over a fixed hinted sequence.
template <typename Scalar = double>
struct BaseRun {
  std::vector<Scalar> w;
  HintedRunSummary<Scalar> summary;
  Scalar alpha_sum = Scalar(0);  // sum alpha_t g_t^2 / sqrt(V_t)
};

template <typename Scalar>
BaseRun<Scalar> run_base(std::span<const Scalar> g, std::span<const Scalar> h, const BaseConfig<Scalar>& config) {
  if (g.size() != h.size()) throw Error(ErrorCode::kShape, "gradient and hint sequences differ in length");
  BaseLearner<Scalar> learner(config);
  BaseRun<Scalar> run;
  run.w.reserve(g.size());
  for (std::size_t t = 0; t < g.size(); ++t) {
    run.w.push_back(learner.predict(h[t]));
    run.alpha_sum += learner.last_alpha() * g[t] * g[t] / std::sqrt(learner.last_v());
    learner.update(g[t]);
    run.summary.add(g[t], h[t]);
  }
  return run;
}

/// Nature's hints for a fixed sequence: h_t = max(h1, |g_1|, ..., |g_t|).
template <typename Scalar>
std::vector<Scalar> prefix_max_hints(std::span<const Scalar> g, Scalar h1) {
  std::vector<Scalar> h(g.size());
  Scalar cur = h1;
  for (std::size_t t = 0; t < g.size(); ++t) {
    cur = std::max(cur, std::abs(g[t]));
    h[t] = cur;
  }
  return h;
}

}  // namespace pfol
