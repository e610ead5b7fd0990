#pragma once

#include <cmath>
#include <optional>

#include "pfol/core.hpp"
#include "pfol/epigraph.hpp"

namespace pfol {

template <typename Scalar = double>
struct HintTracker {
  Scalar h1 = Scalar(1);
  Scalar h = Scalar(1);
  Scalar ratio_sum = Scalar(0);  // sum of (h_{i+1} - h_i) / h_{i+1}
  long rounds = 0;

  explicit HintTracker(Scalar first_hint = Scalar(1)) : h1(first_hint), h(first_hint) {
    if (!(first_hint > Scalar(0)) || !std::isfinite(first_hint))
      throw Error(ErrorCode::kInvalidHint, "h1 must be positive and finite");
  }
};

template <typename Scalar = double>
struct HintStep {
  Scalar h_next;
  Scalar g_clipped;
  Scalar increment;
};

/// Clip g to the current hint, grow the hint to |g| and accumulate the
/// growth ratio.
template <typename Scalar>
HintStep<Scalar> hint_clip_update(HintTracker<Scalar>& tracker, Scalar g) {
  HintStep<Scalar> step;
  step.g_clipped = clip(g, tracker.h);
  step.h_next = std::max(tracker.h, std::abs(g));
  step.increment = (step.h_next - tracker.h) / step.h_next;
  tracker.ratio_sum += step.increment;
  tracker.h = step.h_next;
  ++tracker.rounds;
  return step;
}

/// a_t = gamma r_t / (1 + sum_{i<=t} r_i); the tracker already holds r_t.
template <typename Scalar>
Scalar reg_coefficient(const HintTracker<Scalar>& tracker, Scalar gamma, Scalar last_increment) {
  return gamma * last_increment / (Scalar(1) + tracker.ratio_sum);
}

/// gamma ln(1 + ln(h_final / h1)).
template <typename Scalar>
Scalar a_sum_limit(Scalar gamma, Scalar h_final, Scalar h1) {
  return gamma * std::log1p(std::log(h_final / h1));
}

/// Pathwise limit on sum_t [(h_{t+1} - h_t)|w_t| - a_t psi(w_t)] for
/// psi = kappa |x|^{1+q}. The scaled family (kappa = 1/(1+q)) gives
/// h^{1+1/q} (1 + ln(h/h1))^{1/q} / ((1 + 1/q) gamma^{1/q}); other kappa
/// rescale gamma by (1+q) kappa.
template <typename Scalar>
Scalar penalty_sum_limit(Scalar h_final, Scalar h1, Scalar gamma, const RegularizerSpec& psi) {
  const Scalar q(psi.q);
  const Scalar g_eff = gamma * (Scalar(1) + q) * Scalar(psi.kappa());
  const Scalar inv_q = Scalar(1) / q;
  return std::pow(h_final, Scalar(1) + inv_q) * std::pow(Scalar(1) + std::log(h_final / h1), inv_q) /
         ((Scalar(1) + inv_q) * std::pow(g_eff, inv_q));
}

template <typename Scalar = double>
struct UnconstrainedConfig {
  Scalar eps = Scalar(1);
  std::optional<Scalar> eps_psi;
  Scalar gamma = Scalar(1);
  Scalar h1 = Scalar(1);
  Scalar p = Scalar(0.5);
  RegularizerSpec psi;

  EpigraphConfig<Scalar> epigraph() const {
    EpigraphConfig<Scalar> c;
    c.eps_x = eps;
    c.eps_psi = eps_psi;
    c.gamma = gamma;
    c.p = p;
    c.psi = psi;
    return c;
  }
};

/// One-dimensional learner for unbounded gradients: clip to the running
/// hint, regularize with a_t psi(w) and delegate to the epigraph learner.
template <typename Scalar = double>
class Unconstrained1d {
 public:
  Unconstrained1d() : Unconstrained1d(UnconstrainedConfig<Scalar>{}) {}
  explicit Unconstrained1d(UnconstrainedConfig<Scalar> config)
      : config_(config), tracker_(config.h1), reg_(config.epigraph()) {}

  Scalar predict() {
    w_ = reg_.predict(tracker_.h);
    return w_;
  }

  void update(Scalar g) {
    if (!std::isfinite(g)) throw Error(ErrorCode::kContractViolation, "non-finite gradient");
    const Scalar h = tracker_.h;
    last_ = hint_clip_update(tracker_, g);
    last_a_ = reg_coefficient(tracker_, config_.gamma, last_.increment);
    // a_t > 0 only when the hint grew, and then g_clipped = +-h exactly.
    reg_.update(last_.g_clipped, last_a_);
    penalty_sum_ += (last_.h_next - h) * std::abs(w_) - last_a_ * psi_value(config_.psi, w_);
    clipped_sq_sum_ += last_.g_clipped * last_.g_clipped;
    a_sum_ += last_a_;
  }

  /// predict, then feed back g; returns the prediction made before g was seen.
  Scalar magnitude_step(Scalar g) {
    const Scalar w = predict();
    update(g);
    return w;
  }

  const UnconstrainedConfig<Scalar>& config() const { return config_; }
  const HintTracker<Scalar>& tracker() const { return tracker_; }
  const EpigraphLearner<Scalar>& reg() const { return reg_; }
  const HintStep<Scalar>& last_step() const { return last_; }
  Scalar last_a() const { return last_a_; }
  Scalar a_sum() const { return a_sum_; }
  Scalar clipped_sq_sum() const { return clipped_sq_sum_; }
  Scalar penalty_sum() const { return penalty_sum_; }

 private:
  UnconstrainedConfig<Scalar> config_;
  HintTracker<Scalar> tracker_;
  EpigraphLearner<Scalar> reg_;
  HintStep<Scalar> last_{};
  Scalar w_ = Scalar(0);
  Scalar last_a_ = Scalar(0);
  Scalar a_sum_ = Scalar(0);
  Scalar clipped_sq_sum_ = Scalar(0);
  Scalar penalty_sum_ = Scalar(0);
};

/// Regret bound for Unconstrained1d at comparator u:
///   composite(u) + psi(u) sum a + |u| (h_{T+1} - h_1) + penalty limit,
/// where composite is the epigraph learner's bound on the clipped game.
template <typename Scalar>
Scalar unconstrained1d_bound(const Unconstrained1d<Scalar>& learner, Scalar u) {
  const auto& cfg = learner.config();
  const auto& tr = learner.tracker();
  CompositeRunSummary<Scalar> s;
  s.first_hint = tr.h1;
  s.last_hint = learner.reg().last_round().hint;
  s.sum_g2 = learner.clipped_sq_sum();
  s.sum_a = learner.a_sum();
  const BaseConfig<Scalar> base{cfg.eps, cfg.p};
  const Scalar composite =
      composite_regret_bound(s, u, cfg.epigraph(), base_guarantee_constants(base, tr.rounds));
  return composite + psi_value(cfg.psi, u) * learner.a_sum() + std::abs(u) * (tr.h - tr.h1) +
         penalty_sum_limit(tr.h, tr.h1, cfg.gamma, cfg.psi);
}

/// Projected gradient descent on the unit ball with step 1/sqrt(2 sum ||g||^2).
template <typename Scalar = double>
struct DirectionLearner {
  Vector<Scalar> w;
  Scalar grad_sq_total = Scalar(0);

  explicit DirectionLearner(Eigen::Index dim = 1) : w(Vector<Scalar>::Zero(dim)) {}

  const Vector<Scalar>& direction_step(const Vector<Scalar>& g) {
    if (g.size() != w.size()) throw Error(ErrorCode::kShape, "gradient dimension mismatch");
    grad_sq_total += g.squaredNorm();
    if (!(grad_sq_total > Scalar(0))) return w;
    w -= g / std::sqrt(Scalar(2) * grad_sq_total);
    const Scalar n = w.norm();
    if (n > Scalar(1)) w /= n;
    return w;
  }
};

/// d-dimensional composition: w_t = (1-D magnitude) * (unit-ball direction).
template <typename Scalar = double>
class UnconstrainedNd {
 public:
  UnconstrainedNd(Eigen::Index dim, UnconstrainedConfig<Scalar> config) : magnitude_(config), direction_(dim) {}

  Vector<Scalar> predict() {
    w_mag_ = magnitude_.predict();
    return w_mag_ * direction_.w;
  }

  void update(const Vector<Scalar>& g) {
    if (g.size() != direction_.w.size()) throw Error(ErrorCode::kShape, "gradient dimension mismatch");
    last_g1d_ = g.dot(direction_.w);
    magnitude_.update(last_g1d_);
    direction_.direction_step(g);
  }

  Vector<Scalar> full_step(const Vector<Scalar>& g) {
    Vector<Scalar> w = predict();
    update(g);
    return w;
  }

  Eigen::Index dim() const { return direction_.w.size(); }
  const Unconstrained1d<Scalar>& magnitude() const { return magnitude_; }
  const DirectionLearner<Scalar>& direction() const { return direction_; }
  Scalar last_g1d() const { return last_g1d_; }

 private:
  Unconstrained1d<Scalar> magnitude_;
  DirectionLearner<Scalar> direction_;
  Scalar w_mag_ = Scalar(0);
  Scalar last_g1d_ = Scalar(0);
};

}  // namespace pfol
