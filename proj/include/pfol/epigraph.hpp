#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "pfol/base_learner.hpp"
#include "pfol/core.hpp"

namespace pfol {

template <typename Scalar = double>
struct EpigraphPoint {
  Scalar x = Scalar(0);
  Scalar y = Scalar(0);
};

/// Weighted-norm projection of (x_hat, y_hat) onto {y >= psi(x)} under
/// ||(x, y)||^2 = h^2 x^2 + gamma^2 y^2.
///
/// For an infeasible point the minimizer sits on the curve y = psi(x) with x
/// between psi^{-1}(max(y_hat, 0)) and x_hat (same sign as x_hat). On that
/// interval f(x) = h^2 (x - x_hat)^2 + gamma^2 (psi(x) - y_hat)^2 is convex, so
/// a golden-section pass followed by a bracketed Newton polish on f' finds the
/// global minimizer.
template <typename Scalar>
EpigraphPoint<Scalar> project_epigraph(Scalar x_hat, Scalar y_hat, Scalar h, Scalar gamma,
                                       const RegularizerSpec& psi) {
  psi.validate();
  if (!(h > Scalar(0)) || !(gamma > Scalar(0)))
    throw Error(ErrorCode::kPrecondition, "projection requires h > 0 and gamma > 0");
  if (y_hat >= psi_value(psi, x_hat)) return {x_hat, y_hat};

  const Scalar a = std::abs(x_hat);
  const Scalar h2 = h * h;
  const Scalar g2 = gamma * gamma;
  auto f = [&](Scalar x) {
    const Scalar dy = psi_value(psi, x) - y_hat;
    return h2 * (x - a) * (x - a) + g2 * dy * dy;
  };
  auto df = [&](Scalar x) {
    return Scalar(2) * h2 * (x - a) + Scalar(2) * g2 * (psi_value(psi, x) - y_hat) * psi_derivative(psi, x);
  };

  // (0, 0) is feasible, so the projection lies within this distance of x_hat.
  const Scalar radius = std::hypot(h * x_hat, gamma * y_hat) / h;
  Scalar lo = std::max(psi_inverse(psi, std::max(y_hat, Scalar(0))), a - radius);
  Scalar hi = a;
  lo = std::clamp(lo, Scalar(0), hi);

  const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  Scalar c = hi - inv_phi * (hi - lo);
  Scalar d = lo + inv_phi * (hi - lo);
  Scalar fc = f(c), fd = f(d);
  for (int it = 0; it < 60 && hi - lo > Scalar(1e-9) * (Scalar(1) + a); ++it) {
    if (fc <= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = f(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = f(d);
    }
  }

  // Re-bracket the root of the monotone f' and polish.
  lo = std::max(Scalar(0), lo - (hi - lo));
  hi = std::min(a, hi + (hi - lo));
  if (df(lo) > Scalar(0)) lo = std::max(psi_inverse(psi, std::max(y_hat, Scalar(0))), Scalar(0));
  if (df(hi) < Scalar(0)) hi = a;
  Scalar x = Scalar(0.5) * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const Scalar d1 = df(x);
    if (std::abs(d1) <= Scalar(1e-12) * (Scalar(1) + f(x))) break;
    if (d1 > Scalar(0)) hi = x; else lo = x;
    const Scalar step = std::max(std::abs(x), Scalar(1)) * Scalar(1e-7);
    const Scalar d2 = (df(x + step) - df(x - step)) / (Scalar(2) * step);
    Scalar next = d2 > Scalar(0) ? x - d1 / d2 : Scalar(0.5) * (lo + hi);
    if (!(next > lo && next < hi)) next = Scalar(0.5) * (lo + hi);
    if (next == x || hi - lo <= std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + a)) {
      x = next;
      break;
    }
    x = next;
  }
  const Scalar signed_x = x_hat < Scalar(0) ? -x : x;
  return {signed_x, psi_value(psi, signed_x)};
}

enum class ProjectionPath { kClosedForm, kFallbackNegativeRadicand, kFallbackResidual };

template <typename Scalar = double>
struct ClosedFormProjection {
  EpigraphPoint<Scalar> point;
  ProjectionPath path = ProjectionPath::kClosedForm;
  Scalar radicand = Scalar(0);
  Scalar residual = Scalar(0);
};

/// Radicand of the cubic-formula square root for psi(x) = x^2:
/// 2916 h^4 gamma^8 x^2 + (6 h^2 gamma^2 - 12 gamma^4 y)^3.
template <typename Scalar>
Scalar quadratic_projection_radicand(Scalar x_hat, Scalar y_hat, Scalar h, Scalar gamma) {
  const Scalar h2 = h * h, g2 = gamma * gamma, g4 = g2 * g2;
  const Scalar lin = Scalar(6) * h2 * g2 - Scalar(12) * g4 * y_hat;
  return Scalar(2916) * h2 * h2 * g4 * g4 * x_hat * x_hat + lin * lin * lin;
}

/// Cardano root of the stationarity cubic 2 gamma^2 x^3 + (h^2 - 2 gamma^2 y) x - h^2 x_hat = 0.
/// The root is evaluated for -|x_hat| (where both terms of Z are non-negative)
/// and mirrored back, which makes the map exactly odd in x_hat.
template <typename Scalar>
ClosedFormProjection<Scalar> project_quadratic_closed_form(Scalar x_hat, Scalar y_hat, Scalar h, Scalar gamma) {
  if (!(h > Scalar(0)) || !(gamma > Scalar(0)))
    throw Error(ErrorCode::kPrecondition, "projection requires h > 0 and gamma > 0");
  if (!(y_hat < x_hat * x_hat))
    throw Error(ErrorCode::kPrecondition, "closed-form projection needs an infeasible point");

  const RegularizerSpec square{1.0, false};
  ClosedFormProjection<Scalar> out;
  const Scalar h2 = h * h, g2 = gamma * gamma, g4 = g2 * g2;
  const Scalar xn = -std::abs(x_hat);
  out.radicand = quadratic_projection_radicand(xn, y_hat, h, gamma);
  if (out.radicand < Scalar(0)) {
    out.path = ProjectionPath::kFallbackNegativeRadicand;
    out.point = project_epigraph(x_hat, y_hat, h, gamma, square);
    return out;
  }

  const Scalar z = Scalar(-108) * h2 * g4 * xn + Scalar(2) * std::sqrt(out.radicand);
  const Scalar zc = std::cbrt(z);
  const Scalar c2 = std::cbrt(Scalar(2));
  const Scalar lin = h2 - Scalar(2) * g2 * y_hat;
  const Scalar xr = c2 * lin / zc - zc / (Scalar(6) * c2 * g2);

  const Scalar terms = Scalar(2) * g2 * std::abs(xr * xr * xr) + std::abs(lin * xr) + h2 * std::abs(xn);
  out.residual = std::abs(Scalar(2) * g2 * xr * xr * xr + lin * xr - h2 * xn) / terms;
  if (!std::isfinite(xr) || !(out.residual <= Scalar(1e-8))) {
    out.path = ProjectionPath::kFallbackResidual;
    out.point = project_epigraph(x_hat, y_hat, h, gamma, square);
    return out;
  }
  const Scalar x = x_hat < Scalar(0) ? xr : -xr;
  out.point = {x, x * x};
  return out;
}

/// A subgradient of the distance S(x_hat, y_hat) to the epigraph, given the
/// projection (x, y). Returns (0, 0) at zero distance.
template <typename Scalar>
std::pair<Scalar, Scalar> distance_subgradient(Scalar x_hat, Scalar y_hat, Scalar x, Scalar y, Scalar h,
                                               Scalar gamma) {
  const Scalar dist = weighted_norm(x - x_hat, y - y_hat, h, gamma);
  if (!(dist > Scalar(0))) return {Scalar(0), Scalar(0)};
  return {h * h * (x_hat - x) / dist, gamma * gamma * (y_hat - y) / dist};
}

template <typename Scalar = double>
struct EpigraphConfig {
  Scalar eps_x = Scalar(1);
  std::optional<Scalar> eps_psi;  // defaults to psi(eps_x)
  Scalar gamma = Scalar(1);
  Scalar p = Scalar(0.5);
  RegularizerSpec psi;
  Scalar alpha_scale = Scalar(1);

  Scalar resolved_eps_psi() const { return eps_psi ? *eps_psi : psi_value(psi, eps_x); }

  void validate() const {
    psi.validate();
    if (!(gamma > Scalar(0))) throw Error(ErrorCode::kConfig, "gamma must be positive");
    if (!(resolved_eps_psi() > Scalar(0))) throw Error(ErrorCode::kConfig, "eps_psi must be positive");
  }
};

/// Everything the learner computed in one round.
template <typename Scalar = double>
struct EpigraphRound {
  Scalar x_hat = Scalar(0), y_hat = Scalar(0);
  Scalar x = Scalar(0), y = Scalar(0);
  Scalar delta_x = Scalar(0), delta_y = Scalar(0);
  Scalar hint = Scalar(0);
};

/// Regularized learner: two base learners play the epigraph game over
/// {y >= psi(x)}, with distance-function corrections fed back to each.
template <typename Scalar = double>
class EpigraphLearner {
 public:
  EpigraphLearner() : EpigraphLearner(EpigraphConfig<Scalar>{}) {}
  explicit EpigraphLearner(EpigraphConfig<Scalar> config)
      : config_((config.validate(), config)),
        child_x_(BaseConfig<Scalar>{config.eps_x, config.p, config.alpha_scale}),
        child_y_(BaseConfig<Scalar>{config.resolved_eps_psi(), config.p, config.alpha_scale}) {}

  Scalar predict(Scalar hint) {
    if (!(hint > Scalar(0)) || hint < round_.hint)
      throw Error(ErrorCode::kInvalidHint, "epigraph learner needs positive non-decreasing hints");
    round_ = {};
    round_.hint = hint;
    round_.x_hat = child_x_.predict(Scalar(3) * hint);
    round_.y_hat = child_y_.predict(Scalar(3) * config_.gamma);
    const EpigraphPoint<Scalar> proj = project(round_.x_hat, round_.y_hat, hint);
    round_.x = proj.x;
    round_.y = proj.y;
    awaiting_feedback_ = true;
    return round_.x;
  }

  void update(Scalar g, Scalar a) {
    if (!awaiting_feedback_)
      throw Error(ErrorCode::kContractViolation, "update called without a preceding predict");
    const Scalar h = round_.hint;
    if (!(std::abs(g) <= h))
      throw Error(ErrorCode::kContractViolation, "|g| exceeds the hint");
    if (!(a >= Scalar(0) && a <= config_.gamma))
      throw Error(ErrorCode::kContractViolation, "a must lie in [0, gamma]");
    if (a > Scalar(0) && std::abs(g) != h)
      throw Error(ErrorCode::kContractViolation, "a > 0 requires |g| = h (coupled clipping)");

    const Scalar scale = dual_norm_pair(g, a, h, config_.gamma);
    const auto [sx, sy] = distance_subgradient(round_.x_hat, round_.y_hat, round_.x, round_.y, h, config_.gamma);
    round_.delta_x = scale * sx;
    round_.delta_y = scale * sy;
    child_x_.update(g + round_.delta_x);
    child_y_.update(a + round_.delta_y);
    awaiting_feedback_ = false;
  }

  const EpigraphConfig<Scalar>& config() const { return config_; }
  const EpigraphRound<Scalar>& last_round() const { return round_; }
  const BaseLearner<Scalar>& child_x() const { return child_x_; }
  const BaseLearner<Scalar>& child_y() const { return child_y_; }

 private:
  EpigraphPoint<Scalar> project(Scalar x_hat, Scalar y_hat, Scalar h) const {
    const bool square = config_.psi.q == 1.0 && !config_.psi.scaled;
    if (square && y_hat < x_hat * x_hat)
      return project_quadratic_closed_form(x_hat, y_hat, h, config_.gamma).point;
    return project_epigraph(x_hat, y_hat, h, config_.gamma, config_.psi);
  }

  EpigraphConfig<Scalar> config_;
  BaseLearner<Scalar> child_x_;
  BaseLearner<Scalar> child_y_;
  EpigraphRound<Scalar> round_;
  bool awaiting_feedback_ = false;
};

/// Constants (A, B, C, D, p) of a base-learner guarantee of the form
///   C eps m_T^{2p} Z^{1/2-p} + A|u| sqrt(Z log(e + D|u|Z^p/(m_1^{2p} eps)))
///   + B|u| m_T log(e + D|u|Z^p/(m_1^{2p} eps)).
template <typename Scalar = double>
struct BaseGuaranteeConstants {
  Scalar A, B, C, D, p;
};

/// Constants implied by the explicit base-learner bound over T rounds.
template <typename Scalar>
BaseGuaranteeConstants<Scalar> base_guarantee_constants(const BaseConfig<Scalar>& config, long rounds) {
  if (config.half()) {
    const Scalar l = std::log(Scalar(3) + Scalar(rounds));
    return {Scalar(6), Scalar(6), Scalar(8), std::sqrt(Scalar(3)) * l * l, Scalar(0.5)};
  }
  return {Scalar(6), Scalar(6), Scalar(4) / (Scalar(1) - Scalar(2) * config.p), Scalar(1), config.p};
}

/// Run statistics for the composite regret bound.
template <typename Scalar = double>
struct CompositeRunSummary {
  Scalar first_hint = Scalar(0);
  Scalar last_hint = Scalar(0);
  Scalar sum_g2 = Scalar(0);
  Scalar sum_a = Scalar(0);
};

/// Bound on sum g_t (x_t - u) + a_t (psi(x_t) - psi(u)) assembled from a base
/// guarantee with constants k.
template <typename Scalar>
Scalar composite_regret_bound(const CompositeRunSummary<Scalar>& s, Scalar u, const EpigraphConfig<Scalar>& config,
                              const BaseGuaranteeConstants<Scalar>& k) {
  const Scalar e = std::exp(Scalar(1));
  const Scalar p = k.p;
  const Scalar gamma = config.gamma;
  const Scalar eps_x = config.eps_x;
  const Scalar eps_psi = config.resolved_eps_psi();
  const Scalar vg = s.last_hint * s.last_hint + s.sum_g2;
  const Scalar sa = gamma * gamma + gamma * s.sum_a;
  const Scalar au = std::abs(u);
  const Scalar pu = psi_value(config.psi, u);

  const Scalar lx = std::log(e + k.D * au * std::pow(vg, p) / (eps_x * std::pow(s.first_hint, Scalar(2) * p)));
  const Scalar x_part = Scalar(3) * k.C * eps_x * std::pow(s.last_hint, Scalar(2) * p) * std::pow(vg, Scalar(0.5) - p) +
                        Scalar(3) * k.A * au * std::sqrt(vg * lx) + Scalar(3) * k.B * s.last_hint * au * lx;

  const Scalar A2 = k.A * k.A;
  const Scalar inner = std::pow(Scalar(1152) * A2 * p + Scalar(48) * p * k.B, p);
  const Scalar a_psi = Scalar(0.5) + Scalar(144) * A2;
  const Scalar b_psi = Scalar(144) * A2 + Scalar(24) * k.B;
  const Scalar tail = (Scalar(2) * p + Scalar(1)) *
                      std::pow(Scalar(2) - Scalar(4) * p, (Scalar(1) - Scalar(2) * p) / (Scalar(1) + Scalar(2) * p)) /
                      Scalar(2);
  const Scalar c_psi =
      Scalar(3) * k.C * (b_psi * std::log(e + Scalar(12) * k.C * k.D * inner) + Scalar(0.5) + tail);
  const Scalar d_psi = Scalar(4) * k.D * inner;
  const Scalar ly = std::log(e + d_psi * pu * std::pow(sa, p) / (eps_psi * std::pow(gamma, Scalar(2) * p)));
  const Scalar y_part = c_psi * eps_psi * std::pow(gamma, Scalar(2) * p) * std::pow(sa, Scalar(0.5) - p) +
                        a_psi * pu * std::sqrt(sa * ly) + b_psi * gamma * pu * ly;
  return x_part + y_part;
}

}  // namespace pfol
