#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "pfol/core.hpp"

namespace pfol {

/// Principal branch of the Lambert W function on [0, inf).
template <typename Scalar>
Scalar lambert_w(Scalar x) {
  if (!(x >= Scalar(0))) throw Error(ErrorCode::kDomain, "lambert_w requires x >= 0");
  if (x == Scalar(0)) return Scalar(0);
  if (std::isinf(x)) return x;
  Scalar w;
  if (x < Scalar(3)) {
    w = std::log1p(x) * (Scalar(1) - std::log1p(std::log1p(x)) / (Scalar(2) + std::log1p(x)));
  } else {
    const Scalar l1 = std::log(x);
    const Scalar l2 = std::log(l1);
    w = l1 - l2 + l2 / l1;
  }
  for (int it = 0; it < 100; ++it) {
    const Scalar ew = std::exp(w);
    const Scalar f = w * ew - x;
    const Scalar wp1 = w + Scalar(1);
    const Scalar step = f / (ew * wp1 - (w + Scalar(2)) * f / (Scalar(2) * wp1));
    w -= step;
    if (std::abs(step) <= Scalar(4) * std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(w))) break;
  }
  return w;
}

/// X(theta) = W(theta)^{1/2} - W(theta)^{-1/2}; -inf at theta = 0.
template <typename Scalar>
Scalar x_fn(Scalar theta) {
  if (!(theta >= Scalar(0))) throw Error(ErrorCode::kDomain, "x_fn requires theta >= 0");
  if (theta == Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  const Scalar w = lambert_w(theta);
  return std::sqrt(w) - Scalar(1) / std::sqrt(w);
}

/// rho(gamma) = sqrt(2) (1 - exp(1/(2 gamma) - 1/2)), defined for gamma > 1.
template <typename Scalar>
Scalar rho(Scalar gamma) {
  if (!(gamma > Scalar(1))) throw Error(ErrorCode::kDomain, "rho requires gamma > 1");
  return -std::sqrt(Scalar(2)) * std::expm1(Scalar(0.5) / gamma - Scalar(0.5));
}

/// sup over lambda >= 0 of sqrt(q) X(q e^{-lambda Z} det(Sigma / sigma^2) / eps^2),
/// q = w^T (Sigma + lambda I) w. At w = 0 this is the continuous limit
/// -eps / sqrt(det(Sigma / sigma^2)).
template <typename Scalar>
Scalar phi_value(const Vector<Scalar>& w, const Matrix<Scalar>& sigma_mat, Scalar z, Scalar sigma, Scalar eps) {
  if (sigma_mat.rows() != w.size() || sigma_mat.cols() != w.size())
    throw Error(ErrorCode::kShape, "phi_value: Sigma does not match w");
  const Scalar det = (sigma_mat / (sigma * sigma)).determinant();
  if (!(det > Scalar(0))) throw Error(ErrorCode::kPrecondition, "phi_value needs det(Sigma) > 0");
  const Scalar quad = w.dot(sigma_mat * w);
  const Scalar nrm2 = w.squaredNorm();
  if (nrm2 == Scalar(0)) return -eps / std::sqrt(det);

  auto objective = [&](Scalar lambda) {
    const Scalar q = quad + lambda * nrm2;
    return std::sqrt(q) * x_fn(q * std::exp(-lambda * z) * det / (eps * eps));
  };

  // Expand lambda = 1, 2, 4, ... until the objective falls twice in a row.
  Scalar cur = Scalar(1);
  Scalar f_prev = objective(Scalar(0)), f_cur = objective(cur);
  Scalar best_lambda = f_cur > f_prev ? cur : Scalar(0);
  Scalar best = std::max(f_prev, f_cur);
  int falls = f_cur < f_prev ? 1 : 0;
  Scalar lo = Scalar(0), hi = cur;
  for (int it = 0; it < 200 && falls < 2; ++it) {
    cur *= Scalar(2);
    f_prev = f_cur;
    f_cur = objective(cur);
    if (f_cur > best) {
      best = f_cur;
      best_lambda = cur;
    }
    falls = f_cur < f_prev ? falls + 1 : 0;
  }
  if (best_lambda == Scalar(0)) {
    lo = Scalar(0);
    hi = Scalar(1);
  } else {
    lo = best_lambda / Scalar(2);
    hi = best_lambda * Scalar(2);
    if (best_lambda == Scalar(1)) lo = Scalar(0);
  }

  const Scalar inv_phi = (std::sqrt(Scalar(5)) - Scalar(1)) / Scalar(2);
  Scalar c = hi - inv_phi * (hi - lo);
  Scalar d = lo + inv_phi * (hi - lo);
  Scalar fc = objective(c), fd = objective(d);
  for (int it = 0; it < 400 && hi - lo > Scalar(1e-10) * std::max(Scalar(1), hi); ++it) {
    if (fc >= fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  return std::max({best, fc, fd, objective(Scalar(0))});
}

/// Log barrier of the ball of radius R: -mu ln(1 - ||w||^2 / R^2).
template <typename Scalar = double>
struct BallBarrier {
  Scalar radius = Scalar(1);
  Scalar mu = Scalar(1);

  Scalar value(const Vector<Scalar>& w) const {
    const Scalar r2 = w.squaredNorm() / (radius * radius);
    if (!(r2 < Scalar(1))) throw Error(ErrorCode::kDomain, "point lies outside the open ball");
    return -mu * std::log1p(-r2);
  }

  // Conjugate: the sup over w is attained at radius r = s R^2 / (mu + D),
  // D = sqrt(mu^2 + s^2 R^2), s = ||v||.
  Scalar conjugate(const Vector<Scalar>& v) const {
    const Scalar s = v.norm();
    const Scalar dd = std::hypot(mu, s * radius);
    const Scalar r = s * radius * radius / (mu + dd);
    return s * r + mu * std::log(Scalar(2) * mu / (mu + dd));
  }

  Vector<Scalar> conjugate_grad(const Vector<Scalar>& v) const {
    const Scalar s = v.norm();
    const Scalar dd = std::hypot(mu, s * radius);
    return v * (radius * radius / (mu + dd));
  }

  Matrix<Scalar> conjugate_hessian(const Vector<Scalar>& v) const {
    const Eigen::Index n = v.size();
    const Scalar s = v.norm();
    const Scalar dd = std::hypot(mu, s * radius);
    const Scalar r_over_s = radius * radius / (mu + dd);
    Matrix<Scalar> hess = r_over_s * Matrix<Scalar>::Identity(n, n);
    if (s > Scalar(0)) {
      const Scalar dr = mu * radius * radius / (dd * (mu + dd));
      const Vector<Scalar> e = v / s;
      hess += (dr - r_over_s) * e * e.transpose();
    }
    return hess;
  }
};

template <typename Scalar = double>
struct FullMatrixConfig {
  Scalar sigma = Scalar(1);
  Scalar eps = Scalar(1);
  Scalar gamma = Scalar(2);
  Scalar radius = Scalar(1);
  Scalar mu = Scalar(1);
  int max_iterations = 10000;
  Scalar grad_tol = Scalar(1e-9);

  void validate() const {
    if (!(sigma > Scalar(0))) throw Error(ErrorCode::kConfig, "sigma must be positive");
    if (!(eps > Scalar(0))) throw Error(ErrorCode::kConfig, "eps must be positive");
    if (!(gamma > Scalar(1))) throw Error(ErrorCode::kConfig, "full-matrix gamma must exceed 1");
    if (!(radius > Scalar(0))) throw Error(ErrorCode::kConfig, "radius must be positive");
    if (!(mu > Scalar(0))) throw Error(ErrorCode::kConfig, "barrier weight must be positive");
  }

  BallBarrier<Scalar> barrier() const { return {radius, mu}; }
};

template <typename Scalar = double>
struct DualSolution {
  Scalar value = Scalar(0);
  Scalar lambda = Scalar(0);
  Vector<Scalar> u;
  Vector<Scalar> w;  // barrier-conjugate gradient at -u: the FTRL iterate
  Scalar grad_norm = Scalar(0);
  int iterations = 0;
};

namespace detail {

// The dual objective in the eigenbasis of Sigma = sigma^2 I + gamma V, where
// Sigma is diagonal with entries s.
template <typename Scalar>
struct DualObjective {
  Vector<Scalar> s;
  Vector<Scalar> g;
  Scalar z;
  Scalar log_scale;  // ln eps - 0.5 ln det(Sigma / sigma^2)
  BallBarrier<Scalar> barrier;

  struct Eval {
    Scalar value, lambda, e;
    Vector<Scalar> grad;
    Matrix<Scalar> hess;
  };

  Scalar solve_lambda(const Vector<Scalar>& theta) const {
    auto excess = [&](Scalar lam) {
      return (theta.array() / (s.array() + lam)).square().sum() - z;
    };
    if (excess(Scalar(0)) <= Scalar(0)) return Scalar(0);
    // Newton from the left on a convex decreasing function never overshoots.
    Scalar lam = Scalar(0);
    for (int it = 0; it < 500; ++it) {
      const Scalar f = excess(lam);
      const Scalar df = Scalar(-2) * (theta.array().square() / (s.array() + lam).cube()).sum();
      const Scalar next = lam - f / df;
      if (!(next > lam) || next - lam <= Scalar(1e-15) * next) {
        lam = std::max(lam, next);
        break;
      }
      lam = next;
    }
    return lam;
  }

  Scalar value_only(const Vector<Scalar>& u) const {
    const Vector<Scalar> theta = g - u;
    const Scalar lam = solve_lambda(theta);
    const Scalar quad = (theta.array().square() / (s.array() + lam)).sum();
    return std::exp(log_scale + Scalar(0.5) * quad + Scalar(0.5) * lam * z) + barrier.conjugate(-u);
  }

  Eval eval(const Vector<Scalar>& u) const {
    const Vector<Scalar> theta = g - u;
    Eval out;
    out.lambda = solve_lambda(theta);
    const Vector<Scalar> inv = (s.array() + out.lambda).inverse().matrix();
    const Vector<Scalar> m = theta.cwiseProduct(inv);
    const Scalar quad = theta.dot(m);
    out.e = std::exp(log_scale + Scalar(0.5) * quad + Scalar(0.5) * out.lambda * z);
    out.value = out.e + barrier.conjugate(-u);

    Matrix<Scalar> h_theta = inv.asDiagonal();
    if (out.lambda > Scalar(0)) {
      const Vector<Scalar> v = m.cwiseProduct(inv);
      const Scalar denom = m.dot(v);
      if (denom > Scalar(0)) h_theta -= v * v.transpose() / denom;
    }
    h_theta += m * m.transpose();
    h_theta *= out.e;

    out.grad = -out.e * m - barrier.conjugate_grad(-u);
    out.hess = h_theta + barrier.conjugate_hessian(-u);
    return out;
  }
};

}  // namespace detail

/// Evaluates inf over (lambda >= 0, u) of
///   eps exp(0.5 (G-u)^T (Sigma + lambda I)^{-1} (G-u) + lambda Z / 2) / sqrt(det(Sigma / sigma^2))
///   + barrier*(-u),
/// with Sigma = sigma^2 I + gamma V and Z = rho(gamma)^2 / h^2, by damped
/// Newton steps in u (lambda is minimized exactly for each u).
template <typename Scalar>
DualSolution<Scalar> psi_star_value(const Vector<Scalar>& G, const Matrix<Scalar>& V, Scalar h,
                                    const FullMatrixConfig<Scalar>& config,
                                    const std::optional<Vector<Scalar>>& warm_start = std::nullopt) {
  config.validate();
  const Eigen::Index n = G.size();
  if (V.rows() != n || V.cols() != n) throw Error(ErrorCode::kShape, "psi_star_value: V does not match G");
  if (!(h > Scalar(0))) throw Error(ErrorCode::kInvalidHint, "psi_star_value needs h > 0");

  const Matrix<Scalar> sigma_mat =
      config.sigma * config.sigma * Matrix<Scalar>::Identity(n, n) + config.gamma * V;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> eig(sigma_mat);
  const Matrix<Scalar>& q = eig.eigenvectors();

  detail::DualObjective<Scalar> obj;
  obj.s = eig.eigenvalues();
  if (!(obj.s.minCoeff() > Scalar(0))) throw Error(ErrorCode::kPrecondition, "Sigma is not positive definite");
  obj.g = q.transpose() * G;
  const Scalar r = rho(config.gamma);
  obj.z = r * r / (h * h);
  obj.log_scale = std::log(config.eps) - Scalar(0.5) * (obj.s.array() / (config.sigma * config.sigma)).log().sum();
  obj.barrier = config.barrier();

  Vector<Scalar> u = warm_start && warm_start->size() == n ? Vector<Scalar>(q.transpose() * *warm_start) : obj.g;
  auto current = obj.eval(u);
  if (!std::isfinite(current.value)) {
    u = obj.g;
    current = obj.eval(u);
  }

  DualSolution<Scalar> out;
  int it = 0;
  for (; it < config.max_iterations; ++it) {
    if (current.grad.norm() <= config.grad_tol) break;
    const Vector<Scalar> step = -current.hess.ldlt().solve(current.grad);
    Vector<Scalar> dir = step;
    if (!(dir.dot(current.grad) < Scalar(0)) || !dir.allFinite()) dir = -current.grad;
    Scalar t = Scalar(1);
    bool moved = false;
    for (int ls = 0; ls < 80; ++ls) {
      const Vector<Scalar> cand = u + t * dir;
      const Scalar val = obj.value_only(cand);
      if (std::isfinite(val) && val <= current.value + Scalar(1e-4) * t * dir.dot(current.grad)) {
        u = cand;
        moved = true;
        break;
      }
      t *= Scalar(0.5);
    }
    if (!moved) break;
    current = obj.eval(u);
  }

  const Scalar gnorm = current.grad.norm();
  // At the rounding floor the line search can stall slightly above the target.
  if (!(gnorm <= config.grad_tol) && !(gnorm <= Scalar(1e-6) * std::max(Scalar(1), current.e)))
    throw Error(ErrorCode::kNumericFailure, "dual solve stalled after " + std::to_string(it) +
                                                " iterations with gradient norm " + std::to_string(double(gnorm)));

  out.value = current.value;
  out.lambda = current.lambda;
  out.u = q * u;
  out.w = q * obj.barrier.conjugate_grad(-u);
  out.grad_norm = gnorm;
  out.iterations = it;
  return out;
}

/// FTRL with the full-matrix regularizer plus a ball barrier; reference
/// quality, limited to d <= 4.
template <typename Scalar = double>
class FullMatrixLearner {
 public:
  FullMatrixLearner(Eigen::Index dim, FullMatrixConfig<Scalar> config)
      : config_((config.validate(), config)),
        g_sum_(Vector<Scalar>::Zero(dim)),
        v_(Matrix<Scalar>::Zero(dim, dim)) {
    if (dim < 1 || dim > 4) throw Error(ErrorCode::kPrecondition, "full-matrix learner supports 1 <= d <= 4");
  }

  Vector<Scalar> fm_predict(Scalar hint) {
    if (!(hint > Scalar(0)) || !std::isfinite(hint) || hint < h_)
      throw Error(ErrorCode::kInvalidHint, "hints must be positive, finite and non-decreasing");
    h_ = hint;
    last_ = psi_star_value(g_sum_, v_, h_, config_, warm_);
    warm_ = last_.u;
    awaiting_feedback_ = true;
    return last_.w;
  }

  void fm_update(const Vector<Scalar>& g) {
    if (!awaiting_feedback_) throw Error(ErrorCode::kContractViolation, "update called without a preceding predict");
    if (g.size() != g_sum_.size()) throw Error(ErrorCode::kShape, "gradient dimension mismatch");
    if (!(g.norm() <= h_))
      throw Error(ErrorCode::kContractViolation, "||g|| exceeds the hint at round " + std::to_string(round_ + 1));
    g_sum_ += g;
    v_.noalias() += g * g.transpose();
    ++round_;
    awaiting_feedback_ = false;
  }

  const FullMatrixConfig<Scalar>& config() const { return config_; }
  const Vector<Scalar>& g_sum() const { return g_sum_; }
  const Matrix<Scalar>& v() const { return v_; }
  Scalar hint() const { return h_; }
  long round() const { return round_; }
  const DualSolution<Scalar>& last_solution() const { return last_; }

 private:
  FullMatrixConfig<Scalar> config_;
  Vector<Scalar> g_sum_;
  Matrix<Scalar> v_;
  Scalar h_ = Scalar(0);
  long round_ = 0;
  bool awaiting_feedback_ = false;
  DualSolution<Scalar> last_;
  std::optional<Vector<Scalar>> warm_;
};

/// Objective minimized by fm_predict: <G, w> + Phi(-w; Sigma, Z) + barrier(w).
template <typename Scalar>
Scalar fm_objective(const Vector<Scalar>& w, const Vector<Scalar>& G, const Matrix<Scalar>& V, Scalar h,
                    const FullMatrixConfig<Scalar>& config) {
  const Eigen::Index n = w.size();
  const Matrix<Scalar> sigma_mat =
      config.sigma * config.sigma * Matrix<Scalar>::Identity(n, n) + config.gamma * V;
  const Scalar r = rho(config.gamma);
  return G.dot(w) + phi_value<Scalar>(-w, sigma_mat, r * r / (h * h), config.sigma, config.eps) +
         config.barrier().value(w);
}

/// eps + barrier*(0) + barrier(w) + sqrt(Q ln_+(det(Sigma_T / sigma^2) Q)), with
/// Q = max{w^T Sigma_T w, (h^2 ||w||^2 / rho^2 ln(det h^2 ||w||^2 / (eps^2 rho^2)) + w^T Sigma_T w) / 2}.
template <typename Scalar>
Scalar fm_regret_bound(const Matrix<Scalar>& V_T, Scalar h_T, const Vector<Scalar>& w,
                       const FullMatrixConfig<Scalar>& config) {
  const auto barrier = config.barrier();
  if (!(w.norm() < config.radius)) throw Error(ErrorCode::kDomain, "comparator must lie inside the open ball");
  const Eigen::Index n = w.size();
  if (V_T.rows() != n || V_T.cols() != n) throw Error(ErrorCode::kShape, "fm_regret_bound: V does not match w");
  const Scalar s2 = config.sigma * config.sigma;
  const Matrix<Scalar> sigma_t = s2 * Matrix<Scalar>::Identity(n, n) + config.gamma * V_T;
  const Scalar det = (sigma_t / s2).determinant();
  const Scalar r = rho(config.gamma);
  const Scalar quad = w.dot(sigma_t * w);
  const Scalar a = h_T * h_T * w.squaredNorm() / (r * r);
  const Scalar second = a > Scalar(0)
                            ? Scalar(0.5) * (a * std::log(det * a / (config.eps * config.eps)) + quad)
                            : Scalar(0.5) * quad;
  const Scalar big_q = std::max(quad, second);
  const Scalar ln_plus = big_q > Scalar(0) ? std::max(Scalar(0), std::log(det * big_q)) : Scalar(0);
  return config.eps + barrier.conjugate(Vector<Scalar>::Zero(n)) + barrier.value(w) + std::sqrt(big_q * ln_plus);
}

}  // namespace pfol
